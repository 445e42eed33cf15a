"""Corpus sweeps: per-file pipeline, rank histograms, and comparison against
the published <3,3,3> and <4,4,4> statistics."""
from __future__ import annotations

import csv
import io
import json
import logging
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .brent import is_solution, jacobian
from .exact import ROLES
from .io import parse_algorithm
from .rank import compute_rank, rank_modular, rank_numeric
from .structure import bound_report, role_verdicts, unit_basis_containment

log = logging.getLogger(__name__)

ALGORITHM_SUFFIXES = (".json", ".txt", ".alg")


@dataclass(frozen=True)
class BatchOptions:
    method: str = "modular"
    primes: int = 3
    seed: int = 0
    jobs: int = 1


@dataclass
class BatchReport:
    records: list[dict] = field(default_factory=list)
    options: dict = field(default_factory=dict)

    @property
    def solutions(self) -> list[dict]:
        return [r for r in self.records if r.get("is_solution")]

    def histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(r["rank"] for r in self.solutions).items()))

    def k_values(self) -> set[int]:
        return {r["bounds"]["k"] for r in self.solutions}

    def weak_d_count(self) -> int:
        return sum(1 for r in self.solutions if r["bounds"]["precondition_flags"]["weak_d_algorithm"])

    def to_json(self) -> dict:
        ks = sorted(self.k_values())
        return {
            "options": self.options,
            "files": len(self.records),
            "parsed": sum(1 for r in self.records if "error" not in r),
            "solutions": len(self.solutions),
            "k": ks[0] if len(ks) == 1 else ks,
            "histogram": {str(k): v for k, v in self.histogram().items()},
            "weak_d_count": self.weak_d_count(),
            "records": self.records,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> "BatchReport":
        return cls(records=list(data.get("records", [])), options=dict(data.get("options", {})))

    @classmethod
    def load(cls, path) -> "BatchReport":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def analyze_file(path, options: BatchOptions) -> dict:
    """parse -> is_solution -> jacobian -> rank -> bounds -> property checks."""
    record: dict = {"file": Path(path).name}
    try:
        q = parse_algorithm(path)
    except (ValueError, OSError) as exc:
        record["error"] = f"{type(exc).__name__}: {exc}"
        return record
    record["format"] = list(q.format.as_tuple())
    record["r"] = q.r
    record["is_solution"] = is_solution(q)
    if not record["is_solution"]:
        return record
    rank = compute_rank(jacobian(q), options.method, primes=options.primes, seed=options.seed)
    record["rank"] = rank.rank
    record["rank_method"] = rank.method
    if rank.method == "modular":
        record["rank_certificate"] = rank.certificate
    report = bound_report(q, rank, role_verdicts(q))
    record["bounds"] = report.to_json()
    record["unit_basis_containment"] = {
        role: {mode: unit_basis_containment(q, role, mode) for mode in ("literal", "up_to_scalar")}
        for role in ROLES
    }
    return record


def _analyze_star(args):
    return analyze_file(*args)


def list_algorithm_files(directory) -> list[Path]:
    return sorted(p for p in Path(directory).iterdir() if p.is_file() and p.suffix.lower() in ALGORITHM_SUFFIXES)


def deterministic_sample(files: list[Path], size: int, seed: int) -> list[Path]:
    if size >= len(files):
        return list(files)
    return sorted(random.Random(seed).sample(files, size))


def batch_analyze(directory, options: BatchOptions = BatchOptions(), sample: int | None = None) -> BatchReport:
    files = list_algorithm_files(directory)
    if sample is not None:
        files = deterministic_sample(files, sample, options.seed)
    work = [(f, options) for f in files]
    if options.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(options.jobs) as pool:
            records = list(pool.map(_analyze_star, work, chunksize=4))
    else:
        records = [analyze_file(*w) for w in work]
    for rec in records:
        if "error" in rec:
            log.warning("%s: %s", rec["file"], rec["error"])
    opts = {"method": options.method, "primes": options.primes, "seed": options.seed}
    if sample is not None:
        opts["sample"] = sample
    return BatchReport(records=records, options=opts)


# -- rendering ------------------------------------------------------------------


def histogram_rows(report: BatchReport) -> list[tuple[int, int | None, int]]:
    ks = report.k_values()
    k = next(iter(ks)) if len(ks) == 1 else None
    return [(rank, None if k is None else k - rank, count) for rank, count in report.histogram().items()]


def histogram_report(report: BatchReport, fmt: str = "table") -> str:
    rows = histogram_rows(report)
    header = ("rank", "upper_bound", "count")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(["" if x is None else x for x in row] for row in rows)
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([dict(zip(header, row)) for row in rows], indent=1) + "\n"
    if fmt == "table":
        cells = [header] + [tuple("" if x is None else str(x) for x in row) for row in rows]
        widths = [max(len(c[i]) for c in cells) for i in range(3)]
        return "\n".join("  ".join(c[i].rjust(widths[i]) for i in range(3)) for c in cells) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


# -- published corpus statistics -----------------------------------------------

REFERENCE = {
    "333": {
        "format": (3, 3, 3),
        "r": 23,
        "total": 17376,
        "histogram": dict(
            zip(
                range(526, 546),
                (5, 25, 79, 256, 624, 1421, 2250, 3069, 3486, 2870,
                 1709, 858, 387, 159, 73, 68, 25, 7, 2, 3),
            )
        ),
        "weak_d": 8664,
    },
    "444": {
        "format": (4, 4, 4),
        "r": 49,
        "total": 14236,
        "rank_range": (2144, 2201),
        "mode": (2155, 13530),
        "weak_d": 14204,
    },
}


def _rank_comparison(directory, filename: str, options: BatchOptions) -> dict:
    q = parse_algorithm(Path(directory) / filename)
    jac = jacobian(q)
    modular = rank_modular(jac, options.primes, options.seed)
    numeric = rank_numeric(jac)
    return {
        "modular": modular.rank,
        "modular_primes": modular.certificate["primes"],
        "numeric": numeric.rank,
        "numeric_tolerance": numeric.certificate["tolerance"],
        "numeric_gap_ratio": numeric.certificate["gap_ratio"],
        "agree": modular.rank == numeric.rank,
    }


def compare_with_reference(
    report: BatchReport, corpus: str, directory=None, options: BatchOptions = BatchOptions(), max_files: int = 20
) -> list[dict]:
    """Discrepancy records against the published statistics (empty list = agreement).

    A sampled report is only checked for rank support; a full report is
    checked count by count. Offending files get a modular-vs-numeric rank
    comparison when the corpus directory is given.
    """
    ref = REFERENCE[corpus]
    full = "sample" not in report.options
    out: list[dict] = []
    offenders: list[str] = []

    for rec in report.records:
        if "error" in rec or not rec.get("is_solution"):
            out.append({"kind": "not_a_solution", "file": rec["file"], "detail": rec.get("error", "residual nonzero")})
            continue
        rank = rec["rank"]
        if "histogram" in ref:
            inside = rank in ref["histogram"]
        else:
            lo, hi = ref["rank_range"]
            inside = lo <= rank <= hi
        if not inside:
            out.append({"kind": "rank_outside_support", "file": rec["file"], "rank": rank})
            offenders.append(rec["file"])

    if full:
        hist = report.histogram()
        if len(report.records) != ref["total"]:
            out.append({"kind": "file_count", "expected": ref["total"], "observed": len(report.records)})
        if "histogram" in ref:
            for rank in sorted(set(hist) | set(ref["histogram"])):
                exp, obs = ref["histogram"].get(rank, 0), hist.get(rank, 0)
                if exp != obs:
                    out.append({"kind": "histogram_count", "rank": rank, "expected": exp, "observed": obs})
                    offenders.extend(r["file"] for r in report.solutions if r["rank"] == rank)
        else:
            rank, exp = ref["mode"]
            if hist.get(rank, 0) != exp:
                out.append({"kind": "histogram_count", "rank": rank, "expected": exp, "observed": hist.get(rank, 0)})
        if report.weak_d_count() != ref["weak_d"]:
            out.append({"kind": "weak_d_count", "expected": ref["weak_d"], "observed": report.weak_d_count()})

    if directory is not None:
        seen = set()
        for rec in out:
            f = rec.get("file")
            if f and f in offenders and f not in seen and len(seen) < max_files:
                seen.add(f)
                rec["rank_comparison"] = _rank_comparison(directory, f, options)
        for f in offenders:
            if f not in seen and len(seen) < max_files:
                seen.add(f)
                out.append({"kind": "offending_file", "file": f, "rank_comparison": _rank_comparison(directory, f, options)})
    return out
