"""Command-line entry point: ``brentkit <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path

from . import io as bio
from .batch import BatchOptions, BatchReport, batch_analyze, compare_with_reference, histogram_report
from .brent import is_solution, jacobian, residual
from .exact import ROLES
from .rank import TolerancePolicy, compute_rank
from .structure import algorithm_d_property, bound_report, role_verdicts, unit_basis_containment, weak_d_check
from .symmetry import NotASolution, apply_element, describe, orbit_rank_experiment, random_element

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load(path: str):
    try:
        return bio.parse_algorithm(path)
    except (OSError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _emit(obj) -> None:
    print(json.dumps(obj, indent=1))


def cmd_verify(args) -> int:
    q = _load(args.file)
    res = residual(q)
    bad = res.nonzero()
    print(f"format {q.format} r={q.r}: {len(res)} equations, {len(bad)} nonzero residual components")
    if bad:
        print("NOT a solution")
        return EXIT_FAIL
    print("solution: residual is exactly zero")
    return EXIT_OK


def cmd_rank(args) -> int:
    q = _load(args.file)
    tol = TolerancePolicy.parse(args.tol)
    result = compute_rank(jacobian(q), args.method, primes=args.primes, seed=args.seed, tol=tol)
    out = result.to_json()
    out["shape"] = list(jacobian(q).shape)
    _emit(out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    q = _load(args.file)
    solved = is_solution(q)
    rank = compute_rank(jacobian(q), args.method, primes=args.primes, seed=args.seed)
    out = bound_report(q, rank).to_json()
    out["is_solution"] = solved
    _emit(out)
    return EXIT_OK if solved else EXIT_FAIL


def cmd_props(args) -> int:
    q = _load(args.file)
    verdicts = role_verdicts(q)
    weak = {role: weak_d_check(q, role) for role in ROLES}
    _emit(
        {
            "is_solution": is_solution(q),
            "d_property": {role: v.to_json() for role, v in verdicts.items()},
            "d_property_algorithm": algorithm_d_property(verdicts),
            "weak_d": weak,
            "weak_d_algorithm": all(weak.values()),
            "unit_basis_containment": {
                role: {mode: unit_basis_containment(q, role, mode) for mode in ("literal", "up_to_scalar")}
                for role in ROLES
            },
        }
    )
    return EXIT_OK


def cmd_transform(args) -> int:
    q = _load(args.file)
    g = random_element(args.action, q, random.Random(args.seed))
    t = apply_element(g, q)
    text = bio.serialize_text(t) if args.to == "text" else bio.serialize_json(t)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(json.dumps(describe(g)))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_orbit(args) -> int:
    q = _load(args.file)
    try:
        report = orbit_rank_experiment(q, args.samples, args.seed, args.method, jobs=args.jobs)
    except NotASolution as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    _emit(report.to_json())
    return EXIT_OK


def cmd_batch(args) -> int:
    if not Path(args.dir).is_dir():
        raise InputError(f"{args.dir}: not a directory")
    options = BatchOptions(args.method, args.primes, args.seed, args.jobs)
    report = batch_analyze(args.dir, options, sample=args.sample)
    Path(args.out).write_text(report.dumps(), encoding="utf-8")
    summary = {"files": len(report.records), "solutions": len(report.solutions), "histogram": report.histogram()}
    if args.reference:
        disc = compare_with_reference(report, args.reference, args.dir, options)
        summary["discrepancies"] = disc
        Path(args.out).with_suffix(".discrepancies.json").write_text(json.dumps(disc, indent=1) + "\n", encoding="utf-8")
    _emit(summary)
    if args.reference and summary["discrepancies"]:
        return EXIT_FAIL
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        report = BatchReport.load(args.path)
    except (OSError, ValueError) as exc:
        raise InputError(f"{args.path}: {exc}") from None
    sys.stdout.write(histogram_report(report, args.format))
    return EXIT_OK


def _rank_options(p: argparse.ArgumentParser, default_method: str = "modular") -> None:
    p.add_argument("--method", choices=("exact", "modular", "numeric"), default=default_method)
    p.add_argument("--primes", type=int, default=3)
    p.add_argument("--seed", type=_seed, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="brentkit", description="Brent-equation solution workbench")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="exact residual check")
    p.add_argument("file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rank", help="Jacobian rank")
    p.add_argument("file")
    _rank_options(p)
    p.add_argument("--tol", default="auto", help="auto or a fixed float (numeric method)")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("bounds", help="upper/lower local-dimension bounds and gaps")
    p.add_argument("file")
    _rank_options(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("props", help="D-property, weak D-property, unit-basis containment")
    p.add_argument("file")
    p.set_defaults(func=cmd_props)

    p = sub.add_parser("transform", help="apply a random group element")
    p.add_argument("file")
    p.add_argument("--action", required=True, choices=("sandwich", "scale", "permute", "cyclic", "transpose"))
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--to", choices=("json", "text"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("orbit", help="Jacobian ranks along random sandwich images")
    p.add_argument("file")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--method", choices=("exact", "modular", "numeric"), default="exact")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("batch", help="analyze every algorithm file in a directory")
    p.add_argument("dir")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    _rank_options(p)
    p.add_argument("--sample", type=int, help="analyze a deterministic sample of this many files")
    p.add_argument("--reference", choices=("333", "444"), help="compare against published corpus statistics")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("report", help="render a batch report's rank histogram")
    p.add_argument("path")
    p.add_argument("--format", choices=("csv", "json", "table"), default="table")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
