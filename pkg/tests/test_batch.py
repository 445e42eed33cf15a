import json

import pytest

from brentkit.batch import (
    REFERENCE,
    BatchOptions,
    BatchReport,
    batch_analyze,
    compare_with_reference,
    deterministic_sample,
    histogram_report,
    list_algorithm_files,
)
from brentkit.exact import MatMulFormat, natural_algorithm
from brentkit.io import serialize_text, write_algorithm


@pytest.fixture
def strassen_dir(tmp_path, strassen):
    write_algorithm(strassen, tmp_path / "strassen.json")
    return tmp_path


@pytest.fixture
def mixed_dir(tmp_path, strassen):
    write_algorithm(strassen, tmp_path / "b_strassen.json")
    write_algorithm(natural_algorithm(MatMulFormat(2, 2, 2)), tmp_path / "a_natural.txt")
    broken = serialize_text(strassen).replace("\n-1", "\n5", 1)
    (tmp_path / "c_broken.alg").write_text(broken)
    (tmp_path / "d_garbage.json").write_text("{not json")
    (tmp_path / "notes.md").write_text("ignored")
    return tmp_path


def test_single_strassen(strassen_dir):
    rep = batch_analyze(strassen_dir, BatchOptions(method="exact"))
    assert rep.histogram() == {61: 1}
    assert rep.weak_d_count() == 1
    rec = rep.records[0]
    assert rec["bounds"]["u"] == 23 and rec["bounds"]["g_dprime"] == 0


def test_single_strassen_modular(strassen_dir):
    rep = batch_analyze(strassen_dir)
    assert rep.histogram() == {61: 1}
    assert len(rep.records[0]["rank_certificate"]["primes"]) == 3


def test_mixed_directory(mixed_dir):
    rep = batch_analyze(mixed_dir)
    assert [r["file"] for r in rep.records] == ["a_natural.txt", "b_strassen.json", "c_broken.alg", "d_garbage.json"]
    assert rep.records[2]["is_solution"] is False
    assert "error" in rep.records[3]
    assert sum(rep.histogram().values()) == len(rep.solutions) == 2
    # the natural <2,2,2> algorithm has r = 8, so k = 96
    assert rep.k_values() == {84, 96}


def test_deterministic_across_runs_and_jobs(mixed_dir):
    a = batch_analyze(mixed_dir, BatchOptions(seed=7)).dumps()
    b = batch_analyze(mixed_dir, BatchOptions(seed=7)).dumps()
    c = batch_analyze(mixed_dir, BatchOptions(seed=7, jobs=2)).dumps()
    assert a == b == c


def test_report_roundtrip(strassen_dir, tmp_path):
    rep = batch_analyze(strassen_dir)
    path = tmp_path / "report.json"
    path.write_text(rep.dumps())
    again = BatchReport.load(path)
    assert again.histogram() == {61: 1}
    assert json.loads(again.dumps())["histogram"] == {"61": 1}


def test_histogram_rows(strassen_dir):
    rep = batch_analyze(strassen_dir)
    assert histogram_report(rep, "csv") == "rank,upper_bound,count\n61,23,1\n"
    assert json.loads(histogram_report(rep, "json")) == [{"rank": 61, "upper_bound": 23, "count": 1}]
    table = histogram_report(rep, "table").splitlines()
    assert table[1].split() == ["61", "23", "1"]


def test_empty_report_header_only():
    empty = BatchReport()
    assert histogram_report(empty, "csv") == "rank,upper_bound,count\n"
    assert json.loads(histogram_report(empty, "json")) == []
    assert histogram_report(empty, "table").split() == ["rank", "upper_bound", "count"]


def fake_report(ranks, weak=True, sample=None):
    records = [
        {
            "file": f"f{i:05d}.json",
            "is_solution": True,
            "rank": rank,
            "bounds": {"k": 621, "precondition_flags": {"weak_d_algorithm": weak}},
        }
        for i, rank in enumerate(ranks)
    ]
    opts = {} if sample is None else {"sample": sample}
    return BatchReport(records, opts)


def test_333_table_rendering():
    ranks = [r for r, c in REFERENCE["333"]["histogram"].items() for _ in range(c)]
    rep = fake_report(ranks)
    rows = histogram_report(rep, "csv").splitlines()[1:]
    assert len(rows) == 20
    assert rows[0] == "526,95,5" and rows[-1] == "545,76,3"
    assert sum(rep.histogram().values()) == 17376


def test_reference_exact_match_has_no_discrepancy():
    ranks = [r for r, c in REFERENCE["333"]["histogram"].items() for _ in range(c)]
    weak = [True] * 8664 + [False] * (17376 - 8664)
    rep = fake_report(ranks)
    for rec, w in zip(rep.records, weak):
        rec["bounds"]["precondition_flags"]["weak_d_algorithm"] = w
    assert compare_with_reference(rep, "333") == []


def test_reference_deviation_is_recorded():
    ranks = [r for r, c in REFERENCE["333"]["histogram"].items() for _ in range(c)]
    ranks[0] = 600
    disc = compare_with_reference(fake_report(ranks), "333")
    kinds = {d["kind"] for d in disc}
    assert {"rank_outside_support", "histogram_count", "weak_d_count"} <= kinds
    assert any(d.get("file") == "f00000.json" for d in disc)


def test_sampled_report_checks_support_only():
    assert compare_with_reference(fake_report([2155, 2144, 2201], sample=3), "444") == []
    disc = compare_with_reference(fake_report([2143], sample=1), "444")
    assert [d["kind"] for d in disc] == ["rank_outside_support"]


def test_offending_file_gets_rank_comparison(tmp_path, strassen):
    write_algorithm(strassen, tmp_path / "s.json")
    rep = batch_analyze(tmp_path, BatchOptions(), sample=1)
    disc = compare_with_reference(rep, "444", tmp_path)
    assert disc[0]["kind"] == "rank_outside_support"
    cmp = disc[0]["rank_comparison"]
    assert cmp["modular"] == cmp["numeric"] == 61 and cmp["agree"]


def test_deterministic_sample(tmp_path):
    for i in range(10):
        (tmp_path / f"{i}.json").write_text("{}")
    files = list_algorithm_files(tmp_path)
    s1 = deterministic_sample(files, 4, 3)
    assert s1 == deterministic_sample(files, 4, 3) and len(s1) == 4 and s1 == sorted(s1)
    assert deterministic_sample(files, 50, 3) == files
