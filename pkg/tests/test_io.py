import json
import random
from fractions import Fraction
from importlib.resources import files

import pytest
from hypothesis import given, settings, strategies as st

from brentkit.brent import is_solution
from brentkit.exact import MatMulFormat, ShapeError, builtin_strassen, natural_algorithm
from brentkit.io import (
    ParseError,
    algorithm_from_json,
    algorithm_to_json,
    format_entry,
    parse_algorithm,
    parse_entry,
    parse_text,
    serialize_json,
    serialize_text,
    write_algorithm,
)

from conftest import random_algorithm, small_formats


@pytest.mark.parametrize("fmt", small_formats(2), ids=str)
def test_json_roundtrip_natural(fmt):
    q = natural_algorithm(fmt)
    assert parse_algorithm(serialize_json(q).encode(), "json") == q


def test_text_roundtrip_strassen(strassen):
    assert parse_text(serialize_text(strassen)) == strassen


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_roundtrip_random_rationals(seed):
    rng = random.Random(seed)
    fmt = MatMulFormat(rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3))
    q = random_algorithm(fmt, rng.randint(1, 4), rng, den=5)
    text = serialize_text(q)
    assert parse_text(text) == q
    # text -> json -> text is byte-identical
    via_json = algorithm_from_json(json.loads(serialize_json(parse_text(text))))
    assert serialize_text(via_json) == text
    assert serialize_json(algorithm_from_json(algorithm_to_json(q))) == serialize_json(q)


def test_builtin_files_are_solutions():
    data = files("brentkit") / "data"
    for name, hint in (("strassen.json", "json"), ("strassen.txt", "text")):
        q = parse_algorithm(data.joinpath(name).read_bytes(), hint)
        assert q == builtin_strassen() and is_solution(q)


def test_text_header_2227(strassen, tmp_path):
    path = tmp_path / "s.txt"
    write_algorithm(strassen, path)
    assert path.read_text().splitlines()[0] == "2 2 2 7"
    assert is_solution(parse_algorithm(path))


def test_entries():
    assert parse_entry("-3/6") == Fraction(-1, 2)
    assert parse_entry(4) == 4
    assert format_entry(Fraction(3)) == 3 and format_entry(Fraction(-1, 2)) == "-1/2"
    with pytest.raises(ParseError):
        parse_entry("1.5")
    with pytest.raises(ParseError):
        parse_entry(True)


def test_zero_denominator():
    with pytest.raises(ValueError, match="zero denominator"):
        parse_entry("1/0")
    with pytest.raises(ValueError):
        parse_text("1 1 1 1\n\n1/0\n\n1\n\n1\n")


def test_three_by_three_block_under_2221():
    bad = "2 2 2 1\n\n1 0 0\n0 1 0\n0 0 1\n\n1 0\n0 1\n\n1 0\n0 1\n"
    with pytest.raises(ShapeError):
        parse_text(bad)


def test_json_shape_errors():
    d = algorithm_to_json(natural_algorithm(MatMulFormat(1, 1, 1)))
    d["terms"][0]["u"] = [[1, 0]]
    with pytest.raises(ShapeError):
        algorithm_from_json(d)
    d = algorithm_to_json(natural_algorithm(MatMulFormat(1, 1, 1)))
    d["length"] = 2
    with pytest.raises(ShapeError):
        algorithm_from_json(d)


def test_parse_error_location():
    text = "1 1 1 1\n\n1\n\n  x\n\n1\n"
    with pytest.raises(ParseError) as info:
        parse_text(text)
    assert (info.value.line, info.value.column) == (5, 3)
    with pytest.raises(ParseError) as info:
        parse_text("2 2 two 1\n")
    assert info.value.line == 1


def test_malformed_json_location():
    with pytest.raises(ParseError) as info:
        parse_algorithm(b'{"format": \n  oops}', "json")
    assert info.value.line == 2


def test_missing_field():
    with pytest.raises(ParseError):
        algorithm_from_json({"terms": []})


def test_header_without_blank_line():
    assert parse_text("1 1 1 1\n1\n\n1\n\n1\n") == natural_algorithm(MatMulFormat(1, 1, 1))
