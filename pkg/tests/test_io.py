import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from delay_sl.io import (csv_text, dumps, fmt_float, loads, parse_complex, parse_complex_list,
                         parse_delay, parse_real_list)


@pytest.mark.parametrize("text, value", [
    ("0.35pi", 0.35 * math.pi),
    ("0.35*pi", 0.35 * math.pi),
    ("pi/3", math.pi / 3),
    ("2pi/5", 2 * math.pi / 5),
    ("π/3", math.pi / 3),
    ("1.1", 1.1),
    (1.2, 1.2),
])
def test_parse_delay(text, value):
    assert parse_delay(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text", ["", "pie", "1..2", "pi/x"])
def test_parse_delay_rejects(text):
    with pytest.raises(ValueError):
        parse_delay(text)


@pytest.mark.parametrize("text, value", [
    ("3+4i", 3 + 4j), ("-2", -2), ("1.5i", 1.5j), ("i", 1j), ("-i", -1j),
    ("2 - 0.5i", 2 - 0.5j), ([1, -2], 1 - 2j), (7, 7),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_complex_rejects():
    with pytest.raises(ValueError):
        parse_complex("3+4k")


def test_parse_lists():
    assert parse_complex_list("0,1,-2,3+4i") == [0, 1, -2, 3 + 4j]
    assert parse_real_list("0.5, 1,2") == [0.5, 1.0, 2.0]
    with pytest.raises(ValueError):
        parse_real_list(" , ")


@pytest.mark.parametrize("x, text", [
    (1.0, "1.0"), (-3.0, "-3.0"), (0.1, "0.10000000000000001"), (1e300, "1.0000000000000001e+300"),
    (float("nan"), '"nan"'), (float("inf"), '"inf"'),
])
def test_fmt_float(x, text):
    assert fmt_float(x) == text


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_float_round_trips(x):
    assert float(fmt_float(x)) == x


def test_dumps_sorted_and_typed():
    obj = {"b": np.float64(0.5), "a": [1 + 2j, np.int64(3)], "c": {"z": True, "y": None},
           "d": np.arange(3.0)}
    text = dumps(obj)
    back = loads(text)
    assert list(back) == ["a", "b", "c", "d"]
    assert back["a"] == [[1.0, 2.0], 3] and back["d"] == [0.0, 1.0, 2.0]
    assert back["c"] == {"y": None, "z": True}
    assert text == dumps(json.loads(text))


def test_dumps_empty_containers():
    assert loads(dumps({"a": [], "b": {}})) == {"a": [], "b": {}}


def test_csv_text():
    text = csv_text(["x", "label"], [(0.1, "a"), (np.float64(2.0), "b")])
    assert text.splitlines() == ["x,label", "0.10000000000000001,a", "2,b"]
