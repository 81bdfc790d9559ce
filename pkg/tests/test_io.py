import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from gcover.errors import InvariantViolation
from gcover.io import dumps, fmt, matrix_from_json, matrix_to_json
from gcover.phase_space import Statistics

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.integers(1, 3).flatmap(lambda n: arrays(float, (2 * n, 2 * n), elements=finite)),
       st.sampled_from(["boson", "fermion"]))
def test_matrix_round_trip(a, s):
    text = dumps(matrix_to_json(a, s))
    back, stats = matrix_from_json(json.loads(text))
    assert np.array_equal(back, a)
    assert stats is Statistics.parse(s)


def test_matrix_schema_validation():
    with pytest.raises(InvariantViolation):
        matrix_to_json(np.zeros((3, 3)), "boson")
    good = matrix_to_json(np.eye(2), "fermion")
    with pytest.raises(InvariantViolation):
        matrix_from_json({**good, "data": [1.0, 0.0]})
    with pytest.raises(InvariantViolation):
        matrix_from_json({k: v for k, v in good.items() if k != "rows"})
    with pytest.raises(InvariantViolation):
        matrix_from_json({**good, "n_modes": 2})


@given(finite)
def test_fmt_round_trips(x):
    assert float(fmt(x)) == x


def test_fmt_special():
    assert fmt(float("nan")) == "nan"
    assert fmt(float("inf")) == "inf"
    assert fmt(0.1) == "0.10000000000000001"


def test_dumps_deterministic_and_valid():
    obj = {"b": [1.0, 2], "a": {"z": complex(1, -2), "flag": True, "none": None, "bad": float("nan")},
           "m": np.arange(4.0).reshape(2, 2)}
    text = dumps(obj)
    assert text == dumps(obj)
    back = json.loads(text)
    assert back["a"]["z"] == [1.0, -2.0]
    assert back["a"]["bad"] is None
    assert back["m"] == [[0.0, 1.0], [2.0, 3.0]]
