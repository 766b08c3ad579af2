import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from measpec.errors import InvalidModelError
from measpec.model import load_model, model_from_dict, potential_from_factors, potential_from_matrix

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_example_factors():
    mdl = potential_from_factors([-1, 1], [-1, 1])
    assert mdl.phi.tolist() == [[1, -1], [-1, 1]]
    assert (mdl.alpha_min, mdl.alpha_max) == (-1, 1)
    mdl = potential_from_factors([0, 1], [0, 1])
    assert mdl.phi.tolist() == [[0, 0], [0, 1]]
    assert (mdl.alpha_min, mdl.alpha_max) == (0, 1)


def test_from_matrix():
    mdl = potential_from_matrix([[0, 0], [0, 1]])
    assert (mdl.alpha_min, mdl.alpha_max) == (0, 1)
    assert mdl.factors is None
    c = potential_from_matrix([[2.5, 2.5], [2.5, 2.5]])
    assert c.alpha_min == c.alpha_max == 2.5
    assert c.is_constant


@pytest.mark.parametrize(
    "factory, args",
    [
        (potential_from_factors, ([3.0], [3.0])),
        (potential_from_factors, ([1, 2], [1, 2, 3])),
        (potential_from_factors, ([1, np.nan], [1, 2])),
        (potential_from_matrix, ([[1, 2], [3]],)),
        (potential_from_matrix, ([[1, 2, 3], [4, 5, 6]],)),
        (potential_from_matrix, ([[1, np.inf], [0, 0]],)),
        (potential_from_matrix, ([[1.0]],)),
    ],
)
def test_invalid(factory, args):
    with pytest.raises(InvalidModelError):
        factory(*args)


def test_immutable():
    mdl = potential_from_factors([0, 1], [0, 1])
    with pytest.raises(ValueError):
        mdl.phi[0, 0] = 5.0


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 7).flatmap(lambda m: st.tuples(arrays(float, m, elements=finite), arrays(float, m, elements=finite))))
def test_factor_product_exact(vectors):
    f1, f2 = vectors
    mdl = potential_from_factors(f1, f2)
    for i in range(mdl.m):
        for j in range(mdl.m):
            assert mdl.phi[i, j] - f1[i] * f2[j] == 0.0
    assert np.all(mdl.alpha_min <= mdl.phi) and np.all(mdl.phi <= mdl.alpha_max)


def test_json_forms(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"m": 2, "f1": [-1, 1], "f2": [-1, 1]}))
    assert load_model(p).factors is not None
    p.write_text(json.dumps({"m": 2, "phi": [[0, 0], [0, 1]]}))
    assert load_model(p).alpha_max == 1.0


@pytest.mark.parametrize(
    "data",
    [
        {"m": 2, "f1": [0, 1], "f2": [0, 1], "phi": [[0, 0], [0, 1]]},
        {"m": 2},
        {"f1": [0, 1], "f2": [0, 1]},
        {"m": 3, "f1": [0, 1], "f2": [0, 1]},
        {"m": 2, "f1": [0, 1]},
        {"m": "2", "phi": [[0, 0], [0, 1]]},
    ],
)
def test_json_rejects(data):
    with pytest.raises(InvalidModelError):
        model_from_dict(data)


def test_load_errors(tmp_path):
    with pytest.raises(InvalidModelError):
        load_model(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InvalidModelError):
        load_model(bad)
