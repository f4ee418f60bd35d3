import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from docross.model import (
    EmptyWindow,
    ModelParams,
    NegativeCoupling,
    NonPositiveBeta,
    NonPositiveDelta,
    ParameterError,
    crossing_times,
    hamiltonian_at,
    load_params,
    params_from_mapping,
    validate,
)
from strategies import params


def test_hamiltonian_decoupled():
    H = hamiltonian_at(ModelParams(0, 0, 1, 1), 0.0)
    assert np.array_equal(H, np.diag([-1.0, 0.0, 1.0]))


def test_hamiltonian_examples():
    assert np.array_equal(hamiltonian_at(ModelParams(1, 1, 1, 1), 0.0), [[-1, 1, 0], [1, 0, 1], [0, 1, 1]])
    assert np.array_equal(hamiltonian_at(ModelParams(1, 2, 1, 1), 3.0), [[-1, 1, 0], [1, 3, 2], [0, 2, 1]])


@pytest.mark.parametrize("delta, beta, expected", [(1, 1, (-1, 1)), (2, 4, (-0.5, 0.5)), (1, 0.1, (-10, 10))])
def test_crossing_times(delta, beta, expected):
    assert crossing_times(ModelParams(1, 1, delta, beta)) == pytest.approx(expected, rel=1e-15)


@given(params(), st.floats(-50, 50), st.floats(-50, 50))
def test_only_middle_entry_depends_on_time(p, t1, t2):
    H1, H2 = hamiltonian_at(p, t1), hamiltonian_at(p, t2)
    diff = H2 - H1
    assert diff[1, 1] == pytest.approx(p.beta * (t2 - t1), abs=1e-12 * (1 + abs(p.beta * t2)))
    mask = np.ones((3, 3), bool)
    mask[1, 1] = False
    assert np.all(diff[mask] == 0)
    assert H1[0, 2] == 0 and H1[2, 0] == 0
    assert np.array_equal(H1, H1.T)


@given(params())
def test_diabatic_energies_meet_at_crossings(p):
    tm, tp = crossing_times(p)
    assert hamiltonian_at(p, tm)[0, 0] == pytest.approx(hamiltonian_at(p, tm)[1, 1], abs=1e-14)
    assert hamiltonian_at(p, tp)[1, 1] == pytest.approx(hamiltonian_at(p, tp)[2, 2], abs=1e-14)


def test_validate_accepts_standard_point():
    validate(ModelParams(1, 1, 1, 1, -5, 5))


@pytest.mark.parametrize(
    "p, exc",
    [
        (ModelParams(1, 1, -1, 1), NonPositiveDelta),
        (ModelParams(1, 1, 0, 1), NonPositiveDelta),
        (ModelParams(1, 1, 1, 0), NonPositiveBeta),
        (ModelParams(-1, 1, 1, 1), NegativeCoupling),
        (ModelParams(1, 1, 1, 1, 2, 1), EmptyWindow),
    ],
)
def test_validate_rejects(p, exc):
    with pytest.raises(exc):
        validate(p)


def test_negative_coupling_names_field():
    with pytest.raises(NegativeCoupling) as info:
        validate(ModelParams(1, -2, 1, 1))
    assert info.value.field == "omega23"
    assert "omega23" in str(info.value)


def test_zero_coupling_allowed():
    validate(ModelParams(0, 0, 1, 1))


def test_mapping_with_infinite_strings():
    p = params_from_mapping({"omega": 2, "delta": 1, "beta": 3, "t_start": "-inf", "t_end": "5"})
    assert (p.omega12, p.omega23, p.beta) == (2, 2, 3)
    assert p.t_start == -math.inf and p.t_end == 5


def test_mapping_rejects_unknown_key():
    with pytest.raises(ParameterError):
        params_from_mapping({"omega": 1, "gamma": 2})


def test_load_json_and_yaml(tmp_path):
    j = tmp_path / "p.json"
    j.write_text(json.dumps({"omega12": 1, "omega23": 2, "delta": 0.5, "beta": 1, "t_end": "inf"}))
    y = tmp_path / "p.yaml"
    y.write_text("omega12: 1\nomega23: 2\ndelta: 0.5\nbeta: 1\nt_start: -inf\n")
    assert load_params(j) == load_params(y) == ModelParams(1, 2, 0.5, 1)


def test_to_dict_round_trip():
    p = ModelParams(1, 2, 0.5, 3, -math.inf, 4)
    assert params_from_mapping(p.to_dict()) == p
    json.dumps(p.to_dict())  # strict JSON, no Infinity literals
