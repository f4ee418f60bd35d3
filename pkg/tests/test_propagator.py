import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from docross.model import ModelParams
from docross.propagator import (
    CrossingsOutsideWindow,
    analytic_adiabatic_propagator,
    closed_form_adiabatic_propagator,
    cumulative_phases,
    diabatic_propagator,
    lz_nodes,
    phase_integrals,
    symmetric_adiabatic_propagator,
)
from docross.tables import TransitionTable
from strategies import params

# scipy quad at epsabs 1e-13 on the sorted eigenvalues
PHASE_ORACLE = [
    ((1, 1, 1, 1), (-2.0, 2.0), (7.409332108791008, 0.0, -7.409332108791008)),
    ((1, 1, 1, 1), (1.0, 5.0), (14.63174332319346, 2.498603103487833, -5.130346426681292)),
    ((0.5, 1.5, 1, 2), (-3.0, 4.0), (24.06482257730981, -1.6149230873381, -15.44989948997171)),
]


@pytest.mark.parametrize("args, window, expected", PHASE_ORACLE)
def test_phase_oracle(args, window, expected):
    lam = phase_integrals(ModelParams(*args), *window, tol=1e-13).Lambda
    assert np.allclose(lam, expected, atol=1e-10, rtol=0)


@given(params(), st.floats(-10, 0), st.floats(0.1, 5), st.floats(0.1, 5))
def test_phase_additivity(p, a, d1, d2):
    b, c = a + d1, a + d1 + d2
    whole = phase_integrals(p, a, c, tol=1e-12).Lambda
    parts = phase_integrals(p, a, b, tol=1e-12).Lambda + phase_integrals(p, b, c, tol=1e-12).Lambda
    assert np.allclose(whole, parts, atol=1e-9)


def test_phase_reversal(unit):
    fwd = phase_integrals(unit, -1.0, 3.0).Lambda
    assert np.allclose(phase_integrals(unit, 3.0, -1.0).Lambda, -fwd, atol=1e-12)


def test_cumulative_phases_match_direct(unit):
    times = np.array([-4.0, -1.5, 0.0, 2.0, 6.0])
    cum = cumulative_phases(unit, times, 0.0, tol=1e-12)
    for row, t in zip(cum, times):
        assert np.allclose(row, phase_integrals(unit, 0.0, t, tol=1e-12).Lambda, atol=1e-9)


def test_nodes_at_unit_parameters(unit):
    first, second = lz_nodes(unit)
    assert (first.t_cross, second.t_cross) == (-1.0, 1.0)
    assert first.p == pytest.approx(0.0018674427317079888144, rel=1e-13)
    assert first.phi == pytest.approx(0.087038483864981507503, rel=1e-13)


@given(params(), st.floats(0.5, 10), st.floats(0.5, 10))
def test_adiabatic_propagator_structure(p, a, b):
    ti, tf = -p.tau - a, p.tau + b
    U = analytic_adiabatic_propagator(p, ti, tf).U
    first, second = lz_nodes(p)
    assert U[2, 0] == 0.0
    assert abs(U[0, 2]) == pytest.approx(math.sqrt(first.p * second.p), rel=1e-12)
    assert abs(U[0, 0]) ** 2 == pytest.approx(second.q, rel=1e-12)
    assert abs(U[2, 2]) ** 2 == pytest.approx(first.q, rel=1e-12)
    assert np.max(np.abs(U.conj().T @ U - np.eye(3))) <= 1e-12


@given(params(), st.floats(0.5, 10), st.floats(0.5, 10))
def test_product_equals_closed_form(p, a, b):
    ti, tf = -p.tau - a, p.tau + b
    A = analytic_adiabatic_propagator(p, ti, tf).U
    C = closed_form_adiabatic_propagator(p, ti, tf).U
    assert np.max(np.abs(A - C)) <= 1e-12


@given(params(symmetric=True), st.floats(0.5, 20))
def test_symmetric_form_matches_general(p, extra):
    T = p.tau + extra
    S = symmetric_adiabatic_propagator(p, T).U
    A = analytic_adiabatic_propagator(p, -T, T).U
    assert np.max(np.abs(S - A)) <= 1e-9


def test_symmetric_form_rejects_unequal_couplings():
    with pytest.raises(ValueError):
        symmetric_adiabatic_propagator(ModelParams(1, 2, 1, 1), 5.0)


@given(params(), st.floats(0.5, 10), st.floats(0.5, 10))
def test_diabatic_unitary_and_stochastic(p, a, b):
    prop = diabatic_propagator(p, -p.tau - a, p.tau + b)
    assert prop.unitarity_error <= 1e-10
    P = prop.probabilities
    assert np.allclose(P.sum(axis=0), 1, atol=1e-10) and np.allclose(P.sum(axis=1), 1, atol=1e-10)


def test_infinite_window_returns_do_table(unit):
    table = diabatic_propagator(unit)
    assert isinstance(table, TransitionTable)
    p = 0.0018674427317079888144
    q = 1 - p
    expected = np.array([[p, q * p, q * q], [q, p * p, q * p], [0, q, p]])
    assert np.allclose(table.P, expected, atol=1e-15)


def test_half_infinite_window(unit):
    table = diabatic_propagator(unit, -math.inf, 6.0)
    assert isinstance(table, TransitionTable)
    assert np.allclose(table.row_sums, 1, atol=1e-12)


@pytest.mark.parametrize("window", [(-0.5, 4.0), (-4.0, 0.5), (0.0, 0.0)])
def test_crossings_outside_window(unit, window):
    with pytest.raises(CrossingsOutsideWindow):
        diabatic_propagator(unit, *window)


def test_long_window_tends_to_do(unit):
    P = diabatic_propagator(unit, -1e4, 1e4).probabilities
    assert np.max(np.abs(P - diabatic_propagator(unit).P)) <= 1e-3
