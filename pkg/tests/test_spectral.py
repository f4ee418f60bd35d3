import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from docross.model import ModelParams, hamiltonian_at
from docross.propagator import phase_integrals
from docross.spectral import (
    DegenerateEigenvalue,
    SymmetryNotApplicable,
    cubic_coefficients,
    eigenvalues,
    eigenvalues_asymptotic,
    frame_asymptotic,
    frame_at,
    frame_at_minus_infinity,
    frame_at_plus_infinity,
    frame_matrices,
    nonadiabatic_couplings,
    residual,
    symmetric_frame_relation,
)
from strategies import params

# mpmath eigsy at 30 digits, descending
EIGEN_ORACLE = [
    ((1, 1, 1, 1, 0.0), (1.7320508075688772935, 0.0, -1.7320508075688772935)),
    ((1, 1, 1, 1, 100.0), (100.01999800020005994, 0.98995101864340952663, -1.0099490188434694647)),
    ((1, 2, 1, 1, 3.0), (4.3722813232690143299, 0.0, -1.3722813232690143299)),
    ((0.3, 2.5, 0.7, 2.0, -1.25), (2.0756689226248036555, -0.68576931299408655815, -3.8898996096307170974)),
    ((1, 1, 1, 1, -5.0), (1.1749721234013829381, -0.7902812224626280792, -5.3846909009387548589)),
]


def test_decoupled_eigenvalues():
    assert np.allclose(eigenvalues(ModelParams(0, 0, 1, 1), 0.0), [1, 0, -1], atol=1e-15)


@pytest.mark.parametrize("args, expected", EIGEN_ORACLE)
def test_eigenvalue_oracle(args, expected):
    *p, t = args
    assert np.allclose(eigenvalues(ModelParams(*p), t), expected, rtol=1e-14, atol=1e-14)


def test_unit_point_closed_form():
    assert np.allclose(eigenvalues(ModelParams(1, 1, 1, 1), 0.0), [math.sqrt(3), 0, -math.sqrt(3)], atol=1e-15)


def test_cubic_coefficients_at_unit_point():
    co = cubic_coefficients(ModelParams(1, 1, 1, 1), 0.0)
    assert (co.a, co.b, co.c) == (0.0, -3.0, 0.0)


@given(params(), st.floats(-30, 30))
def test_matches_generic_solver(p, t):
    ref = np.linalg.eigvalsh(hamiltonian_at(p, t))[::-1]
    assert np.allclose(eigenvalues(p, t), ref, atol=1e-12 * max(1.0, abs(p.beta * t)), rtol=0)


@given(params(), st.floats(-30, 30))
def test_characteristic_residual(p, t):
    co = cubic_coefficients(p, t)
    a, b, c = co.a, co.b, co.c
    lam = eigenvalues(p, t)
    assert np.all(np.diff(lam) <= 0)
    bound = 1e-10 * (abs(a) + abs(b) + abs(c) + 1) * np.maximum(1, np.abs(lam) ** 3)
    assert np.all(np.abs(lam**3 + a * lam**2 + b * lam + c) <= bound)


@given(params(), st.floats(-30, 30))
def test_frame_invariants(p, t):
    fr = frame_at(p, t)
    H = hamiltonian_at(p, t)
    assert np.max(np.abs(fr.F.T @ fr.F - np.eye(3))) <= 1e-12
    assert np.max(np.abs(H @ fr.F - fr.F @ np.diag(fr.lambdas))) <= 1e-12 * np.max(np.abs(H))
    assert residual(p, fr) <= 1e-12
    assert np.allclose(fr.F.T @ H @ fr.F, np.diag(fr.lambdas), atol=1e-12 * np.max(np.abs(H)))


def test_vectorised_frames_match_scalar(unit):
    ts = np.linspace(-6, 6, 13)
    lam, F = frame_matrices(unit, ts)
    for i, t in enumerate(ts):
        fr = frame_at(unit, t)
        assert np.array_equal(lam[i], fr.lambdas) and np.array_equal(F[i], fr.F)


@given(params())
def test_frame_continuity(p):
    h = 1e-3 * min(p.tau, 1 / math.sqrt(p.beta))
    ts = np.arange(-10, 10, h * 50)
    _, F = frame_matrices(p, ts)
    _, Fh = frame_matrices(p, ts + h)
    overlaps = np.einsum("nik,nik->nk", F, Fh)
    assert np.all(overlaps > 0)


def test_decoupled_frame_is_signed_permutation():
    for t in (-3.0, -0.5, 0.5, 3.0):
        F = frame_at(ModelParams(0, 0, 1, 1), t).F
        assert np.array_equal(np.abs(F), np.abs(F).astype(int))
        assert np.all(np.abs(F).sum(axis=0) == 1)


def test_degenerate_point_raises():
    # psi2 is decoupled (omega23 = 0) and crosses psi3 exactly at t = tau
    with pytest.raises(DegenerateEigenvalue):
        frame_at(ModelParams(0, 0, 1, 1), 1.0)


def test_minus_infinity_constant_and_limit(unit):
    F = frame_at_minus_infinity()
    assert np.array_equal(F, [[0, -1, 0], [0, 0, 1], [1, 0, 0]])
    assert np.allclose(np.linalg.norm(F, axis=0), 1)
    assert np.max(np.abs(frame_at(unit, -1e6).F - F)) <= 1e-5


def test_plus_infinity_limit(unit):
    assert np.max(np.abs(frame_at(unit, 1e6).F - frame_at_plus_infinity())) <= 1e-5


def test_asymptotic_vectors(unit):
    t = 1e4
    assert np.max(np.abs(frame_at(unit, t).F - frame_asymptotic(unit, t))) <= 1e-6
    lam = eigenvalues(unit, 100.0)
    assert lam[0] == pytest.approx(100 + 2 / 100, abs=1e-5)


@given(params())
def test_eigenvalue_asymptotics(p):
    m = max(p.delta, p.omega12, p.omega23)
    t = 100 * m / p.beta
    err = np.abs(eigenvalues(p, t) - eigenvalues_asymptotic(p, t))
    assert np.all(err <= 10 * m**3 / (p.beta * t) ** 2)


@given(params(symmetric=True), st.floats(0.05, 20))
def test_symmetric_relations(p, T):
    fp, fm = frame_at(p, T), frame_at(p, -T)
    assert fm.lambdas[0] == pytest.approx(-fp.lambdas[2], abs=1e-12)
    assert fm.lambdas[1] == pytest.approx(-fp.lambdas[1], abs=1e-12)
    assert np.max(np.abs(symmetric_frame_relation(fp, p) - fm.F)) <= 1e-10


def test_symmetric_relation_example():
    p = ModelParams.symmetric(1.0)
    assert np.max(np.abs(symmetric_frame_relation(frame_at(p, 5.0)) - frame_at(p, -5.0).F)) <= 1e-10


def test_symmetric_relation_at_zero_is_self_consistent(unit):
    f0 = frame_at(unit, 0.0)
    assert np.allclose(symmetric_frame_relation(f0), f0.F, atol=1e-14)


def test_symmetric_relation_requires_equal_couplings():
    p = ModelParams(1, 2, 1, 1)
    with pytest.raises(SymmetryNotApplicable):
        symmetric_frame_relation(frame_at(p, 2.0), p)


@given(params(symmetric=True), st.floats(0.5, 15))
def test_middle_phase_vanishes(p, T):
    assume(T > p.tau)
    assert abs(phase_integrals(p, -T, T, tol=1e-12).Lambda[1]) <= 1e-10


def test_couplings_antisymmetric_with_zero_diagonal(unit):
    nu = nonadiabatic_couplings(unit, 0.7)
    assert np.all(np.diag(nu) == 0)
    assert np.array_equal(nu, -nu.T)


def test_couplings_vanish_without_coupling():
    assert np.max(np.abs(nonadiabatic_couplings(ModelParams(1e-12, 1e-12, 1, 1), 0.3))) < 1e-6


@given(params(), st.floats(-8, 8))
def test_couplings_match_hellmann_feynman(p, t):
    # <phi_k| dphi_l/dt> = <phi_k| dH/dt |phi_l> / (lambda_l - lambda_k), dH/dt = beta E22
    lam, F = frame_matrices(p, t)
    gap = np.min(np.abs(np.diff(lam)))
    assume(gap > 0.05)
    ref = p.beta * np.outer(F[1], F[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        ref = ref / (lam[None, :] - lam[:, None])
    np.fill_diagonal(ref, 0.0)
    assert np.allclose(nonadiabatic_couplings(p, t), ref, atol=1e-6 * max(1.0, np.max(np.abs(ref))))


def test_couplings_decay_as_inverse_square(unit):
    ts = np.geomspace(1e2, 1e4, 9)
    norms = [np.linalg.norm(nonadiabatic_couplings(unit, t, h=1e-3 * t)) for t in ts]
    slope = np.polyfit(np.log(ts), np.log(norms), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.05)
