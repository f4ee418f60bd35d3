import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from docross.lz import arg_gamma_one_minus_i_x, log_gamma, lz_matrix_minus, lz_matrix_plus, lz_phase, make_node

# mpmath loggamma at 30 digits (continuous branch)
ARG_GAMMA = {
    0.01: 0.00577175598411805691,
    0.5: 0.24405829890542776266,
    1.0: 0.30164032046753319789,
    3.0: -1.0533507710686132003,
    10.0: -13.802912974229900694,
    100.0: -361.30158342609539463,
}
PHI = {
    0.1: 0.73511821752168544825,
    0.5: 0.32706191325871725814,
    1.0: 0.087038483864981507503,
    2.0: 0.020877551304475824835,
    3.0: 0.0092630832212480226573,
}


def test_arg_gamma_at_zero():
    assert arg_gamma_one_minus_i_x(0.0) == 0.0


@pytest.mark.parametrize("x, expected", ARG_GAMMA.items())
def test_arg_gamma_oracle(x, expected):
    assert arg_gamma_one_minus_i_x(x) == pytest.approx(expected, abs=1e-12)


def test_arg_gamma_vectorised():
    xs = np.array(list(ARG_GAMMA))
    assert np.allclose(arg_gamma_one_minus_i_x(xs), list(ARG_GAMMA.values()), atol=1e-12, rtol=0)


def test_arg_gamma_rejects_negative():
    with pytest.raises(ValueError):
        arg_gamma_one_minus_i_x(-1.0)


def test_log_gamma_real_axis():
    for x in (0.5, 1.0, 2.5, 7.0, 30.0):
        assert log_gamma(complex(x)).real == pytest.approx(math.lgamma(x), abs=1e-12)


def test_arg_gamma_stirling_limit():
    # arg Gamma(1 - i x) + x (ln x - 1) -> -pi/4 for large x
    for x in (200.0, 1000.0):
        assert arg_gamma_one_minus_i_x(x) + x * (math.log(x) - 1) == pytest.approx(-math.pi / 4, abs=1e-3)


@pytest.mark.parametrize("alpha, expected", PHI.items())
def test_lz_phase_oracle(alpha, expected):
    assert make_node(alpha, 1.0, 0.0).phi == pytest.approx(expected, abs=1e-12)


def test_zero_coupling_node():
    node = make_node(0.0, 1.0, -1.0)
    assert (node.alpha, node.p, node.q) == (0.0, 1.0, 0.0)
    assert node.phi == pytest.approx(math.pi / 4, abs=1e-15)


def test_unit_alpha_node():
    node = make_node(2.0, 4.0, 0.5)
    assert node.alpha == 1.0
    assert node.p == pytest.approx(0.0018674427317079888144, rel=1e-14)
    assert node.q == pytest.approx(1 - 0.0018674427317079888144, rel=1e-15)


def test_alpha_three_phase_small():
    assert abs(make_node(3.0, 1.0, 0.0).phi) < 0.03


def test_matrices_limits():
    diabatic = make_node(0.0, 1.0, 0.0)
    assert np.allclose(lz_matrix_minus(diabatic), [[1, 0, 0], [0, 0, -1], [0, 1, 0]], atol=1e-16)
    assert np.allclose(lz_matrix_plus(diabatic), [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-16)


def test_matrices_adiabatic_limit():
    node = make_node(50.0, 1.0, 0.0)  # p underflows to 0
    e = np.exp(1j * node.phi)
    assert np.allclose(lz_matrix_minus(node), np.diag([1, e.conjugate(), e]), atol=1e-15)
    assert np.allclose(lz_matrix_plus(node), np.diag([e.conjugate(), e, 1]), atol=1e-15)


@given(st.floats(0.0, 6.0))
def test_lz_matrices_unitary(alpha):
    node = make_node(alpha, 1.0, 0.0)
    assert node.p + node.q == 1.0
    assert node.p == math.exp(-2 * math.pi * alpha * alpha)
    for U in (lz_matrix_minus(node), lz_matrix_plus(node)):
        assert np.max(np.abs(U.conj().T @ U - np.eye(3))) <= 1e-15
        assert abs(abs(np.linalg.det(U)) - 1) <= 1e-15


def test_monotonic_in_alpha():
    alphas = np.linspace(0.0, 4.0, 401)
    nodes = [make_node(a, 1.0, 0.0) for a in alphas]
    p = np.array([n.p for n in nodes])
    phi = np.array([n.phi for n in nodes])
    assert np.all(np.diff(p) < 0)
    assert np.all(np.diff(phi) < 0)
    assert phi[0] == pytest.approx(math.pi / 4)
    assert np.max(np.abs(np.diff(phi))) < 0.05  # continuous


def test_lz_phase_vectorised():
    a2 = np.array([0.0, 1.0, 9.0])
    assert np.allclose(lz_phase(a2), [math.pi / 4, PHI[1.0], PHI[3.0]], atol=1e-12)


def test_make_node_validation():
    with pytest.raises(ValueError):
        make_node(-1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        make_node(1.0, 0.0, 0.0)
