"""Analytic propagator in the adiabatic basis and its diabatic image.

Between crossings the evolution is adiabatic, so in the adiabatic
interaction picture the propagator is a product of diagonal dynamical-phase
matrices M(t, t0) = diag(exp(-i Lambda_k(t, t0))) and the two instantaneous
Landau-Zener matrices:

    U^A(tf, ti) = M(tf, tau) U_LZ(+tau) M(tau, -tau) U_LZ(-tau) M(-tau, ti)

with Lambda_k(t, t0) the integral of lambda_k from t0 to t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .lz import LZNode, lz_matrix_minus, lz_matrix_plus, make_node
from .model import ModelParams, crossing_times
from .spectral import (
    FRAME_MINUS_INFINITY,
    FRAME_PLUS_INFINITY,
    eigenvalues,
    frame_matrices,
)
from .tables import TransitionTable


class CrossingsOutsideWindow(ValueError):
    pass


@dataclass(frozen=True)
class PhaseIntegrals:
    t_from: float
    t_to: float
    Lambda: np.ndarray  # (3,)

    def diff(self, k: int, l: int) -> float:
        """Lambda_kl = Lambda_k - Lambda_l (1-based labels)."""
        return float(self.Lambda[k - 1] - self.Lambda[l - 1])


@dataclass(frozen=True)
class Propagator3:
    U: np.ndarray
    basis: str
    window: tuple[float, float]

    @property
    def unitarity_error(self) -> float:
        return float(np.max(np.abs(self.U.conj().T @ self.U - np.eye(3))))

    @property
    def probabilities(self) -> np.ndarray:
        """P[m, n] = |U[n, m]|^2, the probability of state m+1 -> n+1."""
        return (np.abs(self.U) ** 2).T


def default_phase_tol(params: ModelParams, t_from: float, t_to: float) -> float:
    s_max = math.sqrt(
        (params.beta * max(abs(t_from), abs(t_to))) ** 2
        + 3.0 * (params.delta**2 + params.omega12**2 + params.omega23**2)
    )
    return 1e-10 * (1.0 + abs(t_to - t_from) * s_max)


def phase_integrals(params: ModelParams, t_from: float, t_to: float, tol: float | None = None) -> PhaseIntegrals:
    """Lambda_k(t_to, t_from) for k = 1, 2, 3 by adaptive Gauss-Kronrod quadrature."""
    if not (math.isfinite(t_from) and math.isfinite(t_to)):
        raise ValueError("phase integrals need a finite window")
    if tol is None:
        tol = default_phase_tol(params, t_from, t_to)
    lam = quadrature.integrate(
        lambda t: eigenvalues(params, t), t_from, t_to, tol=tol, points=crossing_times(params) + (0.0,)
    )
    return PhaseIntegrals(t_from, t_to, np.asarray(lam, dtype=float))


def cumulative_phases(params: ModelParams, times, t_ref: float, tol: float | None = None) -> np.ndarray:
    """Lambda_k(t, t_ref) at many times at once; returns shape (len(times), 3)."""
    times = np.asarray(times, dtype=float)
    tau = params.tau
    knots = np.unique(np.concatenate([times.ravel(), [t_ref], [-tau, 0.0, tau]]))
    knots = knots[(knots >= min(times.min(), t_ref)) & (knots <= max(times.max(), t_ref))]
    if tol is None:
        tol = default_phase_tol(params, knots[0], knots[-1])
    if knots.size < 2:
        return np.zeros(times.shape + (3,))
    parts = quadrature.integrate_panels(lambda t: eigenvalues(params, t), knots[:-1], knots[1:], tol)
    running = np.concatenate([np.zeros((1, 3)), np.cumsum(parts, axis=0)])
    ref = running[np.searchsorted(knots, t_ref)]
    return running[np.searchsorted(knots, times)] - ref


def phase_matrix(Lambda: np.ndarray) -> np.ndarray:
    """M = diag(exp(-i Lambda_k))."""
    return np.diag(np.exp(-1j * np.asarray(Lambda)))


def lz_nodes(params: ModelParams) -> tuple[LZNode, LZNode]:
    t_minus, t_plus = crossing_times(params)
    return make_node(params.omega12, params.beta, t_minus), make_node(params.omega23, params.beta, t_plus)


def _window(params: ModelParams, t_i, t_f) -> tuple[float, float]:
    t_i = params.t_start if t_i is None else t_i
    t_f = params.t_end if t_f is None else t_f
    t_minus, t_plus = crossing_times(params)
    if not (t_i < t_minus and t_plus < t_f):
        raise CrossingsOutsideWindow(
            f"window [{t_i}, {t_f}] must contain both crossings at {t_minus:g} and {t_plus:g}"
        )
    return t_i, t_f


def _segment_phases(params: ModelParams, t_i: float, t_f: float):
    """Lambda over [ti, -tau], [-tau, tau], [tau, tf]; infinite ends contribute zero.

    A divergent end phase multiplies a whole column (t_i) or row (t_f) of
    U^A and drops out of every probability.
    """
    t_minus, t_plus = crossing_times(params)
    zero = np.zeros(3)
    first = phase_integrals(params, t_i, t_minus).Lambda if math.isfinite(t_i) else zero
    middle = phase_integrals(params, t_minus, t_plus).Lambda
    last = phase_integrals(params, t_plus, t_f).Lambda if math.isfinite(t_f) else zero
    return first, middle, last


def analytic_adiabatic_propagator(params: ModelParams, t_i: float | None = None,
                                  t_f: float | None = None) -> Propagator3:
    """Five-factor product M U_LZ(+) M U_LZ(-) M in the adiabatic basis."""
    t_i, t_f = _window(params, t_i, t_f)
    node_m, node_p = lz_nodes(params)
    first, middle, last = _segment_phases(params, t_i, t_f)
    U = (
        phase_matrix(last)
        @ lz_matrix_plus(node_p)
        @ phase_matrix(middle)
        @ lz_matrix_minus(node_m)
        @ phase_matrix(first)
    )
    return Propagator3(U, "adiabatic", (t_i, t_f))


def closed_form_adiabatic_propagator(params: ModelParams, t_i: float | None = None,
                                     t_f: float | None = None) -> Propagator3:
    """Entry-by-entry expression of the five-factor product."""
    t_i, t_f = _window(params, t_i, t_f)
    node_m, node_p = lz_nodes(params)
    first, middle, last = _segment_phases(params, t_i, t_f)
    pm, qm, phm = node_m.p, node_m.q, node_m.phi
    pp, qp, php = node_p.p, node_p.q, node_p.phi
    L = first + middle + last  # Lambda_k(tf, ti)
    L1_ftau, L2_ftau, L3_ftau = last  # Lambda_k(tf, tau)
    L1_ti, L2_ti, L3_ti = first  # Lambda_k(-tau, ti)
    L1_mid, L2_mid, L3_mid = middle  # Lambda_k(tau, -tau)
    e = lambda x: np.exp(1j * x)
    U = np.zeros((3, 3), dtype=complex)
    U[0, 0] = math.sqrt(qp) * e(-php - L[0])
    U[0, 1] = -math.sqrt(pp * qm) * e(-phm - L1_ftau - (L2_mid + L2_ti))
    U[0, 2] = math.sqrt(pm * pp) * e(-L1_ftau - L2_mid - L3_ti)
    U[1, 0] = math.sqrt(pp) * e(-(L1_ti + L1_mid) - L2_ftau)
    U[1, 1] = math.sqrt(qm * qp) * e(php - phm - L[1])
    U[1, 2] = -math.sqrt(pm * qp) * e(php - (L2_ftau + L2_mid) - L3_ti)
    U[2, 1] = math.sqrt(pm) * e(-L2_ti - (L3_mid + L3_ftau))
    U[2, 2] = math.sqrt(qm) * e(phm - L[2])
    return Propagator3(U, "adiabatic", (t_i, t_f))


def symmetric_adiabatic_propagator(params: ModelParams, T: float) -> Propagator3:
    """Equal couplings, window [-T, T]: the reduced form using the eigenvalue symmetries."""
    if not params.is_symmetric:
        raise ValueError("symmetric propagator needs omega12 == omega23")
    tau = params.tau
    if T <= tau:
        raise CrossingsOutsideWindow(f"T={T:g} must exceed tau={tau:g}")
    node, _ = lz_nodes(params)
    p, q, phi = node.p, node.q, node.phi
    L_full = phase_integrals(params, -T, T).Lambda
    L_T_tau = phase_integrals(params, tau, T).Lambda
    L_T_mtau = phase_integrals(params, -tau, T).Lambda
    L12 = L_T_tau[0] - L_T_tau[1]
    e = lambda x: np.exp(1j * x)
    sp, sq = math.sqrt(p), math.sqrt(q)
    U = np.array(
        [
            [sq * e(-phi - L_full[0]), -sp * sq * e(-phi - L12), p],
            [sp * e(L_T_mtau[2] - L_T_tau[1]), q, -sp * sq * e(phi + L12)],
            [0.0, sp * e(L_T_tau[1] - L_T_mtau[2]), sq * e(phi + L_full[0])],
        ],
        dtype=complex,
    )
    return Propagator3(U, "adiabatic", (-T, T))


def _frame(params: ModelParams, t: float) -> np.ndarray:
    if t == -math.inf:
        return FRAME_MINUS_INFINITY
    if t == math.inf:
        return FRAME_PLUS_INFINITY
    return frame_matrices(params, t)[1]


def diabatic_propagator(params: ModelParams, t_i: float | None = None, t_f: float | None = None):
    """U(tf, ti) = F(tf) U^A(tf, ti) F(ti)^T.

    Finite windows give a :class:`Propagator3`. If either end is infinite
    only probabilities are meaningful and a :class:`TransitionTable` is
    returned instead.
    """
    UA = analytic_adiabatic_propagator(params, t_i, t_f)
    t_i, t_f = UA.window
    U = _frame(params, t_f) @ UA.U @ _frame(params, t_i).T
    prop = Propagator3(U, "diabatic", (t_i, t_f))
    if math.isfinite(t_i) and math.isfinite(t_f):
        return prop
    kind = "exact-DO" if not math.isfinite(t_f) else "DO-time"
    return TransitionTable(prop.probabilities, kind, {"window": (t_i, t_f)})
