"""Closed-form transition probabilities.

Covers the exact infinite-duration table, the counterintuitive probability
P(3 -> 1) for a finite window [-T, T] with its average/oscillating split and
limiting forms, the 1/T^2 average tables of the finite and the original
(t_i = -infinity) models, and the time-resolved P(3 -> 1; t) of the latter.

The table coefficient helpers use plain arithmetic only, so they also accept
``fractions.Fraction`` inputs for exact checks.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .lz import make_node
from .model import ModelParams
from .propagator import cumulative_phases, diabatic_propagator, lz_nodes, phase_integrals
from .spectral import eigenvalues, frame_matrices
from .tables import ProbabilitySplit, TransitionTable

__all__ = [
    "AfterCrossingsRequired",
    "ProbabilitySplit",
    "SymmetryRequired",
    "TransitionTable",
    "ValidityWarning",
    "WindowTooShort",
    "do_exact_table",
    "do_time_coefficients",
    "do_time_table",
    "finite_avg_coefficients",
    "finite_avg_table",
    "finite_full_table",
    "local_period",
    "p31_average_asymptotic",
    "p31_average_leading",
    "p31_full",
    "p31_limit_adiabatic",
    "p31_limit_weak",
    "p31_time_split",
    "sliding_average",
]


class SymmetryRequired(ValueError):
    pass


class WindowTooShort(ValueError):
    pass


class AfterCrossingsRequired(ValueError):
    pass


class ValidityWarning(UserWarning):
    """An asymptotic formula is evaluated outside (or at the edge of) its domain."""


def _require_symmetric(params: ModelParams) -> None:
    if not params.is_symmetric:
        raise SymmetryRequired(
            f"equal couplings required (omega12={params.omega12:g}, omega23={params.omega23:g})"
        )


def _require_after(params: ModelParams, T, exc) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    if np.any(T <= params.tau):
        raise exc(f"time {np.min(T):g} must exceed tau={params.tau:g}")
    return T


def _warn_domain(params: ModelParams, T) -> None:
    scale = max(params.tau, 1.0 / math.sqrt(params.beta))
    Tmin = float(np.min(T))
    if Tmin < 3 * scale:
        warnings.warn(f"T={Tmin:g} is outside the large-T domain (T >= {3 * scale:g})", ValidityWarning, stacklevel=3)
    elif Tmin < 10 * scale:
        warnings.warn(f"T={Tmin:g} is marginal for a 1/T expansion (T >= {10 * scale:g} advised)",
                      ValidityWarning, stacklevel=3)


def _kappa_sq(params: ModelParams) -> float:
    return params.omega12**2 / (4 * params.delta**2)


# --- infinite window ----------------------------------------------------------

def do_exact_table(params: ModelParams) -> TransitionTable:
    """Products of single-crossing LZ probabilities; P(3 -> 1) = 0."""
    m = make_node(params.omega12, params.beta, -params.tau)
    p = make_node(params.omega23, params.beta, params.tau)
    P = [
        [m.p, m.q * p.p, m.q * p.q],
        [m.q, m.p * p.p, m.p * p.q],
        [0.0, p.q, p.p],
    ]
    return TransitionTable(np.array(P), "exact-DO", {"params": params.to_dict()})


# --- finite window, counterintuitive transition ---------------------------------

def _p31_terms(params: ModelParams, T):
    """Amplitude pieces of U13(T, -T) for equal couplings.

    U13 = -(A - B cos x + C cos y + D cos z) with
    x = Lambda12(T, tau) + phi, y = Lambda2(T, tau) - Lambda3(T, -tau),
    z = Lambda1(T, -T) + phi.
    """
    node, _ = lz_nodes(params)
    p, q, phi = node.p, node.q, node.phi
    T = np.atleast_1d(T)
    f = frame_matrices(params, T)[1][:, 0, :]  # first row f_1k(T)
    f11, f12, f13 = f[:, 0], f[:, 1], f[:, 2]
    tau = params.tau
    L = cumulative_phases(params, np.concatenate([T, -T, [-tau]]), tau)
    n = T.size
    L_T, L_mT, L_mtau = L[:n], L[n:2 * n], L[-1]
    x = L_T[:, 0] - L_T[:, 1] + phi
    y = L_T[:, 1] - (L_T[:, 2] - L_mtau[2])
    z = L_T[:, 0] - L_mT[:, 0] + phi
    A = p * f11**2 + q * f12**2
    B = 2 * math.sqrt(p * q) * f11 * f12
    C = 2 * math.sqrt(p) * f12 * f13
    D = 2 * math.sqrt(q) * f11 * f13
    return A, B, C, D, x, y, z


def p31_full(params: ModelParams, T) -> ProbabilitySplit:
    """P(3 -> 1) over [-T, T] for equal couplings, with exact frame components.

    The average keeps the squared constant term plus half of each squared
    oscillation amplitude; every cosine-dependent remainder is the
    oscillating part. ``T`` may be a scalar or an array.
    """
    _require_symmetric(params)
    scalar = np.ndim(T) == 0
    T = _require_after(params, T, WindowTooShort)
    A, B, C, D, x, y, z = _p31_terms(params, T)
    total = (A - B * np.cos(x) + C * np.cos(y) + D * np.cos(z)) ** 2
    average = A**2 + 0.5 * (B**2 + C**2 + D**2)
    if scalar:
        return ProbabilitySplit(float(average[0]), float(total[0] - average[0]))
    return ProbabilitySplit(average, total - average)


def p31_average_leading(params: ModelParams, T):
    """Leading 1/T^2 average, 2 Omega^2 (kappa^2 p + q) / (beta T)^2 (equal couplings)."""
    _require_symmetric(params)
    node, _ = lz_nodes(params)
    T = np.asarray(T, dtype=float)
    return 2 * params.omega12**2 * (_kappa_sq(params) * node.p + node.q) / (params.beta * T) ** 2


def p31_average_asymptotic(params: ModelParams, T, order: int = 2):
    """Two-term (1/T^2 and 1/T^3) large-T expansion of the average P(3 -> 1).

    Uses the equal-coupling form when Omega12 == Omega23 and the general one
    otherwise (they coincide there). ``order=1`` keeps only the 1/T^2 term.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    T = np.asarray(T, dtype=float)
    _warn_domain(params, T)
    d, b = params.delta, params.beta
    node_m, node_p = lz_nodes(params)
    if params.is_symmetric:
        W, p, q = params.omega12**2, node_m.p, node_m.q
        lead = W * (W * p + 4 * d**2 * q) / (2 * d**2 * b**2 * T**2)
        nxt = W * (W**2 * p - 8 * d**4 * q) / (2 * d**3 * b**3 * T**3)
    else:
        W12, W23 = params.omega12**2, params.omega23**2
        lead = (W12 * W23 * (node_m.p + node_p.p) + 4 * d**2 * (W12 * node_p.q + W23 * node_m.q)) / (
            4 * d**2 * b**2 * T**2
        )
        nxt = (W12 * W23 * (W12 * node_m.p + W23 * node_p.p) - 8 * d**4 * (W12 * node_p.q + W23 * node_m.q)) / (
            4 * d**3 * b**3 * T**3
        )
    out = lead if order == 1 else lead + nxt
    return float(out) if out.ndim == 0 else out


def _limit_phases(params: ModelParams, T: float):
    tau = params.tau
    L_full = phase_integrals(params, -T, T).Lambda
    L_T_tau = phase_integrals(params, tau, T).Lambda
    L_T_mtau = phase_integrals(params, -tau, T).Lambda
    return L_full, L_T_tau, L_T_mtau


def p31_limit_adiabatic(params: ModelParams, T: float) -> float:
    """Near-adiabatic form 4 Omega^2/(beta T)^2 cos^2[Lambda1(T, -T) + phi]."""
    _require_symmetric(params)
    _require_after(params, T, WindowTooShort)
    node, _ = lz_nodes(params)
    if node.alpha < 2:
        warnings.warn(f"alpha={node.alpha:g} < 2: near-adiabatic form not justified", ValidityWarning, stacklevel=2)
    L_full, _, _ = _limit_phases(params, T)
    return float(4 * params.omega12**2 / (params.beta * T) ** 2 * math.cos(L_full[0] + node.phi) ** 2)


def p31_limit_weak(params: ModelParams, T: float) -> float:
    """Weak-coupling form Omega^4/(delta beta T)^2 cos^2[Lambda2(T, tau) - Lambda3(T, -tau)]."""
    _require_symmetric(params)
    _require_after(params, T, WindowTooShort)
    node, _ = lz_nodes(params)
    if node.alpha > 0.3:
        warnings.warn(f"alpha={node.alpha:g} > 0.3: weak-coupling form not justified", ValidityWarning, stacklevel=2)
    _, L_T_tau, L_T_mtau = _limit_phases(params, T)
    W = params.omega12**2
    return float(W**2 / (params.delta * params.beta * T) ** 2 * math.cos(L_T_tau[1] - L_T_mtau[2]) ** 2)


# --- average tables -------------------------------------------------------------

def finite_avg_coefficients(p, k2):
    """(DO value, 1/T^2 coefficient) pairs of the finite-window average table.

    Entry (m, n) is DO[m][n] + (Omega/(beta T))^2 * corr[m][n]; ``k2`` is
    kappa^2 = Omega^2/(4 delta^2).
    """
    q = 1 - p
    do = [[p, p * q, q * q], [q, p * p, p * q], [0 * p, q, p]]
    corr = [
        [k2 * (q * q - 2 * p) + 1 - 2 * p - p * p, k2 * q * q + 1 - 6 * p + 7 * p * p, 2 * (k2 * (p - q * q) + 3 * p * q - q)],
        [p * p + 4 * p - 3 - k2 * q * q, 2 * (1 + p - 4 * p * p), k2 * q * q + 1 - 6 * p + 7 * p * p],
        [2 * (k2 * p + q), p * p + 4 * p - 3 - k2 * q * q, k2 * (q * q - 2 * p) + 1 - 2 * p - p * p],
    ]
    return do, corr


def do_time_coefficients(p, k2):
    """(DO value, 1/t^2 coefficient) pairs of the original-model time-dependent table."""
    q = 1 - p
    do = [[p, p * q, q * q], [q, p * p, p * q], [0 * p, q, p]]
    corr = [
        [k2 * (q * q - p) - p * p, 1 - 3 * p * q, q * (p - q) + k2 * (p - q * q)],
        [p * p - q - k2 * q * q, 1 - 3 * p * p, p * (p - q) + k2 * q * q],
        [k2 * p + q, p - 2 * q, q - p - k2 * p],
    ]
    return do, corr


def _assemble(params: ModelParams, x: float, coefficients) -> np.ndarray:
    node, _ = lz_nodes(params)
    do, corr = coefficients(node.p, _kappa_sq(params))
    eps = params.omega12**2 / (params.beta * x) ** 2
    return np.array(do, dtype=float) + eps * np.array(corr, dtype=float)


def finite_avg_table(params: ModelParams, T: float) -> TransitionTable:
    """1/T^2 average probabilities for the window [-T, T] (equal couplings)."""
    _require_symmetric(params)
    _require_after(params, T, WindowTooShort)
    P = _assemble(params, T, finite_avg_coefficients)
    return TransitionTable(P, "finite-avg", {"T": float(T), "params": params.to_dict()})


def do_time_table(params: ModelParams, t: float) -> TransitionTable:
    """1/t^2 average probabilities P(m -> n; t) of the t_i = -infinity model (equal couplings)."""
    _require_symmetric(params)
    _require_after(params, t, AfterCrossingsRequired)
    P = _assemble(params, t, do_time_coefficients)
    return TransitionTable(P, "DO-time-avg", {"t": float(t), "params": params.to_dict()})


def finite_full_table(params: ModelParams, T: float) -> TransitionTable:
    """All nine |U_nm(T, -T)|^2 from the analytic propagator, oscillations included."""
    _require_after(params, T, WindowTooShort)
    prop = diabatic_propagator(params, -float(T), float(T))
    return TransitionTable(prop.probabilities, "finite-full", {"T": float(T), "params": params.to_dict()})


# --- original model, time-resolved ------------------------------------------------

def p31_time_split(params: ModelParams, t, form: str = "exact") -> ProbabilitySplit:
    """P(3 -> 1; t) for t_i = -infinity, any couplings.

    ``form="exact"`` uses the exact frame components f_11(t), f_12(t);
    ``form="asymptotic"`` uses their leading large-t behaviour.
    ``t`` may be a scalar or an array.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(_require_after(params, t, AfterCrossingsRequired))
    _, node = lz_nodes(params)
    p, q, phi = node.p, node.q, node.phi
    L = cumulative_phases(params, t, params.tau)
    x = L[:, 0] - L[:, 1] + phi
    if form == "exact":
        f = frame_matrices(params, t)[1][:, 0, :]
        average = q * f[:, 0] ** 2 + p * f[:, 1] ** 2
        oscillating = 2 * math.sqrt(p * q) * f[:, 0] * f[:, 1] * np.cos(x)
    elif form == "asymptotic":
        W12, W23 = params.omega12**2, params.omega23**2
        d, b = params.delta, params.beta
        average = W12 * (4 * d**2 * q + W23 * p) / (4 * d**2 * b**2 * t**2)
        oscillating = -W12 * params.omega23 / (d * b**2 * t**2) * math.sqrt(p * q) * np.cos(x)
    else:
        raise ValueError(f"unknown form {form!r}")
    if scalar:
        return ProbabilitySplit(float(average[0]), float(oscillating[0]))
    return ProbabilitySplit(average, oscillating)


# --- averaging helpers --------------------------------------------------------------

def local_period(params: ModelParams, t, which: str = "fast"):
    """Local oscillation period from the adiabatic gaps at time t.

    ``"fast"`` is 2 pi/(lambda1 - lambda2); ``"slowest"`` uses the smaller of
    the two neighbouring gaps and so also spans the beats between terms.
    """
    lam = eigenvalues(params, np.asarray(t, dtype=float))
    g12 = lam[..., 0] - lam[..., 1]
    if which == "fast":
        gap = g12
    elif which == "slowest":
        gap = np.minimum(g12, lam[..., 1] - lam[..., 2])
    else:
        raise ValueError(f"unknown period kind {which!r}")
    return 2 * np.pi / gap


def sliding_average(x, y, centers, width):
    """Mean of the sampled curve y(x) over [c - w/2, c + w/2] for every centre c.

    The curve is treated as piecewise linear between samples; ``width`` may be
    a scalar or an array matching ``centers``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    width = np.broadcast_to(np.asarray(width, dtype=float), centers.shape)
    a, b = centers - width / 2, centers + width / 2
    if np.any(a < x[0]) or np.any(b > x[-1]):
        raise ValueError("averaging windows must lie inside the sampled range")
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))])

    def integral_to(u):
        i = np.clip(np.searchsorted(x, u, side="right") - 1, 0, x.size - 2)
        s = u - x[i]
        slope = (y[i + 1] - y[i]) / (x[i + 1] - x[i])
        return cum[i] + y[i] * s + 0.5 * slope * s * s

    return (integral_to(b) - integral_to(a)) / (b - a)
