"""Landau-Zener crossing data and the instantaneous crossing matrices.

Each avoided crossing is described by its no-transition probability
p = exp(-2 pi alpha^2), with alpha = coupling / sqrt(beta), and by the Stokes
phase

    phi = arg Gamma(1 - i alpha^2) + pi/4 + alpha^2 (ln alpha^2 - 1),

which goes from pi/4 (diabatic limit) to 0 (adiabatic limit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Lanczos approximation, g = 7, n = 9 (Godfrey's coefficients).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(z):
    """Complex log-Gamma on the principal (continuous) branch.

    Accurate to ~1e-14 relative in the half-plane Re z >= 1/2; the
    reflection formula covers Re z < 1/2 (branch continuity is not
    guaranteed there).
    """
    z = np.asarray(z, dtype=complex)
    left = z.real < 0.5
    w = np.where(left, 1.0 - z, z) - 1.0
    series = np.full_like(w, _LANCZOS_COEF[0])
    for i, coef in enumerate(_LANCZOS_COEF[1:], start=1):
        series = series + coef / (w + i)
    t = w + _LANCZOS_G + 0.5
    lg = _HALF_LOG_2PI + (w + 0.5) * np.log(t) - t + np.log(series)
    if np.any(left):
        reflected = np.log(np.pi) - np.log(np.sin(np.pi * z)) - lg
        lg = np.where(left, reflected, lg)
    return lg if lg.ndim else complex(lg)


def arg_gamma_one_minus_i_x(x):
    """Continuous argument of Gamma(1 - i x) for x >= 0 (zero at x = 0)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be non-negative")
    out = np.imag(log_gamma(1.0 - 1j * x))
    return out if np.ndim(out) else float(out)


def lz_phase(alpha_sq):
    """Stokes phase of a crossing with LZ parameter squared ``alpha_sq``."""
    x = np.asarray(alpha_sq, dtype=float)
    tiny = x < 1e-300
    safe = np.where(tiny, 1.0, x)
    tail = np.where(tiny, 0.0, safe * (np.log(safe) - 1.0))
    out = arg_gamma_one_minus_i_x(x) + math.pi / 4 + tail
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class LZNode:
    t_cross: float
    alpha: float
    p: float
    q: float
    phi: float


def make_node(coupling: float, beta: float, t_cross: float) -> LZNode:
    if coupling < 0:
        raise ValueError("coupling must be >= 0")
    if beta <= 0:
        raise ValueError("beta must be > 0")
    alpha = coupling / math.sqrt(beta)
    p = math.exp(-2.0 * math.pi * alpha * alpha)
    return LZNode(t_cross, alpha, p, 1.0 - p, lz_phase(alpha * alpha))


def lz_matrix_minus(node: LZNode) -> np.ndarray:
    """Crossing at -tau: mixes adiabatic states 2 and 3."""
    sp, sq = math.sqrt(node.p), math.sqrt(node.q)
    e = np.exp(1j * node.phi)
    return np.array(
        [[1.0, 0.0, 0.0],
         [0.0, sq * e.conjugate(), -sp],
         [0.0, sp, sq * e]],
        dtype=complex,
    )


def lz_matrix_plus(node: LZNode) -> np.ndarray:
    """Crossing at +tau: mixes adiabatic states 1 and 2."""
    sp, sq = math.sqrt(node.p), math.sqrt(node.q)
    e = np.exp(1j * node.phi)
    return np.array(
        [[sq * e.conjugate(), -sp, 0.0],
         [sp, sq * e, 0.0],
         [0.0, 0.0, 1.0]],
        dtype=complex,
    )
