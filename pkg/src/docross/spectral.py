"""Closed-form eigensystem of the three-state Hamiltonian.

Eigenvalues come from the trigonometric solution of the characteristic cubic
and are ordered lambda1 >= lambda2 >= lambda3. Eigenvector k is built from the
unnormalised components

    (omega12 * (lam_k - delta),  lam_k**2 - delta**2,  omega23 * (lam_k + delta))

divided by its (positive) Euclidean norm. For positive couplings this vector
never vanishes, so the resulting frame is continuous in time and has the signs
of the large-|t| asymptotic vectors: F(-inf) = [[0,-1,0],[0,0,1],[1,0,0]] and
F(+inf) = [[0,0,-1],[1,0,0],[0,1,0]].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import ModelParams, hamiltonian_at


class DegenerateEigenvalue(ArithmeticError):
    pass


class SymmetryNotApplicable(ValueError):
    pass


class CubicCoefficients(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    s: np.ndarray
    cos_theta: np.ndarray


@dataclass(frozen=True)
class AdiabaticFrame:
    t: float
    lambdas: np.ndarray  # (3,), descending
    F: np.ndarray  # (3, 3), column k is phi_k

    @property
    def H(self) -> np.ndarray:
        """Reassembled Hamiltonian F diag(lambda) F^T."""
        return (self.F * self.lambdas) @ self.F.T


FRAME_MINUS_INFINITY = np.array([[0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
FRAME_PLUS_INFINITY = np.array([[0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def cubic_coefficients(params: ModelParams, t) -> CubicCoefficients:
    t = np.asarray(t, dtype=float)
    o12sq, o23sq, d = params.omega12**2, params.omega23**2, params.delta
    a = -params.beta * t
    b = np.full_like(a, -(d * d + o12sq + o23sq))
    c = d * (o12sq - o23sq + d * params.beta * t)
    s = np.sqrt(a * a - 3.0 * b)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_theta = -(2.0 * a**3 - 9.0 * a * b + 27.0 * c) / (2.0 * s**3)
    cos_theta = np.where(s > 0, cos_theta, 1.0)
    return CubicCoefficients(a, b, c, s, np.clip(cos_theta, -1.0, 1.0))


def eigenvalues(params: ModelParams, t) -> np.ndarray:
    """Adiabatic energies at ``t`` (scalar or array); trailing axis holds (l1, l2, l3)."""
    a, b, c, s, cos_theta = cubic_coefficients(params, t)
    theta = np.arccos(cos_theta)
    shift = -a / 3.0
    lam = np.stack(
        [
            shift + (2.0 / 3.0) * s * np.cos(theta / 3.0),
            shift - (2.0 / 3.0) * s * np.cos((theta + np.pi) / 3.0),
            shift - (2.0 / 3.0) * s * np.cos((theta - np.pi) / 3.0),
        ],
        axis=-1,
    )
    # arccos loses digits for theta near 0 (large |t|); a couple of Newton steps
    # on the cubic restore full relative accuracy of the small roots.
    a_, b_, c_ = a[..., None], b[..., None], c[..., None]
    for _ in range(2):
        p = ((lam + a_) * lam + b_) * lam + c_
        dp = (3.0 * lam + 2.0 * a_) * lam + b_
        safe = np.abs(dp) > 1e-8 * (s[..., None] ** 2 + 1e-300)
        lam = np.where(safe, lam - p / np.where(safe, dp, 1.0), lam)
    return -np.sort(-lam, axis=-1)


def _columns(params: ModelParams, lam: np.ndarray) -> np.ndarray:
    """Normalised eigenvectors for eigenvalues ``lam`` (..., 3) -> (..., 3, 3)."""
    d, o12, o23 = params.delta, params.omega12, params.omega23
    v = np.stack([o12 * (lam - d), lam * lam - d * d, o23 * (lam + d)], axis=-2)

    # A vanishing coupling decouples a parallel level; its eigenvector is the
    # Omega -> 0+ limit of the formula above (-psi1 or +psi3).
    if o12 == 0.0:
        k = np.argmin(np.abs(lam + d), axis=-1)
        _assign_axis(v, k, 0, -1.0)
    if o23 == 0.0:
        k = np.argmin(np.abs(lam - d), axis=-1)
        _assign_axis(v, k, 2, 1.0)
    norm = np.linalg.norm(v, axis=-2, keepdims=True)
    if np.any(norm == 0):
        raise DegenerateEigenvalue("eigenvector formula vanished (coincident eigenvalues)")
    return v / norm


def _assign_axis(v: np.ndarray, k: np.ndarray, axis: int, sign: float) -> None:
    idx = np.indices(k.shape)
    col = np.zeros(3)
    col[axis] = sign
    v[(*idx, slice(None), k)] = col


def _check_gaps(params: ModelParams, lam: np.ndarray, t) -> None:
    s = np.sqrt((params.beta * np.asarray(t)) ** 2 + 3.0 * (params.delta**2 + params.omega12**2 + params.omega23**2))
    gap = np.minimum(lam[..., 0] - lam[..., 1], lam[..., 1] - lam[..., 2])
    if np.any(gap <= 1e-13 * s):
        raise DegenerateEigenvalue(
            "two adiabatic energies coincide; only possible with a vanishing coupling at a crossing"
        )


def frame_matrices(params: ModelParams, t) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised eigensystem: returns (lambdas (..., 3), F (..., 3, 3))."""
    lam = eigenvalues(params, t)
    if params.omega12 == 0.0 or params.omega23 == 0.0:
        lam = lam.copy()
        if params.omega12 == 0.0:
            k = np.argmin(np.abs(lam + params.delta), axis=-1)
            np.put_along_axis(lam, k[..., None], -params.delta, axis=-1)
        if params.omega23 == 0.0:
            k = np.argmin(np.abs(lam - params.delta), axis=-1)
            np.put_along_axis(lam, k[..., None], params.delta, axis=-1)
        _check_gaps(params, lam, t)
    return lam, _columns(params, lam)


def frame_at(params: ModelParams, t: float, previous: AdiabaticFrame | None = None) -> AdiabaticFrame:
    """Adiabatic frame at time ``t``.

    If ``previous`` is supplied, columns are flipped where needed so that
    each has a positive overlap with the previous frame's column.
    """
    lam, F = frame_matrices(params, float(t))
    if previous is not None:
        signs = np.sign(np.einsum("ik,ik->k", previous.F, F))
        F = F * np.where(signs == 0, 1.0, signs)
    return AdiabaticFrame(float(t), lam, F)


def frame_at_minus_infinity() -> np.ndarray:
    return FRAME_MINUS_INFINITY.copy()


def frame_at_plus_infinity() -> np.ndarray:
    return FRAME_PLUS_INFINITY.copy()


def symmetric_frame_relation(frame: AdiabaticFrame, params: ModelParams | None = None) -> np.ndarray:
    """Predict F(-T) from F(T) for equal couplings."""
    if params is not None and not params.is_symmetric:
        raise SymmetryNotApplicable(
            f"needs omega12 == omega23 (got {params.omega12}, {params.omega23})"
        )
    f = frame.F
    return np.array(
        [
            [-f[2, 2], -f[2, 1], -f[2, 0]],
            [f[1, 2], f[1, 1], f[1, 0]],
            [-f[0, 2], -f[0, 1], -f[0, 0]],
        ]
    )


def nonadiabatic_couplings(params: ModelParams, t: float, h: float | None = None) -> np.ndarray:
    """Antisymmetric matrix nu_kl = <phi_k | d phi_l / dt> by central differences."""
    if h is None:
        h = 1e-4 * min(params.tau, 1.0 / math.sqrt(params.beta))
    _, F = frame_matrices(params, np.array([t - h, t, t + h]))
    nu = F[1].T @ (F[2] - F[0]) / (2.0 * h)
    return 0.5 * (nu - nu.T)


def eigenvalues_asymptotic(params: ModelParams, t: float) -> np.ndarray:
    """Leading large-positive-t forms of the adiabatic energies."""
    if t <= 0:
        raise ValueError("asymptotic forms hold for large positive t")
    bt = params.beta * t
    o12sq, o23sq = params.omega12**2, params.omega23**2
    return np.array([bt + (o12sq + o23sq) / bt, params.delta - o23sq / bt, -params.delta - o12sq / bt])


def frame_asymptotic(params: ModelParams, t: float) -> np.ndarray:
    """Large-positive-t eigenvectors, truncated after their first correction."""
    if t <= 0:
        raise ValueError("asymptotic forms hold for large positive t")
    bt = params.beta * t
    o1, o2, d = params.omega12, params.omega23, params.delta
    phi1 = [o1 / bt, 1.0 - (o1**2 + o2**2) / (2 * bt**2), o2 / bt]
    phi2 = [-o1 * o2 / (2 * d * bt), -o2 / bt, 1.0 - o2**2 * (o1**2 + 4 * d**2) / (8 * d**2 * bt**2)]
    phi3 = [-1.0 + o1**2 * (o2**2 + 4 * d**2) / (8 * d**2 * bt**2), o1 / bt, -o1 * o2 / (2 * d * bt)]
    return np.array([phi1, phi2, phi3]).T


def residual(params: ModelParams, frame: AdiabaticFrame) -> float:
    """max |H F - F diag(lambda)| relative to the Hamiltonian norm."""
    H = hamiltonian_at(params, frame.t)
    r = H @ frame.F - frame.F * frame.lambdas
    return float(np.max(np.abs(r)) / np.linalg.norm(H, 2))
