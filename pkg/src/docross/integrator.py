"""Numerical solution of the time-dependent Schrodinger equation.

This is the brute-force reference against which the analytic propagator and
probability formulas are checked. The default path integrates the diabatic
amplitudes, whose equation i dC/dt = H(t) C has coefficients linear in t;
an adiabatic-basis path (using finite-difference nonadiabatic couplings) is
kept as an independent cross-check.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rk
from .model import ModelParams, hamiltonian_at
from .propagator import Propagator3
from .spectral import FRAME_MINUS_INFINITY, FRAME_PLUS_INFINITY, frame_matrices, nonadiabatic_couplings

DEFAULT_RTOL = 1e-12
DEFAULT_ATOL = 1e-14
StepSizeUnderflow = rk.StepSizeUnderflow

BASES = ("diabatic", "adiabatic")


class T0TooSmall(ValueError):
    pass


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    basis: str = "diabatic"
    t: float = 0.0

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}")
        object.__setattr__(self, "amplitudes", np.asarray(self.amplitudes, dtype=complex).reshape(3))

    @classmethod
    def basis_state(cls, index: int, t: float = 0.0, basis: str = "diabatic") -> "StateVector":
        if index not in (1, 2, 3):
            raise ValueError(f"state index must be 1, 2 or 3 (got {index})")
        amps = np.zeros(3, dtype=complex)
        amps[index - 1] = 1.0
        return cls(amps, basis, t)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norm_error(self) -> float:
        return abs(float(self.populations.sum()) - 1.0)

    def to_diabatic(self, params: ModelParams) -> "StateVector":
        if self.basis == "diabatic":
            return self
        F = frame_matrices(params, self.t)[1]
        return StateVector(F @ self.amplitudes, "diabatic", self.t)

    def to_adiabatic(self, params: ModelParams) -> "StateVector":
        if self.basis == "adiabatic":
            return self
        F = frame_matrices(params, self.t)[1]
        return StateVector(F.T @ self.amplitudes, "adiabatic", self.t)


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray  # (n,)
    amplitudes: np.ndarray  # (n, 3)
    basis: str = "diabatic"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.size > 1 and not (np.all(np.diff(t) > 0) or np.all(np.diff(t) < 0)):
            raise ValueError("trajectory times must be strictly monotone")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "amplitudes", np.asarray(self.amplitudes, dtype=complex).reshape(-1, 3))

    def __len__(self) -> int:
        return self.t.size

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def in_basis(self, params: ModelParams, basis: str) -> "Trajectory":
        if basis == self.basis:
            return self
        F = frame_matrices(params, self.t)[1]  # (n, 3, 3)
        if basis == "adiabatic":
            amps = np.einsum("nji,nj->ni", F, self.amplitudes)
        else:
            amps = np.einsum("nij,nj->ni", F, self.amplitudes)
        return Trajectory(self.t, amps, basis)

    def write_csv(self, target) -> None:
        """CSV with header t,P1,P2,P3,ReC1,ImC1,ReC2,ImC2,ReC3,ImC3."""
        if isinstance(target, (str, Path)):
            with open(target, "w", newline="") as fh:
                self.write_csv(fh)
            return
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(["t", "P1", "P2", "P3", "ReC1", "ImC1", "ReC2", "ImC2", "ReC3", "ImC3"])
        pops = self.populations
        for t, P, C in zip(self.t, pops, self.amplitudes):
            row = [t, *P]
            for c in C:
                row += [c.real, c.imag]
            writer.writerow([repr(float(v)) for v in row])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def linear_parts(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """H(t) = H0 + t * H1."""
    H1 = np.zeros((3, 3))
    H1[1, 1] = params.beta
    return hamiltonian_at(params, 0.0), H1


def _max_step_floor(params: ModelParams) -> float:
    return math.sqrt(params.beta)


def _check_window(t_from: float, t_to: float) -> None:
    if not (math.isfinite(t_from) and math.isfinite(t_to)):
        raise ValueError("numerical integration needs a finite window")


def evolve(params: ModelParams, Y0, t_from: float, t_to: float, t_eval=None,
           rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL, record: bool = False):
    """Low-level diabatic propagation of a 3-vector or 3 x k matrix of amplitudes.

    Returns ``(Y_eval, Y_final, n_steps, (rec_t, rec_Y))``.
    """
    _check_window(t_from, t_to)
    H0, H1 = linear_parts(params)
    return rk.solve_linear(
        H0, H1, Y0, t_from, t_to, t_eval, rtol=rtol, atol=atol,
        h_max_coef=0.1, freq_floor=_max_step_floor(params), record=record,
    )


def integrate(params: ModelParams, initial: StateVector, t_from: float, t_to: float,
              rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL, t_eval=None):
    """Propagate ``initial`` from ``t_from`` to ``t_to``.

    Without ``t_eval`` every accepted step is sampled. The final state is
    not renormalised; its norm error is a diagnostic.
    Returns ``(final StateVector, Trajectory)`` in the diabatic basis.
    """
    start = StateVector(initial.amplitudes, initial.basis, t_from).to_diabatic(params)
    if t_eval is None:
        _, Y, _, (rec_t, rec_Y) = evolve(params, start.amplitudes, t_from, t_to, rtol=rtol, atol=atol, record=True)
        traj = Trajectory(rec_t, rec_Y)
    else:
        t_eval = np.asarray(t_eval, dtype=float)
        Y_eval, Y, _, _ = evolve(params, start.amplitudes, t_from, t_to, t_eval, rtol=rtol, atol=atol)
        traj = Trajectory(t_eval, Y_eval)
    return StateVector(Y, "diabatic", t_to), traj


def numeric_propagator(params: ModelParams, t_from: float, t_to: float,
                       rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> Propagator3:
    """Diabatic propagator assembled column by column from the three basis states."""
    _, U, _, _ = evolve(params, np.eye(3, dtype=complex), t_from, t_to, rtol=rtol, atol=atol)
    return Propagator3(U, "diabatic", (t_from, t_to))


def symmetric_window_propagators(params: ModelParams, T_values, rtol: float = DEFAULT_RTOL,
                                 atol: float = DEFAULT_ATOL) -> np.ndarray:
    """U(T, -T) for every T in ``T_values`` from two integrations out of t = 0.

    U(T, -T) = U(T, 0) U(-T, 0)^-1, so one forward and one backward run
    cover a whole grid of window half-widths.
    """
    T = np.asarray(T_values, dtype=float)
    if np.any(T <= 0):
        raise ValueError("window half-widths must be positive")
    order = np.argsort(T)
    Ts = T[order]
    fwd, _, _, _ = evolve(params, np.eye(3, dtype=complex), 0.0, Ts[-1], Ts, rtol=rtol, atol=atol)
    bwd, _, _, _ = evolve(params, np.eye(3, dtype=complex), 0.0, -Ts[-1], -Ts, rtol=rtol, atol=atol)
    U = fwd @ np.linalg.inv(bwd)
    out = np.empty_like(U)
    out[order] = U
    return out


def adiabatic_hamiltonian(params: ModelParams, t: float, h: float | None = None) -> np.ndarray:
    """H_A = diag(lambda) - i nu."""
    lam = frame_matrices(params, t)[0]
    return np.diag(lam).astype(complex) - 1j * nonadiabatic_couplings(params, t, h)


def integrate_adiabatic(params: ModelParams, initial: StateVector, t_from: float, t_to: float,
                        t_eval=(), rtol: float = 1e-10, atol: float = 1e-12, h: float | None = None):
    """Cross-check path: integrate the adiabatic amplitudes A with H_A.

    Returns ``(final StateVector, Trajectory)`` in the adiabatic basis.
    """
    _check_window(t_from, t_to)
    start = StateVector(initial.amplitudes, initial.basis, t_from).to_adiabatic(params)

    def rhs(t, A):
        return -1j * (adiabatic_hamiltonian(params, t, h) @ A)

    floor = _max_step_floor(params)
    t_eval = np.asarray(t_eval, dtype=float)
    # the adiabatic energies bound the local frequency just as for the diabatic path
    span = max(abs(t_from), abs(t_to))
    h_max = 0.1 / max(params.beta * span + params.delta + params.omega12 + params.omega23, floor)
    out, A, _ = rk.solve(rhs, start.amplitudes, t_from, t_to, t_eval, rtol=rtol, atol=atol, h_max=h_max)
    return StateVector(A, "adiabatic", t_to), Trajectory(t_eval, out, "adiabatic")


# --- emulation of the infinite-window (original) model ---------------------

def default_t0(params: ModelParams) -> float:
    """Smallest admissible emulation start magnitude, beta |t0| = 20 max(delta, couplings)."""
    return 20.0 * max(params.delta, params.omega12, params.omega23) / params.beta


def _check_t0(params: ModelParams, t0: float) -> None:
    if params.beta * abs(t0) < 20.0 * max(params.delta, params.omega12, params.omega23) * (1 - 1e-12):
        raise T0TooSmall(
            f"|t0|={abs(t0):g} too small: need beta*|t0| >= 20*max(delta, omega12, omega23)"
        )


def emulate_do_start(params: ModelParams, diabatic_index: int, t0):
    """Diabatic amplitudes at -|t0| of the state that was psi_m at t = -infinity.

    The requested diabatic state is identified with the adiabatic state it
    connects to at -infinity (psi3 -> phi1, psi1 -> -phi2, psi2 -> phi3), and
    that adiabatic eigenvector at -|t0| is returned. A sequence of start
    magnitudes gives a list of states.
    """
    if np.ndim(t0) > 0:
        return [emulate_do_start(params, diabatic_index, float(x)) for x in t0]
    if diabatic_index not in (1, 2, 3):
        raise ValueError(f"diabatic index must be 1, 2 or 3 (got {diabatic_index})")
    _check_t0(params, t0)
    t = -abs(t0)
    F = frame_matrices(params, t)[1]
    A = FRAME_MINUS_INFINITY[diabatic_index - 1]  # row m of F(-inf) = F(-inf)^T e_m
    return StateVector(F @ A, "diabatic", t)


def do_trajectory(params: ModelParams, diabatic_index: int, times, t0: float | None = None,
                  rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> Trajectory:
    """Diabatic trajectory on ``times`` of the state that was psi_m at t = -infinity.

    A single emulated start at -|t0| (default twice the minimum admissible).
    """
    times = np.asarray(times, dtype=float)
    t0 = 2.0 * default_t0(params) if t0 is None else abs(t0)
    if times.min() <= -t0:
        raise T0TooSmall(f"sampling starts at {times.min():g}, before the emulated start -{t0:g}")
    start = emulate_do_start(params, diabatic_index, t0)
    Y, _, _, _ = evolve(params, start.amplitudes, -t0, times.max(), times, rtol=rtol, atol=atol)
    return Trajectory(times, Y)


def asymptotic_populations(params: ModelParams, C: np.ndarray, t: float) -> np.ndarray:
    """Diabatic populations C(+inf) inferred from the adiabatic amplitudes at large t > 0."""
    F = frame_matrices(params, t)[1]
    return np.abs(FRAME_PLUS_INFINITY @ (F.T @ C)) ** 2


def richardson(values_t0, values_2t0) -> np.ndarray:
    """Remove a 1/t0^2 error term from estimates at t0 and 2 t0."""
    return (4.0 * np.asarray(values_2t0) - np.asarray(values_t0)) / 3.0


@dataclass(frozen=True)
class DOLimit:
    probabilities: np.ndarray  # extrapolated P(m -> n), n = 1..3
    raw: np.ndarray  # (2, 3) estimates at t0 and 2 t0
    t0: float
    norm_error: float


def do_limit(params: ModelParams, diabatic_index: int, t0: float | None = None,
             rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL, observable: str = "adiabatic") -> DOLimit:
    """Final probabilities of the infinite-window model from psi_m.

    Runs [-t0, t0] and [-2 t0, 2 t0] and extrapolates in 1/t0^2. With
    ``observable="adiabatic"`` the final state is read through the adiabatic
    frame (converges fast); ``"diabatic"`` uses raw populations.
    """
    t0 = default_t0(params) if t0 is None else abs(t0)
    raw = []
    worst = 0.0
    for mag in (t0, 2.0 * t0):
        start = emulate_do_start(params, diabatic_index, mag)
        _, C, _, _ = evolve(params, start.amplitudes, -mag, mag, rtol=rtol, atol=atol)
        worst = max(worst, abs(float(np.sum(np.abs(C) ** 2)) - 1.0))
        if observable == "adiabatic":
            raw.append(asymptotic_populations(params, C, mag))
        elif observable == "diabatic":
            raw.append(np.abs(C) ** 2)
        else:
            raise ValueError(f"unknown observable {observable!r}")
    raw = np.array(raw)
    return DOLimit(richardson(raw[0], raw[1]), raw, t0, worst)


def do_time_evolution(params: ModelParams, diabatic_index: int, times, t0: float | None = None,
                      rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                      extrapolate: bool = True) -> np.ndarray:
    """Diabatic populations P(m -> n; t) of the infinite-window model on ``times``.

    Returns shape (len(times), 3); with ``extrapolate`` the start-time
    dependence is removed pointwise by 1/t0^2 Richardson extrapolation.
    """
    times = np.asarray(times, dtype=float)
    t0 = default_t0(params) if t0 is None else abs(t0)
    if times.min() <= -t0:
        raise T0TooSmall(f"sampling starts at {times.min():g}, before the emulated start -{t0:g}")
    mags = (t0, 2.0 * t0) if extrapolate else (t0,)
    pops = []
    for mag in mags:
        start = emulate_do_start(params, diabatic_index, mag)
        Y, _, _, _ = evolve(params, start.amplitudes, -mag, times.max(), times, rtol=rtol, atol=atol)
        pops.append(np.abs(Y) ** 2)
    return richardson(*pops) if extrapolate else pops[0]
