"""Dormand-Prince 5(4) embedded Runge-Kutta integration.

Two drivers share one tableau:

* :func:`solve_linear` integrates ``dY/dt = -i (A + t B) Y`` for a complex
  3 x k state with a numba-compiled loop; this is the workhorse for the
  diabatic Schrodinger equation, where steps number in the 1e5 range.
* :func:`solve` is a plain numpy driver for an arbitrary right-hand side.

Complex arithmetic on the 3 x k state is the same computation as the
real/imaginary split 6k-dimensional real system. Requested output times are
served by an extra untruncated step from the last accepted point, so output
accuracy equals step accuracy (no interpolant).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
])
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# fifth-order minus embedded fourth-order weights, including the FSAL stage
E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0

OK, UNDERFLOW, MAX_STEPS = 0, 1, 2


class StepSizeUnderflow(ArithmeticError):
    def __init__(self, t_reached: float, message: str | None = None):
        super().__init__(message or f"step size underflow at t={t_reached:.17g}")
        self.t_reached = t_reached


class StepBudgetExceeded(ArithmeticError):
    def __init__(self, t_reached: float, max_steps: int):
        super().__init__(f"step budget {max_steps} exhausted at t={t_reached:.17g}")
        self.t_reached = t_reached


@njit(cache=True, nogil=True)
def _rhs(Am, Bm, t, Y, out):
    k = Y.shape[1]
    for i in range(3):
        for j in range(k):
            s = 0j
            for l in range(3):
                s += (Am[i, l] + t * Bm[i, l]) * Y[l, j]
            out[i, j] = -1j * s


@njit(cache=True, nogil=True)
def _step(Am, Bm, t, Y, K, h, Ynew, tmp):
    """One DP5 step from (t, Y) with K[0] = f(t, Y); fills K[1:7] and Ynew."""
    k = Y.shape[1]
    for s in range(1, 6):
        for i in range(3):
            for j in range(k):
                acc = Y[i, j]
                for r in range(s):
                    acc += (h * A[s, r]) * K[r, i, j]
                tmp[i, j] = acc
        _rhs(Am, Bm, t + C[s] * h, tmp, K[s])
    for i in range(3):
        for j in range(k):
            acc = Y[i, j]
            for r in range(6):
                acc += (h * B[r]) * K[r, i, j]
            Ynew[i, j] = acc
    _rhs(Am, Bm, t + h, Ynew, K[6])


@njit(cache=True, nogil=True)
def _error_norm(Y, Ynew, K, h, rtol, atol):
    total = 0.0
    n = 0
    for i in range(Y.shape[0]):
        for j in range(Y.shape[1]):
            e = 0j
            for r in range(7):
                if E[r] != 0.0:
                    e += E[r] * K[r, i, j]
            e *= h
            scale = atol + rtol * max(abs(Y[i, j]), abs(Ynew[i, j]))
            total += (abs(e) / scale) ** 2
            n += 1
    return math.sqrt(total / n)


@njit(cache=True, nogil=True)
def _solve_linear(Am, Bm, Y0, t0, t1, t_out, rtol, atol, h_max_coef, freq_floor, max_steps, record):
    k = Y0.shape[1]
    direction = 1.0 if t1 >= t0 else -1.0
    a_norm = 0.0
    b_norm = 0.0
    for i in range(3):
        ra = 0.0
        rb = 0.0
        for l in range(3):
            ra += abs(Am[i, l])
            rb += abs(Bm[i, l])
        a_norm = max(a_norm, ra)
        b_norm = max(b_norm, rb)

    n_out = t_out.shape[0]
    out = np.zeros((n_out, 3, k), dtype=np.complex128)
    K = np.empty((7, 3, k), dtype=np.complex128)
    Ks = np.empty((7, 3, k), dtype=np.complex128)
    Ynew = np.empty((3, k), dtype=np.complex128)
    Ysub = np.empty((3, k), dtype=np.complex128)
    tmp = np.empty((3, k), dtype=np.complex128)

    cap = 1024 if record else 1
    rec_t = np.empty(cap)
    rec_Y = np.empty((cap, 3, k), dtype=np.complex128)
    n_rec = 0

    t = t0
    Y = Y0.copy()
    _rhs(Am, Bm, t, Y, K[0])
    if record:
        rec_t[0] = t
        rec_Y[0] = Y
        n_rec = 1

    io = 0
    while io < n_out and (t_out[io] - t0) * direction <= 0.0:
        out[io] = Y
        io += 1

    span = abs(t1 - t0)
    h = min(0.01 / max(a_norm + abs(t) * b_norm, freq_floor), span)
    n_steps = 0
    status = 0
    while (t1 - t) * direction > 0.0:
        if n_steps >= max_steps:
            status = 2
            break
        freq = a_norm + max(abs(t), abs(t + direction * h)) * b_norm
        h_abs = min(abs(h), h_max_coef / max(freq, freq_floor))
        last = False
        if h_abs >= abs(t1 - t):
            h_abs = abs(t1 - t)
            last = True
        hs = h_abs * direction
        _step(Am, Bm, t, Y, K, hs, Ynew, tmp)
        err = _error_norm(Y, Ynew, K, hs, rtol, atol)
        if err <= 1.0:
            t_new = t1 if last else t + hs
            while io < n_out and (t_out[io] - t_new) * direction <= 0.0:
                dt = t_out[io] - t
                if dt == hs or t_out[io] == t_new:
                    out[io] = Ynew
                else:
                    Ks[0] = K[0]
                    _step(Am, Bm, t, Y, Ks, dt, Ysub, tmp)
                    out[io] = Ysub
                io += 1
            t = t_new
            Y[:, :] = Ynew
            K[0] = K[6]
            n_steps += 1
            if record:
                if n_rec == cap:
                    cap *= 2
                    new_t = np.empty(cap)
                    new_Y = np.empty((cap, 3, k), dtype=np.complex128)
                    new_t[:n_rec] = rec_t[:n_rec]
                    new_Y[:n_rec] = rec_Y[:n_rec]
                    rec_t = new_t
                    rec_Y = new_Y
                rec_t[n_rec] = t
                rec_Y[n_rec] = Y
                n_rec += 1
            factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * err ** -0.2)
            h = h_abs * factor
        else:
            h = h_abs * max(MIN_FACTOR, SAFETY * err ** -0.2)
            if h < 1e-14 * max(1.0, abs(t)):
                status = 1
                break
    return out, Y, t, n_steps, status, rec_t[:n_rec], rec_Y[:n_rec]


def solve_linear(Am, Bm, Y0, t0, t1, t_out=None, rtol=1e-10, atol=1e-12,
                 h_max_coef=0.1, freq_floor=1.0, max_steps=10_000_000, record=False):
    """Integrate dY/dt = -i (Am + t Bm) Y from t0 to t1.

    The step never exceeds ``h_max_coef / max(|Am| + |t| |Bm|, freq_floor)``,
    a bound on the fastest local eigenfrequency. ``t_out`` must be ordered
    in the direction of integration.

    Returns ``(Y_out, Y_final, n_steps, (rec_t, rec_Y))``.
    """
    Y0 = np.asarray(Y0, dtype=np.complex128)
    squeeze = Y0.ndim == 1
    Y0 = np.ascontiguousarray(Y0.reshape(3, -1))
    t_out = np.ascontiguousarray(np.asarray([] if t_out is None else t_out, dtype=float))
    if t_out.size > 1 and np.any(np.diff(t_out) * np.sign(t1 - t0) < 0):
        raise ValueError("t_out must be ordered in the direction of integration")
    out, Y, t, n_steps, status, rec_t, rec_Y = _solve_linear(
        np.ascontiguousarray(Am, dtype=float), np.ascontiguousarray(Bm, dtype=float),
        Y0, float(t0), float(t1), t_out, float(rtol), float(atol),
        float(h_max_coef), float(freq_floor), int(max_steps), bool(record),
    )
    if status == UNDERFLOW:
        raise StepSizeUnderflow(t)
    if status == MAX_STEPS:
        raise StepBudgetExceeded(t, max_steps)
    if squeeze:
        out, Y, rec_Y = out[..., 0], Y[:, 0], rec_Y[..., 0]
    return out, Y, n_steps, (rec_t, rec_Y)


def solve(f, Y0, t0, t1, t_out=(), rtol=1e-10, atol=1e-12, h_max=np.inf, max_steps=1_000_000):
    """Generic DP5(4) driver for ``dY/dt = f(t, Y)`` (numpy arrays, any shape).

    Returns ``(Y_out, Y_final, n_steps)``.
    """
    Y = np.array(Y0, dtype=complex)
    t_out = np.asarray(t_out, dtype=float)
    direction = 1.0 if t1 >= t0 else -1.0
    out = np.zeros((t_out.size,) + Y.shape, dtype=complex)
    K = [None] * 7
    t = float(t0)
    K[0] = f(t, Y)
    io = 0
    while io < t_out.size and (t_out[io] - t0) * direction <= 0:
        out[io] = Y
        io += 1

    def step(t, Y, k0, h):
        ks = [k0] + [None] * 6
        for s in range(1, 6):
            ks[s] = f(t + C[s] * h, Y + h * sum(A[s, r] * ks[r] for r in range(s)))
        Ynew = Y + h * sum(B[r] * ks[r] for r in range(6))
        ks[6] = f(t + h, Ynew)
        return Ynew, ks

    scale0 = np.max(np.abs(K[0])) / max(np.max(np.abs(Y)), atol)
    h = min(0.01 / max(scale0, 1e-300), abs(t1 - t0), h_max)
    n_steps = 0
    while (t1 - t) * direction > 0:
        if n_steps >= max_steps:
            raise StepBudgetExceeded(t, max_steps)
        h_abs = min(abs(h), h_max)
        last = h_abs >= abs(t1 - t)
        if last:
            h_abs = abs(t1 - t)
        hs = h_abs * direction
        Ynew, ks = step(t, Y, K[0], hs)
        e = hs * sum(E[r] * ks[r] for r in range(7) if E[r] != 0.0)
        sc = atol + rtol * np.maximum(np.abs(Y), np.abs(Ynew))
        err = float(np.sqrt(np.mean((np.abs(e) / sc) ** 2)))
        if err <= 1.0:
            t_new = t1 if last else t + hs
            while io < t_out.size and (t_out[io] - t_new) * direction <= 0:
                dt = t_out[io] - t
                out[io] = Ynew if t_out[io] == t_new else step(t, Y, K[0], dt)[0]
                io += 1
            t, Y, K[0] = t_new, Ynew, ks[6]
            n_steps += 1
            h = h_abs * (MAX_FACTOR if err == 0 else min(MAX_FACTOR, SAFETY * err ** -0.2))
        else:
            h = h_abs * max(MIN_FACTOR, SAFETY * err ** -0.2)
            if h < 1e-14 * max(1.0, abs(t)):
                raise StepSizeUnderflow(t)
    return out, Y, n_steps
