"""Named cross-checks between the analytic formulas and the numerical oracle.

``run(full=False)`` covers the cheap algebraic and symmetry checks;
``full=True`` adds integrations of the Schrodinger equation.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import integrator, probabilities, propagator, spectral
from .lz import lz_matrix_minus, lz_matrix_plus, make_node
from .model import ModelParams, hamiltonian_at


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _points(n: int, symmetric: bool, seed: int = 7) -> list[ModelParams]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        w12, w23, d, b = rng.uniform(0.2, 3.0, 4)
        out.append(ModelParams(w12, w12 if symmetric else w23, d, b))
    return out


def _eigen_vs_eigh():
    worst = 0.0
    for params in _points(20, False):
        for t in np.linspace(-8, 8, 17):
            lam = spectral.eigenvalues(params, t)
            ref = np.linalg.eigvalsh(hamiltonian_at(params, t))[::-1]
            worst = max(worst, float(np.max(np.abs(lam - ref))))
    return worst <= 1e-12, f"max |lambda - eigh| = {worst:.2e}"


def _frame_quality():
    worst = 0.0
    for params in _points(20, False):
        for t in np.linspace(-8, 8, 17):
            fr = spectral.frame_at(params, t)
            H = hamiltonian_at(params, t)
            orth = np.max(np.abs(fr.F.T @ fr.F - np.eye(3)))
            res = np.max(np.abs(H @ fr.F - fr.F * fr.lambdas)) / max(1.0, np.max(np.abs(H)))
            worst = max(worst, orth, res)
    return worst <= 1e-12, f"max orthogonality/eigen residual = {worst:.2e}"


def _frame_minus_infinity():
    params = ModelParams.symmetric(1.0)
    err = float(np.max(np.abs(spectral.frame_at(params, -1e6).F - spectral.frame_at_minus_infinity())))
    return err <= 1e-5, f"|F(-1e6) - F(-inf)| = {err:.2e}"


def _symmetry_relations():
    worst = 0.0
    for params in _points(20, True):
        T = params.tau + 1.0 + 4.0 * np.random.default_rng(int(params.delta * 1e6)).random()
        fp, fm = spectral.frame_at(params, T), spectral.frame_at(params, -T)
        worst = max(
            worst,
            abs(fm.lambdas[0] + fp.lambdas[2]),
            abs(fm.lambdas[1] + fp.lambdas[1]),
            float(np.max(np.abs(spectral.symmetric_frame_relation(fp) - fm.F))),
            abs(propagator.phase_integrals(params, -T, T, tol=1e-12).Lambda[1]),
        )
    return worst <= 1e-10, f"max symmetry residual = {worst:.2e}"


def _lz_unitary():
    worst = 0.0
    for alpha in (0.0, 0.1, 0.5, 1.0, 2.0, 5.0):
        node = make_node(alpha, 1.0, 0.0)
        for U in (lz_matrix_minus(node), lz_matrix_plus(node)):
            worst = max(worst, float(np.max(np.abs(U.conj().T @ U - np.eye(3)))))
    return worst <= 1e-14, f"max |U^dag U - 1| = {worst:.2e}"


def _propagator_forms():
    worst_prod, worst_unit = 0.0, 0.0
    for params in _points(10, False):
        T = params.tau + 3.0
        a = propagator.analytic_adiabatic_propagator(params, -T, T).U
        c = propagator.closed_form_adiabatic_propagator(params, -T, T).U
        worst_prod = max(worst_prod, float(np.max(np.abs(a - c))))
        worst_unit = max(worst_unit, propagator.diabatic_propagator(params, -T, T).unitarity_error)
    ok = worst_prod <= 1e-12 and worst_unit <= 1e-10
    return ok, f"five-factor vs closed form {worst_prod:.2e}, diabatic unitarity {worst_unit:.2e}"


def _table_rows():
    worst = 0.0
    for params in _points(20, True):
        worst = max(worst, float(np.max(np.abs(probabilities.do_exact_table(params).row_sums - 1))))
        for x in (10.0, 40.0):
            x = x + params.tau
            worst = max(worst, float(np.max(np.abs(probabilities.finite_avg_table(params, x).row_sums - 1))))
            worst = max(worst, float(np.max(np.abs(probabilities.do_time_table(params, x).row_sums - 1))))
    return worst <= 1e-13, f"max |row sum - 1| = {worst:.2e}"


def _half_relation():
    worst = 0.0
    for params in _points(50, True):
        t = params.tau + 10.0
        a = probabilities.do_time_table(params, t)[3, 1]
        b = probabilities.finite_avg_table(params, t)[3, 1]
        worst = max(worst, abs(a - 0.5 * b) / b)
    return worst <= 1e-14, f"max relative deviation = {worst:.2e}"


def _numeric_unitarity():
    prop = integrator.numeric_propagator(ModelParams.symmetric(1.0), -20.0, 20.0)
    err = prop.unitarity_error
    return err <= 1e-8, f"|U^dag U - 1| = {err:.2e} at T=20"


def _numeric_vs_analytic():
    params = ModelParams.symmetric(1.0)
    worst = 0.0
    for T in (15.0, 20.0, 30.0):
        n = integrator.numeric_propagator(params, -T, T).probabilities
        a = propagator.diabatic_propagator(params, -T, T).probabilities
        worst = max(worst, float(np.max(np.abs(n - a))))
    return worst <= 0.02, f"max |P_numeric - P_analytic| = {worst:.2e} for T in (15, 20, 30)"


def _do_limit():
    params = ModelParams.symmetric(1.0)
    exact = probabilities.do_exact_table(params).P
    worst = 0.0
    for m in (1, 2, 3):
        worst = max(worst, float(np.max(np.abs(integrator.do_limit(params, m).probabilities - exact[m - 1]))))
    return worst <= 1e-3, f"max |P_emulated - P_exact| = {worst:.2e}"


def _adiabatic_path():
    params = ModelParams.symmetric(1.0)
    start = integrator.StateVector.basis_state(1, -4.0)
    times = np.linspace(-4.0, 4.0, 9)
    _, diab = integrator.integrate(params, start, -4.0, 4.0, t_eval=times)
    _, adia = integrator.integrate_adiabatic(params, start, -4.0, 4.0, t_eval=times)
    err = float(np.max(np.abs(adia.in_basis(params, "diabatic").populations - diab.populations)))
    return err <= 1e-6, f"max population difference = {err:.2e}"


def _p31_full_vs_numeric():
    params = ModelParams.symmetric(1.0)
    a = probabilities.p31_full(params, 5.0).total
    n = integrator.numeric_propagator(params, -5.0, 5.0).probabilities[2, 0]
    rel = abs(a - n) / n
    return rel <= 0.2, f"relative deviation {rel:.3f} at T=5"


QUICK = [
    ("eigenvalues vs generic solver", _eigen_vs_eigh),
    ("frame orthogonality and residual", _frame_quality),
    ("frame limit at -infinity", _frame_minus_infinity),
    ("equal-coupling symmetries", _symmetry_relations),
    ("LZ matrix unitarity", _lz_unitary),
    ("analytic propagator forms", _propagator_forms),
    ("table row sums", _table_rows),
    ("half relation of averages", _half_relation),
]
FULL = [
    ("numeric propagator unitarity", _numeric_unitarity),
    ("numeric vs analytic probabilities", _numeric_vs_analytic),
    ("infinite-window limit", _do_limit),
    ("adiabatic vs diabatic integration", _adiabatic_path),
    ("P31 formula vs numeric", _p31_full_vs_numeric),
]


def run(full: bool = False) -> list[Check]:
    results = []
    for name, fn in QUICK + (FULL if full else []):
        start = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", probabilities.ValidityWarning)
                ok, detail = fn()
        except Exception as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(Check(name, bool(ok), detail, time.perf_counter() - start))
    return results
