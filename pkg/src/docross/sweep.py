"""One-axis parameter scans written out as tables.

A scan varies one axis (window half-width T, splitting delta, coupling, or
observation time t of the infinite-window model) and evaluates a list of named
observables at each grid point, analytic ones by formula and numeric ones with
the integrator. Output rows are ordered by the grid and serialise
deterministically to CSV or JSON.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import integrator, probabilities
from .model import ModelParams, validate
from .propagator import diabatic_propagator

AXES = ("T", "delta", "time", "coupling")
SPACINGS = ("linear", "log")

_TABLE_CELLS = [f"P{m}{n}" for m in (1, 2, 3) for n in (1, 2, 3)]

# observables per axis family: finite-window axes and the time axis
WINDOW_OBSERVABLES = (
    "P31_numeric", "P31_full", "P31_analytic", "P31_avg", "P31_avg_leading", "P31_avg_exact",
    "table_numeric", "table_analytic", "table_avg",
)
TIME_OBSERVABLES = ("P31_numeric", "P31_analytic", "P31_avg", "P31_avg_asymptotic", "table_numeric", "table_avg")


class SweepSpecError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    """One scan. For finite-window axes the template window must be [-T, T];
    the axis value overrides T, delta or both couplings."""

    axis: str
    lo: float
    hi: float
    n_points: int
    fixed: ModelParams
    observables: tuple = ("P31_numeric", "P31_full", "P31_avg")
    spacing: str = "linear"
    rtol: float = integrator.DEFAULT_RTOL
    atol: float = integrator.DEFAULT_ATOL
    label: str = ""
    workers: int = 1

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.n_points)
        return np.linspace(self.lo, self.hi, self.n_points)

    def check(self) -> None:
        if self.axis not in AXES:
            raise SweepSpecError(f"axis must be one of {AXES}")
        if self.spacing not in SPACINGS:
            raise SweepSpecError(f"spacing must be one of {SPACINGS}")
        if self.n_points < 2:
            raise SweepSpecError("n_points must be at least 2")
        if not self.lo < self.hi:
            raise SweepSpecError("lo must be below hi")
        if self.spacing == "log" and self.lo <= 0:
            raise SweepSpecError("log spacing needs lo > 0")
        allowed = TIME_OBSERVABLES if self.axis == "time" else WINDOW_OBSERVABLES
        unknown = [o for o in self.observables if o not in allowed]
        if unknown:
            raise SweepSpecError(f"observables {unknown} not available on axis {self.axis!r}")
        validate(self.fixed)
        if self.axis != "T" and self.axis != "time" and not _half_width(self.fixed):
            raise SweepSpecError("template window must be symmetric and finite, [-T, T]")

    def columns(self) -> list[str]:
        cols = []
        for name in self.observables:
            if name.startswith("table_"):
                kind = name[len("table_"):]
                cols += [f"table_{kind}.{c}" for c in _TABLE_CELLS]
            else:
                cols.append(name)
        return cols

    def point_params(self, x: float) -> ModelParams:
        f = self.fixed
        if self.axis == "T":
            return f.with_window(-x, x)
        if self.axis == "delta":
            return replace(f, delta=x)
        if self.axis == "coupling":
            return replace(f, omega12=x, omega23=x)
        return f.with_window(-math.inf, math.inf)

    def to_dict(self) -> dict:
        return {
            "axis": self.axis, "lo": self.lo, "hi": self.hi, "n_points": self.n_points,
            "spacing": self.spacing, "observables": list(self.observables),
            "fixed": self.fixed.to_dict(), "rtol": self.rtol, "atol": self.atol, "label": self.label,
        }


def _half_width(params: ModelParams):
    if math.isfinite(params.t_start) and params.t_start == -params.t_end:
        return params.t_end
    return None


@dataclass
class SweepResult:
    axis: str
    columns: list
    rows: list  # [(axis value, {column: value or None}, error message or "")]
    metadata: dict = field(default_factory=dict)
    runtime: float = 0.0  # wall clock, kept out of serialised output

    def column(self, name: str) -> np.ndarray:
        return np.array([math.nan if r[1][name] is None else r[1][name] for r in self.rows])

    @property
    def axis_values(self) -> np.ndarray:
        return np.array([r[0] for r in self.rows])

    @property
    def failed(self) -> list:
        return [r for r in self.rows if r[2]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([self.axis, *self.columns, "error"])
        for x, values, err in self.rows:
            writer.writerow([_fmt(x), *(_fmt(values[c]) for c in self.columns), err])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for x, values, err in self.rows:
            row = {self.axis: _json_num(x)}
            row.update({c: _json_num(values[c]) for c in self.columns})
            row["error"] = err or None
            rows.append(row)
        return json.dumps({"metadata": self.metadata, "rows": rows}, indent=1) + "\n"

    def write(self, path, fmt: str = "csv") -> None:
        text = self.to_json() if fmt == "json" else self.to_csv()
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def _json_num(v):
    if v is None or not math.isfinite(v):
        return None
    return float(v)


# --- evaluation ---------------------------------------------------------------

def _table_cells(P: np.ndarray, kind: str) -> dict:
    return {f"table_{kind}.{c}": float(v) for c, v in zip(_TABLE_CELLS, np.asarray(P).ravel())}


def _window_point(spec: SweepSpec, x: float) -> dict:
    """Analytic observables, plus per-point numeric ones off the T axis."""
    params = spec.point_params(x)
    T = _half_width(params)
    out = {}
    for name in spec.observables:
        if name == "P31_full":
            out[name] = probabilities.p31_full(params, T).total
        elif name == "P31_avg_exact":
            out[name] = probabilities.p31_full(params, T).average
        elif name == "P31_avg":
            out[name] = probabilities.p31_average_asymptotic(params, T)
        elif name == "P31_avg_leading":
            out[name] = float(probabilities.p31_average_leading(params, T))
        elif name == "P31_analytic":
            out[name] = float(diabatic_propagator(params, -T, T).probabilities[2, 0])
        elif name == "table_analytic":
            out.update(_table_cells(diabatic_propagator(params, -T, T).probabilities, "analytic"))
        elif name == "table_avg":
            out.update(_table_cells(probabilities.finite_avg_table(params, T).P, "avg"))
        elif name in ("P31_numeric", "table_numeric") and spec.axis != "T":
            P = integrator.numeric_propagator(params, -T, T, spec.rtol, spec.atol).probabilities
            if name == "P31_numeric":
                out[name] = float(P[2, 0])
            else:
                out.update(_table_cells(P, "numeric"))
    return out


def _time_point(spec: SweepSpec, t: float) -> dict:
    params = spec.point_params(t)
    out = {}
    for name in spec.observables:
        if name == "P31_analytic":
            out[name] = probabilities.p31_time_split(params, t).total
        elif name == "P31_avg":
            out[name] = probabilities.p31_time_split(params, t).average
        elif name == "P31_avg_asymptotic":
            out[name] = probabilities.p31_time_split(params, t, form="asymptotic").average
        elif name == "table_avg":
            out.update(_table_cells(probabilities.do_time_table(params, t).P, "avg"))
    return out


def _batched_numeric(spec: SweepSpec, grid: np.ndarray) -> list[dict]:
    """Numeric observables that one integration pair covers for the whole grid."""
    want = [o for o in ("P31_numeric", "table_numeric") if o in spec.observables]
    if not want:
        return [{} for _ in grid]
    if spec.axis == "T":
        U = integrator.symmetric_window_propagators(spec.fixed, grid, spec.rtol, spec.atol)
        P = np.transpose(np.abs(U) ** 2, (0, 2, 1))  # P[i, m, n] = |U_nm|^2
    else:
        starts = (1, 2, 3) if "table_numeric" in want else (3,)
        P = np.full((grid.size, 3, 3), np.nan)
        for m in starts:
            P[:, m - 1, :] = integrator.do_time_evolution(spec.fixed, m, grid, rtol=spec.rtol, atol=spec.atol)
    rows = []
    for Pi in P:
        row = {}
        if "P31_numeric" in want:
            row["P31_numeric"] = float(Pi[2, 0])
        if "table_numeric" in want:
            row.update(_table_cells(Pi, "numeric"))
        rows.append(row)
    return rows


def _safe(fn, *args):
    try:
        return fn(*args), ""
    except Exception as exc:  # recorded per point
        return {}, f"{type(exc).__name__}: {exc}"


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate every observable at every grid point.

    A failing point keeps its row, with empty values and an error message;
    only an invalid spec raises.
    """
    spec.check()
    start = time.perf_counter()
    grid = spec.grid()
    point_fn = _time_point if spec.axis == "time" else _window_point
    # the warning filter is process-wide, so set it once around the worker threads
    with warnings.catch_warnings(), ThreadPoolExecutor(max_workers=max(1, spec.workers)) as pool:
        warnings.simplefilter("ignore", probabilities.ValidityWarning)
        results = list(pool.map(lambda x: _safe(point_fn, spec, float(x)), grid))
        if spec.axis in ("T", "time"):
            batch, err = _safe(_batched_numeric, spec, grid)
    if spec.axis in ("T", "time"):
        batch = batch or [{} for _ in grid]
        results = [(r | b, e or err) for (r, e), b in zip(results, batch)]
    cols = spec.columns()
    rows = [(float(x), {c: vals.get(c) for c in cols}, err) for x, (vals, err) in zip(grid, results)]
    meta = {"spec": spec.to_dict(), "tolerances": {"rtol": spec.rtol, "atol": spec.atol}}
    return SweepResult(spec.axis, cols, rows, meta, time.perf_counter() - start)


def merge(results: list[SweepResult], labels: list[str]) -> SweepResult:
    """Side-by-side columns of sweeps sharing one grid; columns get ``@label`` suffixes."""
    first = results[0]
    for r in results[1:]:
        if r.axis != first.axis or not np.array_equal(r.axis_values, first.axis_values):
            raise ValueError("merged sweeps must share axis and grid")
    cols = [f"{c}@{lab}" for r, lab in zip(results, labels) for c in r.columns]
    rows = []
    for i, (x, _, _) in enumerate(first.rows):
        vals, errs = {}, []
        for r, lab in zip(results, labels):
            vals.update({f"{c}@{lab}": v for c, v in r.rows[i][1].items()})
            if r.rows[i][2]:
                errs.append(f"{lab}: {r.rows[i][2]}")
        rows.append((x, vals, "; ".join(errs)))
    meta = {"sweeps": [r.metadata for r in results], "labels": list(labels)}
    return SweepResult(first.axis, cols, rows, meta, sum(r.runtime for r in results))


# --- named presets --------------------------------------------------------------

def preset(name: str, beta: float = 1.0, workers: int = 1) -> list[SweepSpec]:
    """Preset scans in units of beta; grids resolve >= 12 points per fast period."""
    s = math.sqrt(beta)
    if name == "fig3":
        base = ModelParams(s, s, s, beta, -2.0 / s, 2.0 / s)
        return [SweepSpec("T", 2.0 / s, 30.0 / s, 1601, base,
                          ("P31_numeric", "P31_full", "P31_avg"), label="fig3", workers=workers)]
    if name == "fig4":
        T = 5.0 / s
        base = ModelParams(s, s, s, beta, -T, T)
        return [SweepSpec("delta", 0.2 * s, 4.5 * s, 301, base,
                          ("P31_numeric", "P31_full", "P31_avg"), label="fig4", workers=workers)]
    if name == "fig5":
        return [
            SweepSpec("time", 2.0 / s, 30.0 / s, 2401, ModelParams(w * s, w * s, s, beta),
                      ("P31_numeric", "P31_avg"), label=f"omega={w:g}", workers=workers)
            for w in (1, 3, 10)
        ]
    raise KeyError(f"unknown preset {name!r} (fig2 is a trajectory, see figure2_trajectories)")


def run_preset(name: str, beta: float = 1.0, workers: int = 1) -> SweepResult:
    specs = preset(name, beta, workers)
    results = [run_sweep(s) for s in specs]
    return results[0] if len(results) == 1 else merge(results, [s.label for s in specs])


def figure2_params(beta: float = 1.0) -> ModelParams:
    s = math.sqrt(beta)
    return ModelParams(s, s, s, beta)


def figure2_trajectories(params: ModelParams | None = None, times=None, start_state: int = 1,
                         rtol: float = integrator.DEFAULT_RTOL, atol: float = integrator.DEFAULT_ATOL):
    """Diabatic and adiabatic populations from psi_m at an emulated t = -infinity.

    Both trajectories share one time grid (default [-10, 20] in units of
    beta^-1/2, 3001 points).
    """
    params = figure2_params() if params is None else params
    if times is None:
        times = np.linspace(-10.0, 20.0, 3001) / math.sqrt(params.beta)
    diabatic = integrator.do_trajectory(params, start_state, times, rtol=rtol, atol=atol)
    return diabatic, diabatic.in_basis(params, "adiabatic")
