"""Command-line entry point: ``docross {evolve,table,sweep,validate}``.

Frequencies are given in units of sqrt(beta) and times in units of
1/sqrt(beta) (flags and config files alike), so ``--beta`` only rescales.
Exit codes: 0 success, 2 usage or parameter error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import battery, integrator, probabilities, sweep
from .model import ModelParams, ParameterError, params_from_mapping, validate
from .quadrature import QuadratureFailure
from .spectral import DegenerateEigenvalue

log = logging.getLogger("docross")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
OUTPUT_DIR_ENV = "DOCROSS_OUTPUT_DIR"
NUMERIC_ERRORS = (ArithmeticError, QuadratureFailure, DegenerateEigenvalue, integrator.StepSizeUnderflow)


class UsageError(Exception):
    pass


def _time_value(text: str) -> float:
    t = text.strip().lower()
    if t in ("-inf", "-infinity"):
        return -math.inf
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    return float(text)


def _param_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model parameters (units of sqrt(beta) and 1/sqrt(beta))")
    g.add_argument("--config", type=Path, help="JSON or YAML file with parameter keys; flags override it")
    g.add_argument("--omega", type=float, help="set both couplings")
    g.add_argument("--omega12", type=float)
    g.add_argument("--omega23", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--beta", type=float, help="chirp rate (default 1)")
    g.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _output_flags(default_name: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("-o", "--output", type=Path,
                   help=f"output file (default ${OUTPUT_DIR_ENV}/{default_name}, else ./{default_name})")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="docross", description="Finite-duration three-state crossing model")
    sub = parser.add_subparsers(dest="command", required=True)
    params = _param_flags()

    ev = sub.add_parser("evolve", parents=[params, _output_flags("trajectory")],
                        help="integrate the Schrodinger equation and write a trajectory")
    ev.add_argument("--from", dest="t_from", type=_time_value, help="start time; -inf emulates the infinite past")
    ev.add_argument("--to", dest="t_to", type=_time_value, help="end time (finite)")
    ev.add_argument("--start-state", type=int, help="initial diabatic state 1, 2 or 3")
    ev.add_argument("--basis", choices=integrator.BASES, default="diabatic", help="basis of the written amplitudes")
    ev.add_argument("--samples", type=int, default=2001, help="number of output times (0: every accepted step)")
    ev.add_argument("--rtol", type=float, default=integrator.DEFAULT_RTOL)
    ev.add_argument("--atol", type=float, default=integrator.DEFAULT_ATOL)

    tb = sub.add_parser("table", parents=[params], help="print a 3x3 transition-probability table")
    tb.add_argument("--kind", required=True, choices=("do-exact", "finite-avg", "finite-full", "do-time"))
    tb.add_argument("--T", dest="T", type=float, help="window half-width (finite-avg, finite-full)")
    tb.add_argument("--t", dest="t", type=float, help="observation time (do-time)")
    tb.add_argument("--precision", type=int, default=6)

    sw = sub.add_parser("sweep", parents=[params, _output_flags("sweep")], help="run a parameter scan")
    sw.add_argument("--preset", choices=("fig2", "fig3", "fig4", "fig5"))
    sw.add_argument("--axis", choices=sweep.AXES)
    sw.add_argument("--lo", type=float)
    sw.add_argument("--hi", type=float)
    sw.add_argument("--n", type=int, default=201)
    sw.add_argument("--spacing", choices=sweep.SPACINGS, default="linear")
    sw.add_argument("--observables", default="P31_numeric,P31_full,P31_avg",
                    help="comma-separated observable names")
    sw.add_argument("--T", dest="T", type=float, help="window half-width for delta/coupling axes")
    sw.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    sw.add_argument("--rtol", type=float, default=integrator.DEFAULT_RTOL)
    sw.add_argument("--atol", type=float, default=integrator.DEFAULT_ATOL)

    va = sub.add_parser("validate", help="run the analytic-vs-numeric cross-check battery")
    mode = va.add_mutually_exclusive_group()
    mode.add_argument("--quick", action="store_true", help="algebraic and symmetry checks only (default)")
    mode.add_argument("--full", action="store_true", help="also run the numerical oracle comparisons")
    return parser


# --- parameter assembly -----------------------------------------------------------

def _scaled_values(args, require: tuple[str, ...]) -> dict:
    """Merge config file and flags (flags win); values still in scaled units."""
    values: dict = {}
    if getattr(args, "config", None):
        text = args.config.read_text()
        if args.config.suffix.lower() in (".yaml", ".yml"):
            import yaml

            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
        if not isinstance(data, dict):
            raise UsageError(f"{args.config}: expected a mapping of parameter names to values")
        params_from_mapping(data)  # rejects unknown keys
        values.update(data)
        if "omega" in values:
            values.setdefault("omega12", values["omega"])
            values.setdefault("omega23", values.pop("omega"))
    if args.omega is not None:
        values["omega12"] = values["omega23"] = args.omega
    for key in ("omega12", "omega23", "delta", "beta"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    values.setdefault("beta", 1.0)
    for key in require:
        if key not in values:
            flag = "--omega (or --omega12/--omega23)" if key.startswith("omega") else f"--{key}"
            raise UsageError(f"missing required flag {flag}")
    return values


def _physical(values: dict, t_start=-math.inf, t_end=math.inf) -> ModelParams:
    beta = float(values["beta"])
    if not beta > 0:
        raise ParameterError(f"beta must be > 0 (got {beta})")
    s = math.sqrt(beta)
    params = ModelParams(float(values["omega12"]) * s, float(values["omega23"]) * s,
                         float(values["delta"]) * s, beta, t_start / s, t_end / s)
    validate(params)
    return params


def _output_path(args, default_name: str) -> Path:
    if args.output:
        return args.output
    base = Path(os.environ.get(OUTPUT_DIR_ENV, "."))
    base.mkdir(parents=True, exist_ok=True)
    return base / f"{default_name}.{args.format}"


# --- subcommands --------------------------------------------------------------------

def cmd_evolve(args) -> int:
    values = _scaled_values(args, ("omega12", "omega23", "delta"))
    t_from = args.t_from if args.t_from is not None else values.get("t_start")
    t_to = args.t_to if args.t_to is not None else values.get("t_end")
    if t_from is None:
        raise UsageError("missing required flag --from")
    if t_to is None:
        raise UsageError("missing required flag --to")
    if args.start_state is None:
        raise UsageError("missing required flag --start-state")
    if args.start_state not in (1, 2, 3):
        raise UsageError(f"--start-state must be 1, 2 or 3 (got {args.start_state})")
    t_from, t_to = _time_value(str(t_from)), _time_value(str(t_to))
    if not math.isfinite(t_to):
        raise UsageError("--to must be finite")
    params = _physical(values, t_from, t_to)
    t_to = params.t_end
    if math.isfinite(params.t_start):
        start = integrator.StateVector.basis_state(args.start_state, params.t_start)
        t_begin = params.t_start
    else:
        t0 = max(2.0 * integrator.default_t0(params), 2.0 * abs(t_to))
        start = integrator.emulate_do_start(params, args.start_state, t0)
        t_begin = start.t
        log.info("emulating t = -inf with a start at %g", t_begin)
    t_eval = None if args.samples == 0 else np.linspace(t_begin, t_to, max(args.samples, 2))
    final, traj = integrator.integrate(params, start, t_begin, t_to, args.rtol, args.atol, t_eval=t_eval)
    if args.basis == "adiabatic":
        traj = traj.in_basis(params, "adiabatic")
    path = _output_path(args, "trajectory")
    if args.format == "json":
        rows = [{"t": float(t), "P": [float(x) for x in P],
                 "C": [[float(c.real), float(c.imag)] for c in C]}
                for t, P, C in zip(traj.t, traj.populations, traj.amplitudes)]
        path.write_text(json.dumps({"basis": traj.basis, "params": params.to_dict(), "samples": rows}) + "\n")
    else:
        traj.write_csv(path)
    pops = final.populations
    print(f"final diabatic populations at t={t_to:g}: P1={pops[0]:.6g} P2={pops[1]:.6g} P3={pops[2]:.6g}")
    print(f"norm error {final.norm_error:.2e}; trajectory written to {path}")
    return EXIT_OK


def cmd_table(args) -> int:
    values = _scaled_values(args, ("omega12", "omega23", "delta"))
    params = _physical(values)
    s = math.sqrt(params.beta)
    if args.kind in ("finite-avg", "finite-full") and args.T is None:
        raise UsageError(f"--kind {args.kind} requires --T")
    if args.kind == "do-time" and args.t is None:
        raise UsageError("--kind do-time requires --t")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", probabilities.ValidityWarning)
        if args.kind == "do-exact":
            table = probabilities.do_exact_table(params)
        elif args.kind == "finite-avg":
            table = probabilities.finite_avg_table(params, args.T / s)
        elif args.kind == "finite-full":
            table = probabilities.finite_full_table(params, args.T / s)
        else:
            table = probabilities.do_time_table(params, args.t / s)
    print(f"# {table.kind} transition probabilities P(row -> column)")
    print(table.format(args.precision))
    for w in caught:
        print(f"# warning: {w.message}", file=sys.stderr)
    if table.out_of_bounds:
        print("# warning: entries outside [0, 1]; asymptotic formula used beyond its range", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.preset == "fig2":
        return _sweep_fig2(args)
    if args.preset:
        beta = float(_scaled_values(args, ()).get("beta", 1.0))
        result = sweep.run_preset(args.preset, beta, args.workers)
        name = args.preset
    else:
        for flag in ("axis", "lo", "hi"):
            if getattr(args, flag) is None:
                raise UsageError(f"missing required flag --{flag} (or use --preset)")
        # the scanned quantity needs no flag of its own; the template takes lo
        swept = {"delta": ("delta",), "coupling": ("omega12", "omega23")}.get(args.axis, ())
        values = _scaled_values(args, tuple(k for k in ("omega12", "omega23", "delta") if k not in swept))
        for key in swept:
            values.setdefault(key, args.lo)
        s = math.sqrt(float(values["beta"]))
        if args.axis in ("delta", "coupling"):
            if args.T is None:
                raise UsageError(f"--axis {args.axis} requires --T")
            fixed = _physical(values, -args.T, args.T)
        else:
            fixed = _physical(values)
        scale = {"T": 1 / s, "time": 1 / s, "delta": s, "coupling": s}[args.axis]
        spec = sweep.SweepSpec(
            args.axis, args.lo * scale, args.hi * scale, args.n, fixed,
            tuple(o.strip() for o in args.observables.split(",") if o.strip()),
            args.spacing, args.rtol, args.atol, workers=args.workers,
        )
        try:
            result = sweep.run_sweep(spec)
        except sweep.SweepSpecError as exc:
            raise UsageError(str(exc)) from exc
        name = f"sweep_{args.axis}"
    path = _output_path(args, name)
    result.write(path, args.format)
    log.info("sweep took %.2f s", result.runtime)
    print(f"{len(result.rows)} rows ({len(result.failed)} failed) written to {path}")
    return EXIT_NUMERIC if result.failed else EXIT_OK


def _sweep_fig2(args) -> int:
    beta = float(_scaled_values(args, ()).get("beta", 1.0))
    diabatic, adiabatic = sweep.figure2_trajectories(sweep.figure2_params(beta))
    path = _output_path(args, "fig2")
    cols = ["t", "P1_diabatic", "P2_diabatic", "P3_diabatic", "P1_adiabatic", "P2_adiabatic", "P3_adiabatic"]
    data = np.column_stack([diabatic.t, diabatic.populations, adiabatic.populations])
    if args.format == "json":
        rows = [dict(zip(cols, map(float, r))) for r in data]
        path.write_text(json.dumps({"metadata": {"preset": "fig2", "beta": beta}, "rows": rows}, indent=1) + "\n")
    else:
        lines = [",".join(cols)] + [",".join(repr(float(v)) for v in r) for r in data]
        path.write_text("\n".join(lines) + "\n")
    print(f"{len(data)} rows written to {path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    checks = battery.run(full=args.full)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_NUMERIC if failed else EXIT_OK


COMMANDS = {"evolve": cmd_evolve, "table": cmd_table, "sweep": cmd_sweep, "validate": cmd_validate}


def _join_negative_infinity(argv: list[str]) -> list[str]:
    """Let ``--from -inf`` through argparse, which would read -inf as an option."""
    out = []
    for tok in argv:
        if tok.lower() in ("-inf", "-infinity") and out and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv: list[str] | None = None) -> int:
    argv = _join_negative_infinity(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(getattr(args, "verbose", 0), 2),
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParameterError) as exc:
        print(f"docross {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        print(f"docross {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"docross {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
