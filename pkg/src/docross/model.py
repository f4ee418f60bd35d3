"""Model parameters and the diabatic Hamiltonian of the three-state crossing model.

Units are natural (hbar = 1). The two parallel diabatic levels sit at -delta and
+delta, the tilted level at beta*t, and the tilted state couples to each parallel
state with a constant real coupling while the interaction window is open.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

NEG_INF = -math.inf
POS_INF = math.inf


class ParameterError(ValueError):
    """Base class for invalid model parameters."""

    field = ""


class NonPositiveDelta(ParameterError):
    field = "delta"


class NonPositiveBeta(ParameterError):
    field = "beta"


class NegativeCoupling(ParameterError):
    field = "omega"


class EmptyWindow(ParameterError):
    field = "t_start"


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters plus the interaction window.

    ``t_start`` / ``t_end`` may be ``-inf`` / ``+inf`` to describe the
    original (infinite-duration) model.
    """

    omega12: float
    omega23: float
    delta: float
    beta: float
    t_start: float = NEG_INF
    t_end: float = POS_INF

    @classmethod
    def symmetric(cls, omega: float, delta: float = 1.0, beta: float = 1.0,
                  T: float | None = None) -> "ModelParams":
        """Equal couplings; window [-T, T] (infinite when ``T`` is None)."""
        if T is None:
            return cls(omega, omega, delta, beta)
        return cls(omega, omega, delta, beta, -T, T)

    @property
    def tau(self) -> float:
        return self.delta / self.beta

    @property
    def is_symmetric(self) -> bool:
        return self.omega12 == self.omega23

    @property
    def finite_window(self) -> bool:
        return math.isfinite(self.t_start) and math.isfinite(self.t_end)

    @property
    def scale(self) -> float:
        """Largest frequency scale among delta, the couplings and sqrt(beta)."""
        return max(self.delta, self.omega12, self.omega23, math.sqrt(self.beta))

    def with_window(self, t_start: float, t_end: float) -> "ModelParams":
        return replace(self, t_start=t_start, t_end=t_end)

    def to_dict(self) -> dict[str, Any]:
        return {
            "omega12": self.omega12,
            "omega23": self.omega23,
            "delta": self.delta,
            "beta": self.beta,
            "t_start": _format_time(self.t_start),
            "t_end": _format_time(self.t_end),
        }


def validate(params: ModelParams) -> None:
    """Raise a :class:`ParameterError` subclass naming the violated assumption."""
    if not params.delta > 0:
        raise NonPositiveDelta(f"delta must be > 0 (got {params.delta})")
    if not params.beta > 0:
        raise NonPositiveBeta(f"beta must be > 0 (got {params.beta})")
    for name in ("omega12", "omega23"):
        value = getattr(params, name)
        if not value >= 0:
            err = NegativeCoupling(f"{name} must be >= 0 (got {value})")
            err.field = name
            raise err
    if math.isnan(params.t_start) or math.isnan(params.t_end) or not params.t_start < params.t_end:
        raise EmptyWindow(
            f"interaction window is empty: t_start={params.t_start} >= t_end={params.t_end}"
        )


def hamiltonian_at(params: ModelParams, t: float) -> np.ndarray:
    """Diabatic Hamiltonian (3x3, real symmetric) at time ``t``."""
    o12, o23, d = params.omega12, params.omega23, params.delta
    return np.array(
        [[-d, o12, 0.0],
         [o12, params.beta * t, o23],
         [0.0, o23, d]],
        dtype=float,
    )


def crossing_times(params: ModelParams) -> tuple[float, float]:
    """Times of the psi1-psi2 and psi2-psi3 diabatic crossings, (-tau, +tau)."""
    tau = params.delta / params.beta
    return -tau, tau


def _parse_time(value: Any) -> float:
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("-inf", "-infinity"):
            return NEG_INF
        if text in ("inf", "+inf", "infinity", "+infinity"):
            return POS_INF
    return float(value)


def _format_time(value: float) -> float | str:
    if value == POS_INF:
        return "inf"
    if value == NEG_INF:
        return "-inf"
    return value


def params_from_mapping(data: Mapping[str, Any], base: ModelParams | None = None) -> ModelParams:
    """Build parameters from a key-value mapping.

    Recognised keys: omega12, omega23, omega (sets both), delta, beta,
    t_start, t_end. Window ends accept the strings "-inf"/"inf".
    Missing keys fall back to ``base`` (or to the unit-parameter defaults).
    """
    known = {"omega", "omega12", "omega23", "delta", "beta", "t_start", "t_end"}
    unknown = set(data) - known
    if unknown:
        raise ParameterError(f"unknown parameter key(s): {', '.join(sorted(unknown))}")
    base = base or ModelParams(1.0, 1.0, 1.0, 1.0)
    fields: dict[str, float] = {}
    if "omega" in data:
        fields["omega12"] = fields["omega23"] = float(data["omega"])
    for key in ("omega12", "omega23", "delta", "beta"):
        if key in data:
            fields[key] = float(data[key])
    for key in ("t_start", "t_end"):
        if key in data:
            fields[key] = _parse_time(data[key])
    return replace(base, **fields)


def load_params(path: str | Path, base: ModelParams | None = None) -> ModelParams:
    """Read parameters from a JSON or YAML file (chosen by suffix)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() in (".yaml", ".yml"):
        import yaml

        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ParameterError(f"{path}: expected a mapping of parameter names to values")
    return params_from_mapping(data, base)
