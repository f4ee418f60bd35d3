"""Result containers shared by the analytic and numerical paths."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("exact-DO", "finite-avg", "finite-full", "DO-time-avg", "DO-time", "numeric")

# Asymptotic formulas may step slightly outside [0, 1] beyond their validity range.
BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class TransitionTable:
    """P[m, n] is the probability of psi_{m+1} -> psi_{n+1}."""

    P: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown table kind {self.kind!r}")
        object.__setattr__(self, "P", np.asarray(self.P, dtype=float).reshape(3, 3))

    def __getitem__(self, mn):
        """1-based access: ``table[3, 1]`` is P(3 -> 1)."""
        m, n = mn
        return float(self.P[m - 1, n - 1])

    @property
    def row_sums(self) -> np.ndarray:
        return self.P.sum(axis=1)

    @property
    def out_of_bounds(self) -> bool:
        """True if any entry leaves [0, 1] by more than the slack (flagged, never clamped)."""
        return bool(np.any(self.P < -BOUND_SLACK) or np.any(self.P > 1 + BOUND_SLACK))

    def format(self, precision: int = 6) -> str:
        labels = ["psi1", "psi2", "psi3"]
        width = precision + 8
        lines = [" " * 8 + "".join(f"{'-> ' + l:>{width}}" for l in labels)]
        for m, row in enumerate(self.P):
            lines.append(f"{labels[m]:<8}" + "".join(f"{v:>{width}.{precision}g}" for v in row))
        return "\n".join(lines)


@dataclass(frozen=True)
class ProbabilitySplit:
    average: float
    oscillating: float

    @property
    def total(self) -> float:
        return self.average + self.oscillating
