"""Finite-duration three-state Demkov-Osherov level-crossing model."""

from .model import ModelParams, hamiltonian_at, crossing_times, validate
from .spectral import AdiabaticFrame, eigenvalues, frame_at
from .lz import LZNode, make_node
from .propagator import analytic_adiabatic_propagator, diabatic_propagator, phase_integrals
from .integrator import StateVector, Trajectory, integrate, numeric_propagator
from .tables import ProbabilitySplit, TransitionTable

__version__ = "0.1.0"

__all__ = [
    "AdiabaticFrame",
    "LZNode",
    "ModelParams",
    "ProbabilitySplit",
    "StateVector",
    "Trajectory",
    "TransitionTable",
    "analytic_adiabatic_propagator",
    "crossing_times",
    "diabatic_propagator",
    "eigenvalues",
    "frame_at",
    "hamiltonian_at",
    "integrate",
    "make_node",
    "numeric_propagator",
    "phase_integrals",
    "validate",
]
