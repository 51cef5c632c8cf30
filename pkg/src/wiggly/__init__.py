"""Effective kinetic relations and contact potentials for gradient flows on wiggly energies."""

from .contact import (ContactEvaluation, M1_expansion, M_cell_direct, M_density, M_lagrange,
                      M_weak, M_zero, WFunction)
from .flow import FlowControls, Trajectory, integrate_effective, integrate_wiggly
from .kinetics import KineticRelation
from .landscape import EnergyLandscape, PiecewiseLinearLoad
from .potentials import DissipationPotential
from .profiles import WigglyProfile, two_valued

__all__ = [
    "ContactEvaluation",
    "DissipationPotential",
    "EnergyLandscape",
    "FlowControls",
    "KineticRelation",
    "M1_expansion",
    "M_cell_direct",
    "M_density",
    "M_lagrange",
    "M_weak",
    "M_zero",
    "PiecewiseLinearLoad",
    "Trajectory",
    "WFunction",
    "WigglyProfile",
    "integrate_effective",
    "integrate_wiggly",
    "two_valued",
]
