"""
grapcas: graphene polarization tensor and nonequilibrium Casimir pressure.

Casimir pressure between two graphene-coated dielectric plates kept at
different temperatures, with the graphene response described by the full
polarization tensor at nonzero temperature.
"""

__version__ = "0.1.0"

from .constants import CONSTANTS, GrapheneSheet, Scenario, validate_scenario
from .fresnel import CoatedPlate, reflect_matsubara, reflect_real_axis
from .graphene import pi_local, pi_matsubara, pi_real_axis
from .pressure import (
    PressureBreakdown,
    PressureSettings,
    delta_p_neq,
    p_classical,
    p_eq,
    p_neq,
    p_qeq,
    rel_error_local,
)

# Export all public symbols
__all__ = [
    "__version__",
    "CONSTANTS",
    "GrapheneSheet",
    "Scenario",
    "validate_scenario",
    "CoatedPlate",
    "reflect_matsubara",
    "reflect_real_axis",
    "pi_local",
    "pi_matsubara",
    "pi_real_axis",
    "PressureBreakdown",
    "PressureSettings",
    "delta_p_neq",
    "p_classical",
    "p_eq",
    "p_neq",
    "p_qeq",
    "rel_error_local",
]
