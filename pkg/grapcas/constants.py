"""
Physical constants, parameter records and the dimensionless (u, t) mapping.

All records are frozen dataclasses holding SI values; the `from_lab_units`
constructors accept the eV / µm / K quantities used in configuration files.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, List, Optional, Tuple

from scipy import constants as sc

from grapcas.errors import DomainError, ValidationError
from grapcas.utils.units import UnitConverter

if TYPE_CHECKING:
    from grapcas.fresnel import CoatedPlate

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "DEFAULT_VF_OVER_C",
    "SEPARATION_RANGE",
    "GrapheneSheet",
    "Scenario",
    "WavePoint",
    "to_dimensionless",
    "from_dimensionless",
    "validate_scenario",
]

logger = logging.getLogger(__name__)

DEFAULT_VF_OVER_C = 1.0 / 300.0

# Separations (m) for which the quadrature settings are tuned
SEPARATION_RANGE = (50e-9, 10e-6)


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA values in SI units; alpha is stored, not recomputed."""

    hbar: float = sc.hbar
    c: float = sc.c
    k_B: float = sc.k
    e_charge: float = sc.e
    alpha: float = sc.fine_structure

    def __post_init__(self):
        for name in ("hbar", "c", "k_B", "e_charge", "alpha"):
            if not getattr(self, name) > 0:
                raise ValueError(f"Physical constant {name} must be positive")


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class GrapheneSheet:
    """
    Material parameters of one graphene coating.

    Attributes:
        delta: Energy gap Δ in J.
        mu: Chemical potential μ in J.
        v_F: Fermi velocity in m/s.
        temperature: Sheet temperature in K.
    """

    delta: float = 0.0
    mu: float = 0.0
    v_F: float = CONSTANTS.c * DEFAULT_VF_OVER_C
    temperature: float = 300.0

    def __post_init__(self):
        violations = []
        for name in ("delta", "mu"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                violations.append(
                    f"{name} must be finite and non-negative, got {value}"
                )
        if not 0 < self.v_F < CONSTANTS.c:
            violations.append(f"v_F must lie in (0, c), got {self.v_F}")
        if not self.temperature > 0:
            violations.append(f"temperature must be positive, got {self.temperature}")
        if violations:
            raise ValidationError(violations)

    @classmethod
    def from_lab_units(
        cls,
        delta_ev: float = 0.0,
        mu_ev: float = 0.0,
        temperature: float = 300.0,
        vf_over_c: float = DEFAULT_VF_OVER_C,
    ) -> "GrapheneSheet":
        return cls(
            delta=UnitConverter.convert_energy(delta_ev, "eV", "J"),
            mu=UnitConverter.convert_energy(mu_ev, "eV", "J"),
            v_F=vf_over_c * CONSTANTS.c,
            temperature=temperature,
        )

    @property
    def gap_frequency(self) -> float:
        """Δ/ħ in rad/s, the lower limit of the thermal integrals."""
        return self.delta / CONSTANTS.hbar

    @property
    def delta_ev(self) -> float:
        return UnitConverter.convert_energy(self.delta, "J", "eV")

    @property
    def mu_ev(self) -> float:
        return UnitConverter.convert_energy(self.mu, "J", "eV")

    def with_temperature(self, temperature: float) -> "GrapheneSheet":
        return replace(self, temperature=temperature)


@dataclass(frozen=True)
class WavePoint:
    """Angular frequency ω (rad/s) and in-plane wave-vector magnitude k (1/m)."""

    omega: float
    k: float


def to_dimensionless(p: WavePoint, a: float) -> Tuple[float, float]:
    """
    Map (ω, k) to u = 2aω/c and t = ck/ω.

    Raises:
        DomainError: If ω = 0, where t is undefined.
    """
    if not p.omega > 0:
        raise DomainError(f"t = ck/omega is undefined for omega = {p.omega}")
    return 2.0 * a * p.omega / CONSTANTS.c, CONSTANTS.c * p.k / p.omega


def from_dimensionless(u: float, t: float, a: float) -> WavePoint:
    """Inverse of `to_dimensionless`: ω = cu/(2a), k = tu/(2a)."""
    return WavePoint(omega=CONSTANTS.c * u / (2.0 * a), k=t * u / (2.0 * a))


@dataclass(frozen=True)
class Scenario:
    """
    Geometry and thermal state of two coated plates.

    Temperatures are in K and the separation in m. The first plate is kept at
    the environment temperature unless `allow_t1_offset` is set.
    """

    separation: float
    t1: float
    t2: float
    t_env: float
    plate1: "CoatedPlate"
    plate2: "CoatedPlate"
    allow_t1_offset: bool = field(default=False)

    @property
    def plates(self) -> Tuple["CoatedPlate", "CoatedPlate"]:
        return self.plate1, self.plate2

    def with_temperatures(self, t1: float, t2: float) -> "Scenario":
        return replace(
            self,
            t1=t1,
            t2=t2,
            plate1=self.plate1.at_temperature(t1),
            plate2=self.plate2.at_temperature(t2),
        )

    def with_separation(self, separation: float) -> "Scenario":
        return replace(self, separation=separation)


def _scenario_violations(s: Scenario) -> List[str]:
    violations = []
    if not (math.isfinite(s.separation) and s.separation > 0):
        violations.append(f"separation must be positive, got {s.separation}")
    elif not SEPARATION_RANGE[0] <= s.separation <= SEPARATION_RANGE[1]:
        lo, hi = SEPARATION_RANGE
        violations.append(
            f"separation {s.separation:.3e} m outside the supported range "
            f"[{lo:.0e}, {hi:.0e}] m"
        )
    for name in ("t1", "t2", "t_env"):
        value = getattr(s, name)
        if not (math.isfinite(value) and value > 0):
            violations.append(f"{name} must be positive, got {value}")
    if not s.allow_t1_offset and s.t1 != s.t_env:
        violations.append(
            f"t1 ({s.t1} K) must equal t_env ({s.t_env} K): the first plate is kept "
            "at the environment temperature (set allow_t1_offset to override)"
        )
    return violations


def validate_scenario(s: Scenario) -> Scenario:
    """
    Check every scenario invariant and return the scenario with plate
    temperatures aligned to t1 and t2.

    Raises:
        ValidationError: Listing each violated field.
    """
    violations = _scenario_violations(s)
    if violations:
        logger.error(f"Scenario validation failed: {violations}")
        raise ValidationError(violations)
    return s.with_temperatures(s.t1, s.t2)
