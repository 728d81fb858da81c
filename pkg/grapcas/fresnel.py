"""
Reflection coefficients of a dielectric half-space, optionally coated with a
graphene sheet, for TM and TE polarizations.

Real frequencies are handled in the dimensionless variables u = 2aω/c and
t = ck/ω; imaginary (Matsubara) frequencies ω = iξ in dimensional form.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Tuple

from grapcas.constants import CONSTANTS, GrapheneSheet, from_dimensionless
from grapcas.errors import DomainError
from grapcas.graphene import (
    ZERO_TENSOR,
    TensorValue,
    pi_local,
    pi_matsubara,
    pi_real_axis,
)
from grapcas.materials.permittivity import PermittivityModel
from grapcas.quadrature import QuadraturePolicy

__all__ = [
    "CoatedPlate",
    "ReflectionPair",
    "reflect_real_axis",
    "reflect_matsubara",
    "d_factor",
]

logger = logging.getLogger(__name__)

_CACHE_SIZE = 1 << 16


@dataclass(frozen=True)
class CoatedPlate:
    """
    Half-space substrate with an optional graphene coating.

    The coating is always kept at the plate temperature. With `local` set the
    coating responds through the spatially local tensor.
    """

    substrate: PermittivityModel
    coating: Optional[GrapheneSheet] = None
    temperature: float = 300.0
    local: bool = False
    tensor_policy: Optional[QuadraturePolicy] = field(default=None, compare=True)

    def __post_init__(self):
        if self.coating is not None and self.coating.temperature != self.temperature:
            object.__setattr__(
                self, "coating", self.coating.with_temperature(self.temperature)
            )

    @property
    def is_bare(self) -> bool:
        return self.coating is None

    def at_temperature(self, temperature: float) -> "CoatedPlate":
        return replace(self, temperature=temperature)

    def as_local(self, local: bool = True) -> "CoatedPlate":
        return replace(self, local=local)

    def bare(self) -> "CoatedPlate":
        return replace(self, coating=None)

    def describe(self) -> str:
        if self.coating is None:
            coating = "bare"
        else:
            coating = (
                f"graphene(delta={self.coating.delta_ev:.3g} eV, "
                f"mu={self.coating.mu_ev:.3g} eV{', local' if self.local else ''})"
            )
        return f"{self.substrate.name} at {self.temperature:g} K, {coating}"


@dataclass(frozen=True)
class ReflectionPair:
    r_tm: complex
    r_te: complex

    def __iter__(self):
        return iter((self.r_tm, self.r_te))


def _decaying_root(z: complex) -> complex:
    """√z on the branch Re ≥ 0, Im ≤ 0 used for both normal wave numbers."""
    z = complex(z)
    return cmath.sqrt(complex(z.real, -abs(z.imag)))


def _real_axis_tensor_over_t2(
    plate: CoatedPlate, u: float, t: float, a: float
) -> TensorValue:
    """(Π₀₀/t², Π/t²) at ω = cu/(2a), k = tu/(2a); t = 0 uses the local limit."""
    point = from_dimensionless(u, t, a)
    sheet = plate.coating
    if t == 0 or plate.local:
        per_k2 = pi_local(point.omega, sheet, policy=plate.tensor_policy)
        scale = (u / (2.0 * a)) ** 2
        return TensorValue(per_k2.pi00_per_k2 * scale, per_k2.pi_per_k2 * scale)
    value = pi_real_axis(point.omega, point.k, sheet, plate.tensor_policy)
    return TensorValue(value.pi00 / (t * t), value.pi / (t * t))


@lru_cache(maxsize=_CACHE_SIZE)
def reflect_real_axis(
    plate: CoatedPlate, u: float, t: float, a: float
) -> ReflectionPair:
    """
    Reflection coefficients at real frequency in the variables (u, t).

    With s = √(t² − 1) and s̃ = √(t² − ε(u)), both on the branch Re ≥ 0,
    Im ≤ 0 (so s = −i√(1 − t²) for propagating waves),

        R_TM = [ħt²u(εs − s̃) + 2a·s·s̃·Π₀₀] / [ħt²u(εs + s̃) + 2a·s·s̃·Π₀₀]
        R_TE = [ħt²u³(s − s̃) − 8a³Π] / [ħt²u³(s + s̃) + 8a³Π]

    evaluated after dividing through by t², so that t = 0 is regular.

    Raises:
        DomainError: For u ≤ 0 or t < 0.
    """
    if not u > 0 or t < 0:
        raise DomainError(
            f"reflect_real_axis needs u > 0 and t >= 0, got ({u}, {t})"
        )
    hbar = CONSTANTS.hbar
    omega = CONSTANTS.c * u / (2.0 * a)
    eps = plate.substrate.eps_real_axis(omega)
    s = _decaying_root(t * t - 1.0)
    s_tilde = _decaying_root(t * t - eps)

    tensor = ZERO_TENSOR
    if plate.coating is not None:
        tensor = _real_axis_tensor_over_t2(plate, u, t, a)

    if math.isinf(abs(tensor.pi00)):
        r_tm = 1.0 + 0j
    else:
        sheet_tm = 2.0 * a * s * s_tilde * tensor.pi00
        r_tm = (hbar * u * (eps * s - s_tilde) + sheet_tm) / (
            hbar * u * (eps * s + s_tilde) + sheet_tm
        )
    sheet_te = 8.0 * a**3 * tensor.pi
    u3 = u**3
    r_te = (hbar * u3 * (s - s_tilde) - sheet_te) / (
        hbar * u3 * (s + s_tilde) + sheet_te
    )
    return ReflectionPair(complex(r_tm), complex(r_te))


def _matsubara_tensor(plate: CoatedPlate, xi: float, k: float) -> TensorValue:
    if plate.local:
        local = pi_local(xi, plate.coating, imaginary=True, policy=plate.tensor_policy)
        return local.at(k)
    return pi_matsubara(xi, k, plate.coating, plate.tensor_policy)


@lru_cache(maxsize=_CACHE_SIZE)
def reflect_matsubara(plate: CoatedPlate, xi: float, k: float) -> ReflectionPair:
    """
    Real reflection coefficients at ω = iξ:

        R_TM = [ħk²(εq − q̃) + q·q̃·Π₀₀] / [ħk²(εq + q̃) + q·q̃·Π₀₀]
        R_TE = [ħk²(q − q̃) − Π] / [ħk²(q + q̃) + Π]

    with q = √(k² + ξ²/c²), q̃ = √(k² + ε(iξ)ξ²/c²).
    """
    if xi < 0 or not k > 0:
        raise DomainError(
            f"reflect_matsubara needs xi >= 0 and k > 0, got ({xi}, {k})"
        )
    hbar, light = CONSTANTS.hbar, CONSTANTS.c
    eps = plate.substrate.eps_imaginary_axis(xi)
    k2 = k * k
    x2 = (xi / light) ** 2
    q = math.sqrt(k2 + x2)
    q_tilde = math.sqrt(k2 + eps * x2)

    pi00 = pi = 0.0
    if plate.coating is not None:
        tensor = _matsubara_tensor(plate, xi, k)
        pi00, pi = tensor.pi00.real, tensor.pi.real

    if math.isinf(pi00):
        r_tm = 1.0
    else:
        r_tm = (hbar * k2 * (eps * q - q_tilde) + q * q_tilde * pi00) / (
            hbar * k2 * (eps * q + q_tilde) + q * q_tilde * pi00
        )
    r_te = (hbar * k2 * (q - q_tilde) - pi) / (hbar * k2 * (q + q_tilde) + pi)
    return ReflectionPair(complex(r_tm), complex(r_te))


def d_factor(
    r1: ReflectionPair, r2: ReflectionPair, u: float, t: float
) -> Tuple[complex, complex]:
    """
    D_κ = 1 − R_κ(T₁)R_κ(T₂)·exp(iu√(1 − t²)) for both polarizations.

    For t > 1 the root is i√(t² − 1) and the exponential decays.
    """
    phase = cmath.exp(1j * u * cmath.sqrt(1.0 - t * t))
    return 1.0 - r1.r_tm * r2.r_tm * phase, 1.0 - r1.r_te * r2.r_te * phase
