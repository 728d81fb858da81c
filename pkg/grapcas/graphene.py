"""
Polarization tensor of a gapped, doped graphene sheet at finite temperature.

The tensor is reported through the pair (Π₀₀, Π), where Π combines the trace
and the 00 component. Both are split into a zero-temperature part, known in
closed form, and a thermal part given by one-dimensional integrals over the
Fermi-weighted variable v ∈ [Δ/ħ, ∞).

Notation used throughout: K = v_F k, g = Δ/ħ, D² = ω² − K².
All quantities are in SI units; frequencies in rad/s.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.special import expit

from grapcas.constants import CONSTANTS, GrapheneSheet
from grapcas.errors import DomainError
from grapcas.quadrature import (
    QuadraturePolicy,
    Tail,
    integrate,
    integrate_semi_infinite,
)

__all__ = [
    "DEFAULT_TENSOR_POLICY",
    "LOCAL_SWITCH_RATIO",
    "TensorValue",
    "LocalTensor",
    "KinematicRegion",
    "BranchedRoot",
    "psi",
    "classify",
    "branched_root",
    "x1",
    "x2",
    "thermal_weight",
    "pi_zero_temperature",
    "pi_thermal",
    "pi_real_axis",
    "pi_matsubara",
    "pi_local",
    "conductivity_ratio",
]

logger = logging.getLogger(__name__)

DEFAULT_TENSOR_POLICY = QuadraturePolicy(rel_tol=1e-7, max_subdivisions=400)

# Below this value of v_F k / |ω| the thermal part is taken from its local
# (k → 0) expansion; the full kernels lose digits to cancellation there.
LOCAL_SWITCH_RATIO = 1e-4

_PSI_SERIES_THRESHOLD = 10.0
_PSI_SERIES = np.array([4.0 * m / ((2 * m - 1) * (2 * m + 1)) for m in range(1, 15)])

_CACHE_SIZE = 1 << 16

Number = Union[float, complex]


@dataclass(frozen=True)
class TensorValue:
    """Π₀₀ (J·s/m) and Π (J·s/m³) at one point."""

    pi00: complex
    pi: complex

    def __add__(self, other: "TensorValue") -> "TensorValue":
        return TensorValue(self.pi00 + other.pi00, self.pi + other.pi)

    @property
    def is_real(self) -> bool:
        return self.pi00.imag == 0.0 and self.pi.imag == 0.0


ZERO_TENSOR = TensorValue(0j, 0j)


class KinematicRegion(Enum):
    EVANESCENT = "evanescent"
    SUBTHRESHOLD = "subthreshold"
    ABOVE_THRESHOLD = "above_threshold"


@dataclass(frozen=True)
class BranchedRoot:
    """√(ω² − v_F²k²): i√(v_F²k² − ω²) below the light cone of graphene."""

    value: complex


def psi(x: Number) -> Number:
    """
    Ψ(x) = x + (1 − x²)·arctan(1/x), with Ψ(0) = π/2.

    Large arguments use the expansion 4/(3x) − 8/(15x³) + ... to avoid the
    cancellation between x and (1 − x²)·arctan(1/x).

    Raises:
        DomainError: At the arctan poles x = ±i.
    """
    if x == 0:
        return math.pi / 2.0
    if isinstance(x, complex):
        if x == 1j or x == -1j:
            raise DomainError(f"Psi is singular at x = {x}")
        if abs(x) > _PSI_SERIES_THRESHOLD:
            return complex(_psi_series(x, alternating=True))
        return x + (1.0 - x * x) * cmath.atan(1.0 / x)
    if abs(x) > _PSI_SERIES_THRESHOLD:
        return float(_psi_series(x, alternating=True))
    return x + (1.0 - x * x) * math.atan(1.0 / x)


def _psi_series(x: Number, alternating: bool) -> Number:
    inverse_square = 1.0 / (x * x)
    term = 1.0 / x
    total = 0.0
    sign = 1.0
    for coefficient in _PSI_SERIES:
        total += sign * coefficient * term
        term *= inverse_square
        if alternating:
            sign = -sign
    return total


def _psi_above_light_cone(y: float) -> complex:
    """
    Ψ(iy)/i for real y ≥ 0, on the retarded branch.

    Equals y − (1 + y²)·artanh(1/y) above y = 1 and picks up −iπ(1 + y²)/2 below.
    """
    if y > _PSI_SERIES_THRESHOLD:
        return complex(-_psi_series(y, alternating=False))
    if y > 1.0:
        return complex(y - (1.0 + y * y) * math.atanh(1.0 / y))
    if y == 1.0:
        raise DomainError("The tensor diverges at the pair-creation threshold")
    return complex(y - (1.0 + y * y) * math.atanh(y), -(1.0 + y * y) * math.pi / 2.0)


def classify(omega: float, k: float, sheet: GrapheneSheet) -> KinematicRegion:
    """Kinematic region of (ω, k); boundary points belong to the ≥ side."""
    if omega < 0 or k < 0:
        raise DomainError(f"omega and k must be non-negative, got ({omega}, {k})")
    if omega == 0 and k == 0:
        raise DomainError("The kinematic region is undefined at omega = k = 0")
    K = sheet.v_F * k
    if omega < K:
        return KinematicRegion.EVANESCENT
    if math.sqrt(omega * omega - K * K) < sheet.gap_frequency:
        return KinematicRegion.SUBTHRESHOLD
    return KinematicRegion.ABOVE_THRESHOLD


def branched_root(omega: float, k: float, sheet: GrapheneSheet) -> BranchedRoot:
    K = sheet.v_F * k
    if omega < K:
        return BranchedRoot(complex(0.0, math.sqrt(K * K - omega * omega)))
    return BranchedRoot(complex(math.sqrt(omega * omega - K * K), 0.0))


def _root_of_product(x: np.ndarray, omega: float, K: float, g: float) -> np.ndarray:
    """√((ω² − K²)(x² − K²A)) as the product of two branched roots."""
    d2 = omega * omega - K * K
    if d2 == 0:
        raise DomainError("A(omega, k) is undefined at omega = v_F k")
    inner = x * x - K * K * (1.0 - g * g / d2)
    outer = math.sqrt(d2) if d2 > 0 else 1j * math.sqrt(-d2)
    magnitude = np.sqrt(np.abs(inner))
    return outer * np.where(inner >= 0, magnitude, 1j * magnitude)


def _ratio(numerator: np.ndarray, root: np.ndarray):
    if np.any((root == 0) & (numerator != 0)):
        raise DomainError("x lies on the singular abscissa x² = v_F²k²A")
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.where(root == 0, 0j, numerator / np.where(root == 0, 1.0, root))
    return complex(value) if value.ndim == 0 else value


def x1(x, omega: float, k: float, sheet: GrapheneSheet, root=None):
    """
    X₁(x) = (x² − v_F²k²)/√((ω² − v_F²k²)(x² − v_F²k²A)).

    `root` overrides the square root in the denominator; by default it is the
    product of the two branched roots (each i√|·| for a negative argument).
    Where numerator and root vanish together the limit 0 is returned.
    """
    x = np.asarray(x, dtype=float)
    K = sheet.v_F * k
    if root is None:
        root = _root_of_product(x, omega, K, sheet.gap_frequency)
    return _ratio(x * x - K * K + 0j, np.asarray(root))


def x2(x, omega: float, k: float, sheet: GrapheneSheet, root=None):
    """X₂(x) = [(ω² − v_F²k²)x² + v_F²k²Δ²/ħ²]/√(...), same root as `x1`."""
    x = np.asarray(x, dtype=float)
    K = sheet.v_F * k
    g = sheet.gap_frequency
    if root is None:
        root = _root_of_product(x, omega, K, g)
    numerator = (omega * omega - K * K) * x * x + K * K * g * g + 0j
    return _ratio(numerator, np.asarray(root))


def thermal_weight(v, sheet: GrapheneSheet):
    """Sum of the electron and hole Fermi factors at energy ħv/2."""
    hbar, k_B = CONSTANTS.hbar, CONSTANTS.k_B
    scale = 2.0 * k_B * sheet.temperature
    v = np.asarray(v, dtype=float)
    return expit(-(hbar * v + 2.0 * sheet.mu) / scale) + expit(
        -(hbar * v - 2.0 * sheet.mu) / scale
    )


def _zero_temperature_coefficients(d2: float, g: float) -> Tuple[complex, complex]:
    """
    Coefficients (c00, c) with Π₀₀⁽⁰⁾ = 2αħck²·c00 and Π⁽⁰⁾ = (2αħk²/c)·c.

    `d2` is ω² − K² for any point on the real or imaginary frequency axis.
    """
    if d2 < 0:
        R = math.sqrt(-d2)
        value = psi(g / R)
        return complex(value / R), complex(R * value)
    if d2 == 0:
        if g == 0:
            raise DomainError(
                "The gapless tensor diverges on the light cone omega = v_F k"
            )
        return complex(4.0 / (3.0 * g)), 0j
    s = math.sqrt(d2)
    h = _psi_above_light_cone(g / s)
    return -h / s, s * h


def _tensor_from_coefficients(c00: complex, c: complex, k: float) -> TensorValue:
    alpha, hbar, light = CONSTANTS.alpha, CONSTANTS.hbar, CONSTANTS.c
    k2 = k * k
    return TensorValue(
        pi00=2.0 * alpha * hbar * light * k2 * c00,
        pi=2.0 * alpha * hbar * k2 / light * c,
    )


def pi_zero_temperature(omega: float, k: float, sheet: GrapheneSheet) -> TensorValue:
    """
    Zero-temperature, undoped part of the tensor on the real frequency axis.

    Real below the light cone of graphene and below the pair-creation
    threshold; complex with Im Π₀₀ ≥ 0 and Im Π ≤ 0 above it.

    Raises:
        DomainError: At ω = k = 0, on the light cone of a gapless sheet and
            exactly at the threshold, where the tensor diverges.
    """
    if k == 0:
        if omega == 0:
            raise DomainError("The tensor is undefined at omega = k = 0")
        return ZERO_TENSOR
    K = sheet.v_F * k
    c00, c = _zero_temperature_coefficients(
        omega * omega - K * K, sheet.gap_frequency
    )
    return _tensor_from_coefficients(c00, c, k)


def _fermi_tail(sheet: GrapheneSheet) -> Tail:
    rate = CONSTANTS.hbar / (2.0 * CONSTANTS.k_B * sheet.temperature)
    return Tail.exponential(rate, start=max(sheet.gap_frequency, _fermi_edge(sheet)))


def _fermi_edge(sheet: GrapheneSheet) -> float:
    return 2.0 * sheet.mu / CONSTANTS.hbar


def _thermal_prefactors(k: float, sheet: GrapheneSheet) -> Tuple[float, float]:
    alpha, hbar, light = CONSTANTS.alpha, CONSTANTS.hbar, CONSTANTS.c
    v_F2 = sheet.v_F * sheet.v_F
    return 4.0 * alpha * hbar * light / v_F2, 4.0 * alpha * hbar / (light * v_F2)


def _real_axis_kernel(omega: float, k: float, sheet: GrapheneSheet) -> Callable:
    """
    Brackets of the Π₀₀ and Π thermal integrands at real ω ≥ 0, built from
    X₁ and X₂ at x = v ± ω.

    For λ = ±1 the root S_λ of P = a² − b², a = ω² − K² + λωv,
    b = K√(v² − g²), carries the sign of a where P > 0. Where P < 0 it is
    +i√|P| except for λ = −1 beyond v = 2ω, which lies on the other side of
    the cut. The λ-sum is then taken without sign. P equals the product under
    the root of X₁ and X₂, so S_λ is passed to them as their root.
    """
    K = sheet.v_F * k
    g = sheet.gap_frequency
    d2 = omega * omega - K * K

    def brackets(v: np.ndarray) -> np.ndarray:
        b = K * np.sqrt(np.maximum(v * v - g * g, 0.0))
        sum00 = np.zeros(v.shape, dtype=complex)
        sum_pi = np.zeros(v.shape, dtype=complex)
        for lam in (1.0, -1.0):
            x = v + lam * omega
            a = d2 + lam * omega * v
            p = (a - b) * (a + b)
            r = np.sqrt(np.abs(p))
            side = 1.0 if lam > 0 else np.where(v < 2.0 * omega, 1.0, -1.0)
            root = np.where(p > 0, np.sign(a) * r, 1j * side * r)
            sum00 += x1(x, omega, k, sheet, root=root)
            sum_pi += x2(x, omega, k, sheet, root=root)
        return np.stack([1.0 - 0.5 * sum00, omega * omega - 0.5 * sum_pi], axis=-1)

    return brackets


def _matsubara_kernel(xi: float, K: float, g: float) -> Callable:
    """Brackets at ω = iξ, ξ > 0; principal roots of a ∓ b, real part kept."""
    d2 = -xi * xi - K * K
    gap_term = K * K * g * g

    def brackets(v: np.ndarray) -> np.ndarray:
        b = K * np.sqrt(np.maximum(v * v - g * g, 0.0))
        sum00 = np.zeros(v.shape, dtype=complex)
        sum_pi = np.zeros(v.shape, dtype=complex)
        for lam in (1.0, -1.0):
            x = v + 1j * lam * xi
            a = d2 + 1j * lam * xi * v
            root = np.sqrt(a - b) * np.sqrt(a + b)
            sum00 += (x * x - K * K) / root
            sum_pi += (d2 * x * x + gap_term) / root
        return np.stack(
            [(1.0 - 0.5 * sum00).real, (-xi * xi - 0.5 * sum_pi).real], axis=-1
        )

    return brackets


def _singular_abscissas(omega: float, K: float, g: float) -> Tuple[float, ...]:
    """Values of v where one of the roots S_λ vanishes."""
    d2 = omega * omega - K * K
    if d2 == 0:
        return ()
    critical2 = K * K * (1.0 - g * g / d2)
    if critical2 <= 0:
        return ()
    critical = math.sqrt(critical2)
    candidates = (critical - omega, critical + omega, omega - critical)
    return tuple(sorted({v for v in candidates if v > g}))


def _integrate_thermal(
    brackets: Callable,
    sheet: GrapheneSheet,
    policy: QuadraturePolicy,
    singular: Tuple[float, ...] = (),
    breakpoints: Tuple[float, ...] = (),
) -> np.ndarray:
    g = sheet.gap_frequency
    edge = _fermi_edge(sheet)
    knots = tuple(p for p in (*breakpoints, edge) if p > g)
    thermal_policy = policy.with_options(
        breakpoints=knots, singular_points=singular, tail=_fermi_tail(sheet)
    )

    def integrand(v: np.ndarray) -> np.ndarray:
        return thermal_weight(v, sheet)[:, None] * brackets(v)

    value, _ = integrate_semi_infinite(integrand, g, thermal_policy)
    return value


def pi_thermal(
    omega: float,
    k: float,
    sheet: GrapheneSheet,
    policy: Optional[QuadraturePolicy] = None,
) -> TensorValue:
    """
    Thermal and doping part of the tensor on the real frequency axis.

    One expression covers all kinematic regions; the singular abscissas of
    the kernel are passed to the quadrature as inverse-square-root points.

    Raises:
        DomainError: On the light cone of a gapless sheet.
        QuadratureError: If the v-integral does not converge.
    """
    policy = policy or DEFAULT_TENSOR_POLICY
    if omega < 0 or k < 0:
        raise DomainError(f"omega and k must be non-negative, got ({omega}, {k})")
    if k == 0:
        return ZERO_TENSOR
    K = sheet.v_F * k
    g = sheet.gap_frequency
    if K == omega and g == 0:
        raise DomainError("The gapless tensor diverges on the light cone omega = v_F k")
    if K < LOCAL_SWITCH_RATIO * omega:
        j = _local_thermal_integral(omega, sheet, policy)
        return _local_thermal_tensor(omega * omega, j, k)

    singular = _singular_abscissas(omega, K, g)
    value = _integrate_thermal(
        _real_axis_kernel(omega, k, sheet), sheet, policy, singular
    )
    c00, c = _thermal_prefactors(k, sheet)
    return TensorValue(pi00=complex(c00 * value[0]), pi=complex(c * value[1]))


@lru_cache(maxsize=_CACHE_SIZE)
def pi_real_axis(
    omega: float,
    k: float,
    sheet: GrapheneSheet,
    policy: Optional[QuadraturePolicy] = None,
) -> TensorValue:
    """Full tensor at real ω: zero-temperature plus thermal part."""
    total = pi_zero_temperature(omega, k, sheet) + pi_thermal(omega, k, sheet, policy)
    logger.debug(f"Tensor at omega={omega:.6e}, k={k:.6e}: {total}")
    return total


@lru_cache(maxsize=_CACHE_SIZE)
def pi_matsubara(
    xi: float,
    k: float,
    sheet: GrapheneSheet,
    policy: Optional[QuadraturePolicy] = None,
) -> TensorValue:
    """
    Full tensor at the imaginary frequency ω = iξ; both components are real.

    ξ = 0 is the static limit of the real-axis expressions.
    """
    policy = policy or DEFAULT_TENSOR_POLICY
    if xi < 0 or k <= 0:
        raise DomainError(f"pi_matsubara needs xi >= 0 and k > 0, got ({xi}, {k})")
    K = sheet.v_F * k
    g = sheet.gap_frequency
    c00, c = _zero_temperature_coefficients(-xi * xi - K * K, g)
    zero_t = _tensor_from_coefficients(c00, c, k)

    if xi > 0 and K < LOCAL_SWITCH_RATIO * xi:
        j = _local_matsubara_integral(xi, sheet, policy)
        thermal = _local_thermal_tensor(-xi * xi, complex(j), k)
    else:
        critical = math.sqrt(K * K + g * g)
        if xi == 0:
            kernel = _real_axis_kernel(0.0, k, sheet)
            value = _integrate_thermal(kernel, sheet, policy, singular=(critical,))
        else:
            kernel = _matsubara_kernel(xi, K, g)
            value = _integrate_thermal(kernel, sheet, policy, breakpoints=(critical,))
        p00, p = _thermal_prefactors(k, sheet)
        thermal = TensorValue(complex(p00 * value[0].real), complex(p * value[1].real))
    return zero_t + thermal


def _local_thermal_tensor(omega2: float, j: complex, k: float) -> TensorValue:
    """Thermal local tensor from J; `omega2` is ω² (−ξ² on the imaginary axis)."""
    alpha, hbar, light = CONSTANTS.alpha, CONSTANTS.hbar, CONSTANTS.c
    k2 = k * k
    return TensorValue(
        pi00=complex(-2.0 * alpha * hbar * light * k2 / omega2 * j),
        pi=complex(2.0 * alpha * hbar * k2 / light * j),
    )


@lru_cache(maxsize=_CACHE_SIZE)
def _local_thermal_integral(
    omega: float, sheet: GrapheneSheet, policy: QuadraturePolicy
) -> complex:
    """
    J(ω) = PV∫ w(v)(v² + g²)/(v² − ω²) dv + iπw(ω)(ω² + g²)/(2ω) for ω > g.

    The principal value is taken by subtracting the pole on the window
    [g, 2ω − g], symmetric about ω.
    """
    g = sheet.gap_frequency
    edge = _fermi_edge(sheet)
    tail = _fermi_tail(sheet)
    semi_policy = policy.with_options(
        breakpoints=tuple(p for p in (edge,) if p > g), tail=tail
    )

    def smooth(v):
        return thermal_weight(v, sheet) * (v * v + g * g) / (v + omega)

    if omega < g:
        value, _ = integrate_semi_infinite(
            lambda v: smooth(v) / (v - omega), g, semi_policy
        )
        return complex(value)
    if omega == g:
        raise DomainError("The local tensor diverges at the pair-creation threshold")

    window = 2.0 * omega - g
    at_pole = float(smooth(np.array([omega]))[0])
    window_policy = policy.with_options(
        breakpoints=tuple(p for p in (omega, edge) if g < p < window)
    )
    inner, _ = integrate(
        lambda v: (smooth(v) - at_pole) / (v - omega), g, window, window_policy
    )
    outer, _ = integrate_semi_infinite(
        lambda v: smooth(v) / (v - omega),
        window,
        semi_policy.with_options(
            breakpoints=tuple(p for p in (edge,) if p > window)
        ),
    )
    absorption = math.pi * at_pole
    return complex(inner + outer, absorption)


@lru_cache(maxsize=_CACHE_SIZE)
def _local_matsubara_integral(
    xi: float, sheet: GrapheneSheet, policy: QuadraturePolicy
) -> float:
    """∫ w(v)(v² + g²)/(v² + ξ²) dv over v ≥ g."""
    g = sheet.gap_frequency
    edge = _fermi_edge(sheet)
    semi_policy = policy.with_options(
        breakpoints=tuple(p for p in (edge,) if p > g), tail=_fermi_tail(sheet)
    )
    value, _ = integrate_semi_infinite(
        lambda v: thermal_weight(v, sheet) * (v * v + g * g) / (v * v + xi * xi),
        g,
        semi_policy,
    )
    return float(value)


@dataclass(frozen=True)
class LocalTensor:
    """
    Spatially local tensor at one frequency.

    The k-dependence of the local limit is the explicit k² prefactor, so the
    record stores Π₀₀/k² and Π/k².
    """

    pi00_per_k2: complex
    pi_per_k2: complex

    def at(self, k: float) -> TensorValue:
        k2 = k * k
        return TensorValue(self.pi00_per_k2 * k2, self.pi_per_k2 * k2)


@lru_cache(maxsize=_CACHE_SIZE)
def pi_local(
    frequency: float,
    sheet: GrapheneSheet,
    imaginary: bool = False,
    policy: Optional[QuadraturePolicy] = None,
) -> LocalTensor:
    """
    Local (v_F k/ω → 0) tensor at ω = `frequency`, or at ω = i·`frequency`
    when `imaginary` is set.

    At zero frequency, shared by both axes, Π/k² stays finite while Π₀₀/k²
    is infinite whenever the sheet carries thermal or doped carriers; for an
    empty gapped sheet it tends to 8αħc/(3g).
    """
    policy = policy or DEFAULT_TENSOR_POLICY
    if frequency < 0:
        raise DomainError(f"frequency must be non-negative, got {frequency}")
    alpha, hbar, light = CONSTANTS.alpha, CONSTANTS.hbar, CONSTANTS.c
    g = sheet.gap_frequency

    if frequency == 0:
        j = _local_matsubara_integral(0.0, sheet, policy)
        pi_per_k2 = complex(2.0 * alpha * hbar / light * j)
        if j > 0 or g == 0:
            return LocalTensor(complex(math.inf), pi_per_k2)
        return LocalTensor(complex(8.0 * alpha * hbar * light / (3.0 * g)), pi_per_k2)

    if imaginary:
        omega2 = -frequency * frequency
        j = complex(_local_matsubara_integral(frequency, sheet, policy))
    else:
        omega2 = frequency * frequency
        j = _local_thermal_integral(frequency, sheet, policy)
    c00, c = _zero_temperature_coefficients(omega2, g)
    zero_t = _tensor_from_coefficients(c00, c, 1.0)
    thermal = _local_thermal_tensor(omega2, j, 1.0)
    total = zero_t + thermal
    return LocalTensor(total.pi00, total.pi)


def conductivity_ratio(
    omega: float, sheet: GrapheneSheet, policy: Optional[QuadraturePolicy] = None
) -> complex:
    """
    Sheet conductivity σ(ω)/σ₀ with σ₀ = e²/(4ħ), from the local tensor.

    Equals 1 for a pristine sheet at zero temperature; its real part is
    tanh(ħω/4k_BT) when Δ = μ = 0.
    """
    if not omega > 0:
        raise DomainError(f"conductivity needs omega > 0, got {omega}")
    local = pi_local(omega, sheet, policy=policy)
    scale = 1j * math.pi * CONSTANTS.alpha * CONSTANTS.hbar * CONSTANTS.c
    return complex(omega * local.pi00_per_k2 / scale)
