"""
Casimir pressure between two coated plates held at different temperatures.

The nonequilibrium pressure is split into a quasi-equilibrium part, a sum over
the Matsubara frequencies of both plate temperatures, and a proper
nonequilibrium part, a real-frequency double integral driven by the difference
of the Bose factors of the plates. Negative pressures are attractive.

Real-frequency integrals use u = 2aω/c and t = ck/ω. Matsubara k-integrals
use y = 2aq with q = √(k² + ξ²/c²).
"""

import logging
import math
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, Iterator, NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy import special

from grapcas.constants import CONSTANTS, Scenario
from grapcas.errors import DomainError, ValidationError
from grapcas.fresnel import CoatedPlate, d_factor, reflect_matsubara, reflect_real_axis
from grapcas.quadrature import (
    QuadraturePolicy,
    Tail,
    integrate,
    integrate_semi_infinite,
    sum_until_converged,
)

__all__ = [
    "PressureSettings",
    "PressureBreakdown",
    "LocalErrors",
    "EvaluationTally",
    "tally",
    "DEFAULT_SETTINGS",
    "bose_factor",
    "trilog",
    "delta_p_neq",
    "p_qeq",
    "p_neq",
    "p_eq",
    "p_classical",
    "rel_error_local",
    "local_error_eq",
    "local_error_neq",
]

logger = logging.getLogger(__name__)

MATSUBARA_REL_TOL = 1e-10
MATSUBARA_MAX_TERMS = 20000

# |D|² is never taken below D_FLOOR²
D_FLOOR = 1e-12

# Evanescent integrals stop at s = √(t² − 1) = EVANESCENT_SPAN/u
EVANESCENT_SPAN = 50.0

_LI3_DIRECT_LIMIT = 0.5
_LI3_TERMS = 40


@dataclass(frozen=True)
class PressureSettings:
    """
    Numerical settings of one pressure evaluation.

    Attributes:
        quadrature: Policy of the k-, u- and t-integrals.
        matsubara_rel_tol: Relative size below which Matsubara terms count as
            negligible.
        matsubara_max_terms: Term budget of each Matsubara sum.
        matsubara_min_terms: Terms every Matsubara sum takes before its
            convergence test applies; 0 leaves the floor to the separation.
    """

    quadrature: QuadraturePolicy = field(
        default_factory=lambda: QuadraturePolicy(rel_tol=1e-7, max_subdivisions=400)
    )
    matsubara_rel_tol: float = MATSUBARA_REL_TOL
    matsubara_max_terms: int = MATSUBARA_MAX_TERMS
    matsubara_min_terms: int = 0

    def __post_init__(self):
        violations = []
        if not 0 < self.matsubara_rel_tol <= 1e-2:
            violations.append(
                f"matsubara_rel_tol must lie in (0, 1e-2], got {self.matsubara_rel_tol}"
            )
        if int(self.matsubara_max_terms) < 1:
            violations.append(
                f"matsubara_max_terms must be positive, got {self.matsubara_max_terms}"
            )
        if int(self.matsubara_min_terms) < 0:
            violations.append(
                f"matsubara_min_terms must be >= 0, got {self.matsubara_min_terms}"
            )
        if violations:
            raise ValidationError(violations)

    @classmethod
    def from_config(cls, section: Dict[str, Any]) -> "PressureSettings":
        """Build from the `quadrature` section of a configuration."""
        policy = QuadraturePolicy(
            rel_tol=float(section.get("rel_tol", 1e-7)),
            abs_tol=float(section.get("abs_tol", 0.0)),
            max_subdivisions=int(section.get("max_subdivisions", 400)),
        )
        return cls(
            quadrature=policy,
            matsubara_rel_tol=float(
                section.get("matsubara_rel_tol", MATSUBARA_REL_TOL)
            ),
            matsubara_max_terms=int(
                section.get("matsubara_max_terms", MATSUBARA_MAX_TERMS)
            ),
            matsubara_min_terms=int(section.get("matsubara_min_terms", 0)),
        )


DEFAULT_SETTINGS = PressureSettings()

Settings = Union[PressureSettings, QuadraturePolicy, None]


def _settings(quad: Settings) -> PressureSettings:
    if quad is None:
        return DEFAULT_SETTINGS
    if isinstance(quad, QuadraturePolicy):
        return PressureSettings(quadrature=quad)
    return quad


@dataclass(frozen=True)
class PressureBreakdown:
    """
    Nonequilibrium pressure and its two contributions, in Pa.

    `equilibrium_half_sum` is ½[P_eq(T₁) + P_eq(T₂)], filled in for bare plates
    whose response does not depend on temperature.
    """

    p_qeq: float
    delta_p_neq: float
    p_neq: float
    matsubara_terms_used: int
    quadrature_error_estimate: float
    equilibrium_half_sum: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class LocalErrors(NamedTuple):
    """Relative errors (P_loc − P)/P of the local approximation."""

    delta_eq: float
    delta_neq: float


class _Estimate(NamedTuple):
    value: float
    error: float
    terms: int = 0


@dataclass
class EvaluationTally:
    """Matsubara terms and error estimates (Pa) of the pressures evaluated so far."""

    matsubara_terms: int = 0
    error_estimate: float = 0.0
    pressures: int = 0


_ACTIVE_TALLY: ContextVar[Optional[EvaluationTally]] = ContextVar(
    "grapcas_tally", default=None
)


@contextmanager
def tally() -> Iterator[EvaluationTally]:
    """
    Count the work of every pressure evaluated inside the block.

    Tallies are per context, so worker processes and threads keep their own.
    """
    current = EvaluationTally()
    token = _ACTIVE_TALLY.set(current)
    try:
        yield current
    finally:
        _ACTIVE_TALLY.reset(token)


def _record(estimate: _Estimate) -> _Estimate:
    current = _ACTIVE_TALLY.get()
    if current is not None:
        current.matsubara_terms += estimate.terms
        current.error_estimate += abs(estimate.error)
        current.pressures += 1
    return estimate


def bose_factor(u, temperature: float, a: float):
    """
    n(u, T) = 1/(exp(ħcu/(2ak_BT)) − 1), vectorized over u > 0.

    Raises:
        DomainError: For u ≤ 0 or T ≤ 0.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or not temperature > 0:
        raise DomainError(f"bose_factor needs u > 0 and T > 0, got T={temperature}")
    x = CONSTANTS.hbar * CONSTANTS.c * u / (2.0 * a * CONSTANTS.k_B * temperature)
    with np.errstate(over="ignore"):
        value = 1.0 / np.expm1(x)
    return float(value) if value.ndim == 0 else value


def trilog(z: float) -> float:
    """
    Li₃(z) for real z ∈ [−1, 1].

    The power series is used for |z| ≤ 1/2; closer to 1 the expansion in
    ln z converges geometrically, and negative arguments go through
    Li₃(−x) = Li₃(x²)/4 − Li₃(x).
    """
    if not -1.0 <= z <= 1.0:
        raise DomainError(f"trilog is implemented for z in [-1, 1], got {z}")
    if z < 0:
        return 0.25 * trilog(z * z) - trilog(-z)
    if z <= _LI3_DIRECT_LIMIT:
        total, power = 0.0, 1.0
        for n in range(1, 200):
            power *= z
            term = power / n**3
            total += term
            if term < 1e-17 * total:
                break
        return total
    mu = math.log(z)
    if mu == 0.0:
        return float(special.zeta(3.0))
    total = float(special.zeta(3.0)) + math.pi**2 / 6.0 * mu
    total += 0.5 * mu * mu * (1.5 - math.log(-mu))
    power = 0.5 * mu * mu
    for n in range(3, _LI3_TERMS):
        power *= mu / n
        total += float(special.zeta(3.0 - n)) * power
    return total


def p_classical(a: float, temperature: float, eps_static: float) -> float:
    """
    Classical limit −k_BT/(8πa³)·Li₃(r₀²) of the equilibrium pressure with
    r₀ = (ε₀ − 1)/(ε₀ + 1).
    """
    if not (a > 0 and temperature > 0):
        raise DomainError(f"p_classical needs a, T > 0, got ({a}, {temperature})")
    if not eps_static >= 1:
        raise DomainError(f"eps_static must be at least 1, got {eps_static}")
    r0 = (eps_static - 1.0) / (eps_static + 1.0)
    return -CONSTANTS.k_B * temperature / (8.0 * math.pi * a**3) * trilog(r0 * r0)


# ---------------------------------------------------------------------------
# Quasi-equilibrium contribution


def _matsubara_step(a: float, temperature: float) -> float:
    """Spacing of y_min = 2aξ_l/c between consecutive Matsubara indices."""
    thermal = CONSTANTS.k_B * temperature / (CONSTANTS.hbar * CONSTANTS.c)
    return 4.0 * math.pi * a * thermal


def _k_integral(
    xi: float,
    a: float,
    plate1: CoatedPlate,
    plate2: CoatedPlate,
    policy: QuadraturePolicy,
) -> _Estimate:
    """
    ∫ q k dk Σ_κ R₁R₂/(e^{2qa} − R₁R₂) over k > 0 at ω = iξ.

    With y = 2aq = p + y_min the measure becomes y²dp/(2a)³; the factor
    e^{−y_min} is taken out of the integrand.
    """
    y_min = 2.0 * a * xi / CONSTANTS.c
    scale = 1.0 / (2.0 * a)

    def integrand(p: np.ndarray) -> np.ndarray:
        out = np.empty(p.shape)
        for i, pi in enumerate(p):
            y = pi + y_min
            k = scale * math.sqrt(pi * (pi + 2.0 * y_min))
            r1 = reflect_matsubara(plate1, xi, k)
            r2 = reflect_matsubara(plate2, xi, k)
            damping = math.exp(-y)
            total = 0.0
            for first, second in zip(r1, r2):
                rr = (first * second).real
                total += rr / (1.0 - rr * damping)
            out[i] = y * y * math.exp(-pi) * total
        return out

    value, error = integrate_semi_infinite(
        integrand, 0.0, policy.with_options(tail=Tail.exponential(1.0))
    )
    factor = math.exp(-y_min) * scale**3
    return _Estimate(factor * value, factor * error)


def _matsubara_block(
    a: float,
    temperature: float,
    plate1: CoatedPlate,
    plate2: CoatedPlate,
    settings: PressureSettings,
) -> _Estimate:
    """T·Σ'_l of the k-integral over the Matsubara frequencies of `temperature`."""
    step = _matsubara_step(a, temperature)
    spacing = 2.0 * math.pi * CONSTANTS.k_B * temperature / CONSTANTS.hbar
    errors = []

    def term(l: int) -> float:
        estimate = _k_integral(l * spacing, a, plate1, plate2, settings.quadrature)
        weight = 0.5 if l == 0 else 1.0
        errors.append(weight * estimate.error)
        return weight * estimate.value

    sum_policy = settings.quadrature.with_options(
        rel_tol=settings.matsubara_rel_tol, abs_tol=0.0
    )
    floor = min(
        settings.matsubara_max_terms,
        max(2, math.ceil(3.0 / step), settings.matsubara_min_terms),
    )
    value, terms = sum_until_converged(
        term, sum_policy, max_terms=settings.matsubara_max_terms, min_terms=floor
    )
    logger.debug(
        f"Matsubara block at T={temperature} K, a={a:.4e} m: {terms} terms, "
        f"sum={value!r}"
    )
    return _Estimate(temperature * value, temperature * sum(errors), terms)


def _p_qeq(s: Scenario, settings: PressureSettings) -> _Estimate:
    a = s.separation
    plate1, plate2 = s.plates
    first = _matsubara_block(a, s.t1, plate1, plate2, settings)
    second = _matsubara_block(a, s.t2, plate1, plate2, settings)
    prefactor = -CONSTANTS.k_B / (2.0 * math.pi)
    return _record(
        _Estimate(
            prefactor * (first.value + second.value),
            abs(prefactor) * (first.error + second.error),
            first.terms + second.terms,
        )
    )


def p_qeq(s: Scenario, quad: Settings = None) -> float:
    """
    Quasi-equilibrium contribution in Pa.

    Both temperature blocks use the reflection coefficients of plate 1 at T₁
    and plate 2 at T₂; the l = 0 term of each Matsubara sum is halved.

    Raises:
        ConvergenceError: If a Matsubara sum shows no decay within its budget.
        QuadratureError: If a k-integral fails.
    """
    return _p_qeq(s, _settings(quad)).value


def _p_eq(
    a: float,
    temperature: float,
    plates: Tuple[CoatedPlate, CoatedPlate],
    settings: PressureSettings,
) -> _Estimate:
    if not temperature > 0:
        raise DomainError(f"p_eq needs T > 0, got {temperature}")
    plate1, plate2 = (p.at_temperature(temperature) for p in plates)
    block = _matsubara_block(a, temperature, plate1, plate2, settings)
    prefactor = -CONSTANTS.k_B / math.pi
    return _record(
        _Estimate(prefactor * block.value, abs(prefactor) * block.error, block.terms)
    )


def p_eq(
    a: float,
    temperature: float,
    plates: Tuple[CoatedPlate, CoatedPlate],
    quad: Settings = None,
) -> float:
    """Equilibrium Lifshitz pressure in Pa with both plates at `temperature`."""
    return _p_eq(a, temperature, plates, _settings(quad)).value


# ---------------------------------------------------------------------------
# Proper nonequilibrium contribution


def _resonance_knots(u: float) -> Tuple[float, ...]:
    """Points w = √(1 − t²) where the round-trip phase u·w is a multiple of 2π."""
    period = 2.0 * math.pi / u
    knots = (n * period for n in range(1, int(1.0 / period) + 1))
    return tuple(w for w in knots if w < 1.0)


def _evanescent_knots(
    u: float, a: float, plates: Tuple[CoatedPlate, CoatedPlate], s_max: float
) -> Tuple[float, ...]:
    """Light cone ω = v_Fk and pair-creation threshold of each coating, in s."""
    omega = CONSTANTS.c * u / (2.0 * a)
    knots = set()
    for plate in plates:
        sheet = plate.coating
        if sheet is None or plate.local:
            continue
        t_values = [CONSTANTS.c / sheet.v_F]
        g = sheet.gap_frequency
        if omega > g:
            t_values.append(t_values[0] * math.sqrt(1.0 - (g / omega) ** 2))
        for t in t_values:
            if t > 1.0:
                s = math.sqrt(t * t - 1.0)
                if 0 < s < s_max:
                    knots.add(s)
    return tuple(sorted(knots))


def _propagating(
    u: float, a: float, plate1: CoatedPlate, plate2: CoatedPlate, policy
) -> _Estimate:
    """
    Σ_κ ∫₀¹ t√(1 − t²)(|R₂|² − |R₁|²)/|D|² dt.

    With w = √(1 − t²) the measure is w²dw; the two squared moduli are
    integrated as separate components.
    """

    def integrand(w: np.ndarray) -> np.ndarray:
        out = np.empty((len(w), 2))
        for i, wi in enumerate(w):
            t = math.sqrt(max(1.0 - wi * wi, 0.0))
            r1 = reflect_real_axis(plate1, u, t, a)
            r2 = reflect_real_axis(plate2, u, t, a)
            far = near = 0.0
            for first, second, d in zip(r1, r2, d_factor(r1, r2, u, t)):
                d2 = max(abs(d) ** 2, D_FLOOR**2)
                far += abs(second) ** 2 / d2
                near += abs(first) ** 2 / d2
            out[i] = wi * wi * far, wi * wi * near
        return out

    value, error = integrate(
        integrand, 0.0, 1.0, policy.with_options(breakpoints=_resonance_knots(u))
    )
    return _Estimate(float(value[0] - value[1]), float(np.sum(error)))


def _evanescent(
    u: float, a: float, plate1: CoatedPlate, plate2: CoatedPlate, policy
) -> _Estimate:
    """
    u³ times −2Σ_κ ∫₁^∞ t√(t² − 1)e^{−u√(t²−1)}(ImR₁ReR₂ − ReR₁ImR₂)/|D|² dt.

    With s = √(t² − 1) the measure is s²e^{−us}ds, so u³ times the weight
    integrates to 2.
    """
    s_max = EVANESCENT_SPAN / u
    knots = _evanescent_knots(u, a, (plate1, plate2), s_max)

    def integrand(s: np.ndarray) -> np.ndarray:
        out = np.empty((len(s), 2))
        for i, si in enumerate(s):
            t = math.sqrt(1.0 + si * si)
            r1 = reflect_real_axis(plate1, u, t, a)
            r2 = reflect_real_axis(plate2, u, t, a)
            us = u * si
            weight = us * us * u * math.exp(-us)
            first_im = second_im = 0.0
            for first, second, d in zip(r1, r2, d_factor(r1, r2, u, t)):
                d2 = max(abs(d) ** 2, D_FLOOR**2)
                first_im += first.imag * second.real / d2
                second_im += first.real * second.imag / d2
            out[i] = weight * first_im, weight * second_im
        return out

    value, error = integrate(
        integrand, 0.0, s_max, policy.with_options(breakpoints=knots)
    )
    return _Estimate(-2.0 * float(value[0] - value[1]), 2.0 * float(np.sum(error)))


def _delta_p_neq(s: Scenario, settings: PressureSettings) -> _Estimate:
    if s.t1 == s.t2:
        return _Estimate(0.0, 0.0)
    a = s.separation
    plate1, plate2 = s.plates
    policy = settings.quadrature
    inner_policy = policy.with_options(
        abs_tol=max(policy.abs_tol, 1e-6 * policy.rel_tol)
    )

    def integrand(u: np.ndarray) -> np.ndarray:
        out = np.empty(u.shape)
        occupation = bose_factor(u, s.t1, a) - bose_factor(u, s.t2, a)
        for i, ui in enumerate(u):
            propagating = _propagating(ui, a, plate1, plate2, inner_policy)
            evanescent = _evanescent(ui, a, plate1, plate2, inner_policy)
            out[i] = occupation[i] * (ui**3 * propagating.value + evanescent.value)
        return out

    hottest = max(s.t1, s.t2)
    rate = 2.0 * a * CONSTANTS.k_B * hottest / (CONSTANTS.hbar * CONSTANTS.c)
    value, error = integrate_semi_infinite(
        integrand, 0.0, policy.with_options(tail=Tail.exponential(1.0 / rate))
    )
    prefactor = CONSTANTS.hbar * CONSTANTS.c / (64.0 * math.pi**2 * a**4)
    logger.debug(
        f"Nonequilibrium integral at a={a:.4e} m: value={value!r}, error={error!r}"
    )
    return _record(_Estimate(prefactor * value, prefactor * error))


def delta_p_neq(s: Scenario, quad: Settings = None) -> float:
    """
    Proper nonequilibrium contribution in Pa.

    Vanishes identically when T₁ = T₂ and, up to rounding, for plates whose
    reflection coefficients do not depend on temperature.
    """
    return _delta_p_neq(s, _settings(quad)).value


def p_neq(s: Scenario, quad: Settings = None) -> PressureBreakdown:
    """
    Nonequilibrium pressure P_neq = P_qeq + ΔP_neq with diagnostics.

    Raises:
        ConvergenceError, QuadratureError: Propagated from the sums and
            integrals.
    """
    settings = _settings(quad)
    qeq = _p_qeq(s, settings)
    neq = _delta_p_neq(s, settings)
    half_sum = None
    if s.plate1.is_bare and s.plate2.is_bare:
        first = _p_eq(s.separation, s.t1, s.plates, settings)
        second = _p_eq(s.separation, s.t2, s.plates, settings)
        half_sum = 0.5 * (first.value + second.value)
    breakdown = PressureBreakdown(
        p_qeq=qeq.value,
        delta_p_neq=neq.value,
        p_neq=qeq.value + neq.value,
        matsubara_terms_used=qeq.terms,
        quadrature_error_estimate=qeq.error + neq.error,
        equilibrium_half_sum=half_sum,
    )
    logger.info(
        f"P_neq at a={s.separation:.4e} m, T1={s.t1} K, T2={s.t2} K: "
        f"{breakdown.p_neq:.6e} Pa"
    )
    return breakdown


def _local_scenario(s: Scenario) -> Scenario:
    return replace(s, plate1=s.plate1.as_local(), plate2=s.plate2.as_local())


def _neq_total(s: Scenario, settings: PressureSettings) -> float:
    return _p_qeq(s, settings).value + _delta_p_neq(s, settings).value


def local_error_eq(s: Scenario, quad: Settings = None) -> float:
    """(P_eq^loc − P_eq)/P_eq at the environment temperature."""
    settings = _settings(quad)
    a = s.separation
    eq = _p_eq(a, s.t_env, s.plates, settings).value
    eq_local = _p_eq(a, s.t_env, _local_scenario(s).plates, settings).value
    return (eq_local - eq) / eq


def local_error_neq(s: Scenario, quad: Settings = None) -> float:
    """(P_neq^loc − P_neq)/P_neq."""
    settings = _settings(quad)
    neq = _neq_total(s, settings)
    neq_local = _neq_total(_local_scenario(s), settings)
    return (neq_local - neq) / neq


def rel_error_local(s: Scenario, quad: Settings = None) -> LocalErrors:
    """
    Relative errors of the spatially local approximation for the equilibrium
    pressure at T_E and for the nonequilibrium pressure.
    """
    settings = _settings(quad)
    return LocalErrors(local_error_eq(s, settings), local_error_neq(s, settings))
