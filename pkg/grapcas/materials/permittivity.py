import logging
import math
import threading
from typing import ClassVar, Dict, Optional, Sequence, Tuple

import numpy as np

from grapcas.errors import DomainError
from grapcas.quadrature import (
    QuadraturePolicy,
    Tail,
    integrate,
    integrate_semi_infinite,
)

logger = logging.getLogger(__name__)

KK_POLICY = QuadraturePolicy(rel_tol=1e-9, max_subdivisions=2000)


class PermittivityModel:
    """
    Dielectric response of a substrate on both frequency axes.

    Subclasses supply ε(ω) on the real axis and its imaginary part as a
    vectorized `absorption`; ε(iξ) follows from the Kramers–Kronig relation
    unless a subclass knows it in closed form. Instances are immutable after
    construction apart from the ε(iξ) memo, which is guarded by a lock.
    """

    name: ClassVar[str] = "permittivity"
    description: ClassVar[str] = ""

    def __init__(self, policy: Optional[QuadraturePolicy] = None):
        self._policy = policy or KK_POLICY
        self._imaginary_axis_cache: Dict[float, float] = {}
        self._cache_lock = threading.Lock()

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_cache_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._cache_lock = threading.Lock()

    @classmethod
    def is_available(cls) -> bool:
        """Whether the model can be built without user-supplied data."""
        return False

    def eps_real_axis(self, omega: float) -> complex:
        """Complex ε(ω) at real ω > 0 with Im ε ≥ 0."""
        raise NotImplementedError

    def absorption(self, omega: np.ndarray) -> np.ndarray:
        """Im ε(ω), vectorized over ω ≥ 0."""
        raise NotImplementedError

    def absorption_peaks(self) -> Tuple[float, ...]:
        """Frequencies the KK quadrature should resolve explicitly."""
        return ()

    def eps_imaginary_axis(self, xi: float) -> float:
        """
        Real ε(iξ) for ξ ≥ 0, memoized per ξ.

        Raises:
            DomainError: For negative ξ.
            QuadratureError: If the Kramers–Kronig integral does not converge.
        """
        if xi < 0 or not math.isfinite(xi):
            raise DomainError(f"eps_imaginary_axis needs finite xi >= 0, got {xi}")
        with self._cache_lock:
            cached = self._imaginary_axis_cache.get(xi)
        if cached is not None:
            return cached
        value = self._eps_imaginary_axis(xi)
        with self._cache_lock:
            self._imaginary_axis_cache[xi] = value
        return value

    def _eps_imaginary_axis(self, xi: float) -> float:
        return kramers_kronig(self, xi, self._policy)

    @property
    def eps_static(self) -> float:
        """ε₀ = lim ε(iξ) as ξ → 0."""
        return self.eps_imaginary_axis(0.0)

    def summary(self) -> str:
        return f"{self.name}: eps_static={self.eps_static:.4f}"


def _knots(peaks: Sequence[float], xi: float) -> Tuple[float, ...]:
    return tuple(sorted({p for p in (*peaks, xi) if p > 0}))


def kramers_kronig(
    model: PermittivityModel, xi: float, policy: Optional[QuadraturePolicy] = None
) -> float:
    """
    ε(iξ) = 1 + (2/π)∫₀^∞ ω·Im ε(ω)/(ω² + ξ²) dω.

    The integral runs over [0, ∞) with breakpoints at ξ and at the model's
    absorption peaks; beyond the highest knot Im ε is assumed to fall at
    least as ω⁻³.
    """
    policy = policy or KK_POLICY
    knots = _knots(model.absorption_peaks(), xi)
    start = 10.0 * knots[-1] if knots else 1.0
    kk_policy = policy.with_options(breakpoints=knots, tail=Tail.power(4.0, start))

    def integrand(omega: np.ndarray) -> np.ndarray:
        return omega * model.absorption(omega) / (omega * omega + xi * xi)

    value, error = integrate_semi_infinite(integrand, 0.0, kk_policy)
    logger.debug(f"KK at xi={xi:.6e}: integral={value!r}, error={error!r}")
    return 1.0 + 2.0 / math.pi * float(value)


def kramers_kronig_segment(
    model: PermittivityModel,
    xi: float,
    lo: float,
    hi: float,
    nodes: Sequence[float],
    policy: Optional[QuadraturePolicy] = None,
) -> float:
    """(2/π)∫ ω·Im ε(ω)/(ω² + ξ²) dω over [lo, hi] with the given breakpoints."""
    policy = policy or KK_POLICY
    knots = tuple(p for p in _knots(nodes, xi) if lo < p < hi)
    budget = max(policy.max_subdivisions, 4 * (len(knots) + 1))
    segment_policy = policy.with_options(breakpoints=knots, max_subdivisions=budget)
    value, _ = integrate(
        lambda omega: omega * model.absorption(omega) / (omega * omega + xi * xi),
        lo,
        hi,
        segment_policy,
    )
    return 2.0 / math.pi * float(value)
