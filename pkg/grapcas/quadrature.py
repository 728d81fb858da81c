"""
Adaptive one-dimensional integration and series summation.

The engine is a globally adaptive Gauss–Kronrod (7/15) scheme. Cells live in a
priority queue ordered by their error estimate; the worst cells are bisected
until the summed estimate meets the policy tolerance. Integrands are called
with whole arrays of abscissas (one call per refinement step), may return real
or complex values, and complex or vector-valued integrands share a single
subdivision tree.

Endpoints carrying an inverse-square-root singularity are mapped with
x = x0 + h·s², which renders the transformed integrand bounded.
"""

import heapq
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, List, NamedTuple, Sequence, Tuple

import numpy as np

from grapcas.errors import ConvergenceError, QuadratureError, ValidationError

__all__ = [
    "EndpointSingularity",
    "TailKind",
    "Tail",
    "QuadraturePolicy",
    "QuadratureResult",
    "integrate",
    "integrate_semi_infinite",
    "sum_until_converged",
]

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]

# Kronrod abscissas on [0, 1], descending, and the matching weights.
_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
# Gauss weights sit on every second Kronrod node (indices 1, 3, 5, 7).
_WG_ON_XGK = np.array(
    [
        0.0,
        0.129484966168869693270611432679082,
        0.0,
        0.279705391489276667901467771423780,
        0.0,
        0.381830050505118944950369775488975,
        0.0,
        0.417959183673469387755102040816327,
    ]
)

_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
_KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
_GAUSS_WEIGHTS = np.concatenate(
    [_WG_ON_XGK[:-1], [_WG_ON_XGK[-1]], _WG_ON_XGK[:-1][::-1]]
)

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny
# Refinement steps without a smaller error before the estimate is accepted
_STALL_STEPS = 8


class EndpointSingularity(Enum):
    """Integrable inverse-square-root behaviour at an end of the interval."""

    NONE = "none"
    INVERSE_SQRT_LEFT = "inverse_sqrt_left"
    INVERSE_SQRT_RIGHT = "inverse_sqrt_right"


class TailKind(Enum):
    NONE = "none"
    EXPONENTIAL = "exponential"
    POWER = "power"


@dataclass(frozen=True)
class Tail:
    """
    Declared asymptotics of a semi-infinite integrand.

    Attributes:
        kind: Tail class.
        rate: Decay rate r of an exponential tail, f ~ exp(-r x).
        exponent: Exponent p > 1 of a power tail, f ~ x^-p.
        start: Abscissa beyond which the declared asymptotics hold.
    """

    kind: TailKind = TailKind.NONE
    rate: float = 0.0
    exponent: float = 0.0
    start: float = 0.0

    @classmethod
    def exponential(cls, rate: float, start: float = 0.0) -> "Tail":
        return cls(kind=TailKind.EXPONENTIAL, rate=rate, start=start)

    @classmethod
    def power(cls, exponent: float, start: float = 0.0) -> "Tail":
        return cls(kind=TailKind.POWER, exponent=exponent, start=start)


@dataclass(frozen=True)
class QuadraturePolicy:
    """
    Tolerances and structural hints for one integration.

    Attributes:
        rel_tol: Relative tolerance, in (0, 1e-2].
        abs_tol: Absolute tolerance floor.
        max_subdivisions: Maximum number of cells, at least 8.
        breakpoints: Abscissas that must be cell boundaries (kinks, jumps).
        singular_points: Interior abscissas with inverse-square-root
            singularities on either side; they become cell boundaries and the
            adjacent cells use the endpoint mapping.
        endpoint_singularity: Singular end of the integration interval.
        tail: Asymptotics used by `integrate_semi_infinite`.
        tail_cutoff: Number of e-folds integrated before an exponential tail
            is closed analytically.
        raise_on_failure: Raise `QuadratureError` when the budget is spent;
            otherwise log a warning and return the best estimate.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_subdivisions: int = 400
    breakpoints: Tuple[float, ...] = ()
    singular_points: Tuple[float, ...] = ()
    endpoint_singularity: EndpointSingularity = EndpointSingularity.NONE
    tail: Tail = field(default_factory=Tail)
    tail_cutoff: float = 42.0
    raise_on_failure: bool = True

    def __post_init__(self):
        object.__setattr__(
            self, "breakpoints", tuple(float(b) for b in self.breakpoints)
        )
        object.__setattr__(
            self, "singular_points", tuple(float(b) for b in self.singular_points)
        )
        violations = []
        if not 0 < self.rel_tol <= 1e-2:
            violations.append(f"rel_tol must lie in (0, 1e-2], got {self.rel_tol}")
        if not self.abs_tol >= 0:
            violations.append(f"abs_tol must be non-negative, got {self.abs_tol}")
        if int(self.max_subdivisions) < 8:
            violations.append(
                f"max_subdivisions must be at least 8, got {self.max_subdivisions}"
            )
        if self.tail.kind is TailKind.EXPONENTIAL and not self.tail.rate > 0:
            violations.append(
                f"exponential tail needs a positive rate, got {self.tail.rate}"
            )
        if self.tail.kind is TailKind.POWER and not self.tail.exponent > 1:
            violations.append(
                f"power tail needs an exponent > 1, got {self.tail.exponent}"
            )
        if violations:
            raise ValidationError(violations)

    def with_options(self, **changes) -> "QuadraturePolicy":
        return replace(self, **changes)


class QuadratureResult(NamedTuple):
    value: complex
    error: float


class _Mapping(Enum):
    LINEAR = 0
    SQRT_LEFT = 1
    SQRT_RIGHT = 2
    INFINITE = 3


@dataclass(frozen=True)
class _Panel:
    """A variable-transformed piece [s_lo, s_hi] of the integration range."""

    mapping: _Mapping
    s_lo: float
    s_hi: float
    x0: float = 0.0
    h: float = 0.0


def _map_nodes(panel: _Panel, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if panel.mapping is _Mapping.LINEAR:
        return s, np.ones_like(s)
    if panel.mapping is _Mapping.SQRT_LEFT:
        return panel.x0 + panel.h * s * s, 2.0 * panel.h * s
    if panel.mapping is _Mapping.SQRT_RIGHT:
        return panel.x0 - panel.h * s * s, 2.0 * panel.h * s
    one_minus = 1.0 - s
    return panel.x0 + s / one_minus, 1.0 / (one_minus * one_minus)


def _kronrod_error(
    fx: np.ndarray, resk: np.ndarray, resg: np.ndarray, half: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    QUADPACK-style error estimate of a batch of real 15-point rules, and the
    round-off level 50·eps·∫|f| below which the estimate never drops.
    """
    mean = resk / (2.0 * half)
    resabs = half * (np.abs(fx) @ _KRONROD_WEIGHTS)
    resasc = half * (np.abs(fx - mean[..., None]) @ _KRONROD_WEIGHTS)
    err = np.abs(resk - resg)
    scaled = np.where(
        (resasc > 0) & (err > 0),
        resasc
        * np.minimum(1.0, (200.0 * err / np.where(resasc > 0, resasc, 1.0)) ** 1.5),
        err,
    )
    floor = np.where(resabs > _TINY / (50.0 * _EPS), 50.0 * _EPS * resabs, 0.0)
    return np.maximum(scaled, floor), floor


def _evaluate_cells(
    f: Integrand, panels: Sequence[_Panel], cells: Sequence[Tuple[int, float, float]]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Apply the 15-point rule to every (panel index, s_lo, s_hi) cell in one call.

    Returns per-cell values, error estimates and round-off levels, each of shape
    (n_cells, n_components).
    """
    lo = np.array([c[1] for c in cells])
    hi = np.array([c[2] for c in cells])
    half = 0.5 * (hi - lo)
    s = 0.5 * (hi + lo)[:, None] + half[:, None] * _NODES[None, :]
    x = np.empty_like(s)
    jac = np.empty_like(s)
    for row, (panel_index, _, _) in enumerate(cells):
        x[row], jac[row] = _map_nodes(panels[panel_index], s[row])

    fx = np.asarray(f(x.ravel()))
    fx = fx.reshape(s.shape + (-1,)).transpose(0, 2, 1) * jac[:, None, :]
    if not np.all(np.isfinite(fx)):
        bad = x[~np.all(np.isfinite(fx), axis=1)]
        raise QuadratureError(
            f"Integrand is not finite at {bad.size} node(s), first at x={bad[0]!r}",
            complex("nan"),
            math.inf,
        )
    half = half[:, None]
    resk = half * (fx @ _KRONROD_WEIGHTS)
    resg = half * (fx @ _GAUSS_WEIGHTS)
    if np.iscomplexobj(fx):
        err_re, floor_re = _kronrod_error(fx.real, resk.real, resg.real, half)
        err_im, floor_im = _kronrod_error(fx.imag, resk.imag, resg.imag, half)
        err, floor = np.hypot(err_re, err_im), np.hypot(floor_re, floor_im)
    else:
        err, floor = _kronrod_error(fx, resk, resg, half)
    return resk, err, floor


def _is_unrefinable(s_lo: float, s_hi: float) -> bool:
    scale = max(abs(s_lo), abs(s_hi), _TINY)
    return (s_hi - s_lo) <= 1e3 * _EPS * scale


def _adaptive(
    f: Integrand, panels: List[_Panel], policy: QuadraturePolicy
) -> QuadratureResult:
    cells = [(i, p.s_lo, p.s_hi) for i, p in enumerate(panels)]
    values, errors, roundoffs = _evaluate_cells(f, panels, cells)
    n_components = values.shape[1]

    # Components are ranked against a common scale fixed by the first pass.
    floor = policy.abs_tol / policy.rel_tol
    weights = 1.0 / np.maximum(np.maximum(np.abs(values.sum(axis=0)), floor), _TINY)

    counter = 0
    heap = []
    frozen = []

    def push(cell, value, err, roundoff):
        nonlocal counter
        entry = (-float(err @ weights), counter, cell, value, err, roundoff)
        heapq.heappush(heap, entry)
        counter += 1

    for cell, value, err, roundoff in zip(cells, values, errors, roundoffs):
        push(cell, value, err, roundoff)

    def totals():
        entries = sorted([e[2:] for e in heap] + frozen, key=lambda item: item[0])
        return tuple(
            np.sum([entry[k] for entry in entries], axis=0) for k in (1, 2, 3)
        )

    total, total_err, total_roundoff = totals()
    best_err, stalled = math.inf, 0
    while True:
        target = np.maximum(policy.abs_tol, policy.rel_tol * np.abs(total))
        if np.all(total_err <= target):
            break
        if np.all(total_err <= np.maximum(target, total_roundoff)):
            logger.debug(
                f"Quadrature limited by round-off: value={total!r}, "
                f"error={total_err!r}, requested={target!r}"
            )
            break
        weighted_err = float(total_err @ weights)
        if weighted_err < best_err:
            best_err, stalled = weighted_err, 0
        else:
            stalled += 1
        if stalled >= _STALL_STEPS:
            value, error = _unpack(total, total_err, n_components)
            logger.warning(
                f"Quadrature error stopped decreasing after {_STALL_STEPS} "
                f"refinements: value={value!r}, error={error!r}"
            )
            break

        budget = policy.max_subdivisions - len(heap) - len(frozen)
        if budget <= 0 or not heap:
            message = (
                "Adaptive quadrature exhausted its subdivision budget"
                if heap
                else "Adaptive quadrature reached the resolution limit"
            )
            value, error = _unpack(total, total_err, n_components)
            if policy.raise_on_failure:
                logger.error(f"{message}: value={value!r}, error={error!r}")
                raise QuadratureError(message, value, np.max(total_err))
            logger.warning(f"{message}: value={value!r}, error={error!r}")
            break

        worst = -heap[0][0]
        selected = []
        while heap and len(selected) < budget and -heap[0][0] >= 0.5 * worst:
            entry = heapq.heappop(heap)
            cell = entry[2]
            if _is_unrefinable(cell[1], cell[2]):
                frozen.append(entry[2:])
                continue
            selected.append(cell)
        if not selected:
            continue

        children = []
        for panel_index, s_lo, s_hi in selected:
            mid = 0.5 * (s_lo + s_hi)
            children.append((panel_index, s_lo, mid))
            children.append((panel_index, mid, s_hi))
        values, errors, roundoffs = _evaluate_cells(f, panels, children)
        for cell, value, err, roundoff in zip(children, values, errors, roundoffs):
            push(cell, value, err, roundoff)
        total, total_err, total_roundoff = totals()

    logger.debug(
        f"Quadrature finished with {len(heap) + len(frozen)} cells: "
        f"value={total!r}, error={total_err!r}"
    )
    return QuadratureResult(*_unpack(total, total_err, n_components))


def _unpack(total: np.ndarray, total_err: np.ndarray, n_components: int):
    """Scalar integrands give Python scalars; vector integrands keep arrays."""
    if n_components > 1:
        return total, total_err
    value = total[0]
    value = complex(value) if np.iscomplexobj(value) else float(value)
    return value, float(total_err[0])


def _finite_panels(lo: float, hi: float, policy: QuadraturePolicy) -> List[_Panel]:
    singular = {p for p in policy.singular_points if lo <= p <= hi}
    if policy.endpoint_singularity is EndpointSingularity.INVERSE_SQRT_LEFT:
        singular.add(lo)
    elif policy.endpoint_singularity is EndpointSingularity.INVERSE_SQRT_RIGHT:
        singular.add(hi)
    interior = {p for p in policy.breakpoints if lo < p < hi} | {
        p for p in singular if lo < p < hi
    }
    knots = [lo] + sorted(interior) + [hi]

    panels = []
    for left, right in zip(knots[:-1], knots[1:]):
        left_singular, right_singular = left in singular, right in singular
        if left_singular and right_singular:
            mid = 0.5 * (left + right)
            panels.append(_Panel(_Mapping.SQRT_LEFT, 0.0, 1.0, x0=left, h=mid - left))
            panels.append(
                _Panel(_Mapping.SQRT_RIGHT, 0.0, 1.0, x0=right, h=right - mid)
            )
        elif left_singular:
            panels.append(_Panel(_Mapping.SQRT_LEFT, 0.0, 1.0, x0=left, h=right - left))
        elif right_singular:
            panels.append(
                _Panel(_Mapping.SQRT_RIGHT, 0.0, 1.0, x0=right, h=right - left)
            )
        else:
            panels.append(_Panel(_Mapping.LINEAR, left, right))
    return panels


def integrate(
    f: Integrand, lo: float, hi: float, policy: QuadraturePolicy
) -> QuadratureResult:
    """
    Integrate a vectorized `f` over [lo, hi].

    Args:
        f: Callable mapping a 1-D array of abscissas to real or complex values,
           either of the same shape or with a trailing component axis; all
           components then share one subdivision tree.
        lo, hi: Finite limits with lo < hi.
        policy: Tolerances and structural hints.

    Returns:
        QuadratureResult(value, error)

    Raises:
        QuadratureError: If the tolerance is not met within the budget.
    """
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"integrate needs finite limits lo < hi, got [{lo}, {hi}]")
    return _adaptive(f, _finite_panels(lo, hi, policy), policy)


def integrate_semi_infinite(
    f: Integrand, lo: float, policy: QuadraturePolicy
) -> QuadratureResult:
    """
    Integrate a vectorized `f` over [lo, ∞) using the declared tail class.

    Exponential tails are truncated `tail_cutoff` e-folds beyond
    max(lo, tail.start) and closed with f(X)/rate. Power tails are integrated
    over doubling panels until a panel is negligible and closed with
    f(X)·X/(p − 1). Without a declared tail the range beyond the last knot is
    mapped onto a finite interval.
    """
    tail = policy.tail
    if tail.kind is TailKind.EXPONENTIAL:
        start = max(lo, tail.start)
        cutoff = start + policy.tail_cutoff / tail.rate
        value, err = integrate(f, lo, cutoff, policy)
        tail_value = np.asarray(f(np.array([cutoff])))[0] / tail.rate
        return QuadratureResult(value + tail_value, err + abs(tail_value))

    if tail.kind is TailKind.POWER:
        knots = [lo, tail.start, *policy.breakpoints, *policy.singular_points]
        start = max(knots)
        if start <= lo:
            start = lo + abs(lo) if lo > 0 else lo + 1.0
        value, err = integrate(f, lo, start, policy)
        panel_policy = policy.with_options(
            breakpoints=(),
            singular_points=(),
            endpoint_singularity=EndpointSingularity.NONE,
        )
        left = start
        for _ in range(200):
            right = 2.0 * left if left > 0 else left + 2.0 * (left - lo)
            panel_value, panel_err = integrate(f, left, right, panel_policy)
            value, err, left = value + panel_value, err + panel_err, right
            negligible = 0.1 * max(policy.abs_tol, policy.rel_tol * abs(value))
            if abs(panel_value) <= negligible:
                break
        else:
            raise QuadratureError(
                "Power tail did not decay over 200 panels", value, err
            )
        tail_value = np.asarray(f(np.array([left])))[0] * left / (tail.exponent - 1.0)
        return QuadratureResult(value + tail_value, err + abs(tail_value))

    interior = [p for p in (*policy.breakpoints, *policy.singular_points) if p > lo]
    last = max(interior) if interior else lo
    panels = _finite_panels(lo, last, policy) if last > lo else []
    panels.append(_Panel(_Mapping.INFINITE, 0.0, 1.0, x0=last))
    return _adaptive(f, panels, policy)


def sum_until_converged(
    term: Callable[[int], float],
    policy: QuadraturePolicy,
    max_terms: int = 10000,
    min_terms: int = 1,
    patience: int = 3,
) -> Tuple[float, int]:
    """
    Sum term(0) + term(1) + ... in index order.

    Summation stops once `patience` consecutive terms are each below
    max(abs_tol, rel_tol·|partial sum|) and at least `min_terms` terms have
    been added.

    Returns:
        (value, terms_used)

    Raises:
        ConvergenceError: If a term is not finite or no decay is seen within
            `max_terms` terms.
    """
    total = 0.0
    quiet = 0
    for index in range(max_terms):
        value = term(index)
        if not math.isfinite(value):
            raise ConvergenceError(f"Series term {index} is not finite", total, index)
        total += value
        if abs(value) <= max(policy.abs_tol, policy.rel_tol * abs(total)):
            quiet += 1
        else:
            quiet = 0
        if index + 1 >= min_terms and quiet >= patience:
            logger.debug(f"Series converged after {index + 1} terms: {total!r}")
            return total, index + 1
    logger.error(f"Series did not converge within {max_terms} terms")
    raise ConvergenceError(
        f"Series did not converge within {max_terms} terms", total, max_terms
    )
