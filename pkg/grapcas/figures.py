"""
Separation scans behind the published figure families.

A `ScanSpec` names one quantity, a set of curves and a separation grid.
`figure_scan` evaluates every (curve, separation) point and returns a long
table with one row per point. Points that fail numerically are kept as NaN rows
carrying the error message. Every row also carries the Matsubara terms and the
quadrature error estimate spent on it.
"""

import logging
import math
from concurrent import futures
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from grapcas.constants import Scenario
from grapcas.errors import ConfigurationError, GrapcasError
from grapcas.materials import PermittivityModel, resolve_substrate
from grapcas.pressure import (
    PressureSettings,
    delta_p_neq,
    local_error_eq,
    local_error_neq,
    p_classical,
    p_eq,
    p_qeq,
    tally,
)
from grapcas.quadrature import QuadraturePolicy
from grapcas.utils.config import scenario_from_config

__all__ = [
    "Quantity",
    "CurveSpec",
    "ScanSpec",
    "FIGURE_IDS",
    "figure_spec",
    "log_grid",
    "linear_grid",
    "evaluate_quantity",
    "figure_scan",
    "SCAN_COLUMNS",
    "point_diagnostics",
]

logger = logging.getLogger(__name__)

ENVIRONMENT_TEMPERATURE = 300.0
POINTS_PER_DECADE = 40

SCAN_COLUMNS = (
    "curve",
    "separation_um",
    "value",
    "note",
    "matsubara_terms",
    "error_estimate",
)

BARE = (False, False)


class Quantity(Enum):
    P_NEQ_OVER_CL = "P_neq/P_cl"
    P_EQ_OVER_CL = "P_eq/P_cl"
    P_EQ_OVER_BARE = "P_eq/P_eq_SiO2"
    P_NEQ_OVER_BARE = "P_neq/P_neq_SiO2"
    LOCAL_ERROR_EQ = "dP_loc_eq"
    LOCAL_ERROR_NEQ = "dP_loc_neq"
    P_NEQ_OVER_EQ = "P_neq/P_eq"
    P_NEQ = "p_neq"
    P_EQ = "p_eq"
    P_QEQ = "p_qeq"
    DELTA_P_NEQ = "delta_p_neq"

    @classmethod
    def parse(cls, text: str) -> "Quantity":
        for quantity in cls:
            if text in (quantity.value, quantity.name.lower()):
                return quantity
        names = ", ".join(q.value for q in cls)
        raise ConfigurationError(f"Unknown quantity {text!r}; expected one of {names}")

    @property
    def column(self) -> str:
        return self.value.replace("/", "_over_")


@dataclass(frozen=True)
class CurveSpec:
    """
    One curve of a scan: plate temperatures and the coating of each plate.

    `quantity` overrides the quantity of the enclosing scan.
    """

    label: str
    t2: float
    delta_ev: float = 0.1
    mu_ev: float = 0.0
    coated: Tuple[bool, bool] = (True, True)
    quantity: Optional[Quantity] = None
    t1: float = ENVIRONMENT_TEMPERATURE
    t_env: float = ENVIRONMENT_TEMPERATURE

    @classmethod
    def from_section(cls, section: Dict[str, Any], label: str = "scenario"):
        """The single curve described by a scenario section."""
        coated = section.get("coated", [True, True])
        if isinstance(coated, bool):
            coated = [coated, coated]
        return cls(
            label=label,
            t2=float(section["t2_K"]),
            delta_ev=float(section["delta_eV"]),
            mu_ev=float(section["mu_eV"]),
            coated=(bool(coated[0]), bool(coated[1])),
            t1=float(section["t1_K"]),
            t_env=float(section["tenv_K"]),
        )

    def overrides(self) -> Dict[str, Any]:
        return {
            "t1_K": self.t1,
            "tenv_K": self.t_env,
            "t2_K": self.t2,
            "delta_eV": self.delta_ev,
            "mu_eV": self.mu_ev,
            "coated": list(self.coated),
        }


@dataclass(frozen=True)
class ScanSpec:
    figure_id: str
    quantity: Quantity
    curves: Tuple[CurveSpec, ...]
    separations_um: Tuple[float, ...] = field(default=())
    title: str = ""

    def with_separations(self, separations_um: Sequence[float]) -> "ScanSpec":
        return replace(self, separations_um=tuple(float(a) for a in separations_um))


def log_grid(lo: float, hi: float, points_per_decade: int = POINTS_PER_DECADE):
    """Log-spaced grid from `lo` to `hi` inclusive."""
    if not 0 < lo < hi:
        raise ConfigurationError(f"Invalid separation range: {lo} to {hi}")
    if points_per_decade < 1:
        raise ConfigurationError(
            f"points_per_decade must be positive, got {points_per_decade}"
        )
    n = max(2, math.ceil(points_per_decade * math.log10(hi / lo)) + 1)
    return tuple(float(a) for a in np.geomspace(lo, hi, n))


def linear_grid(lo: float, hi: float, step: float):
    """`lo`, `lo + step`, ... up to `hi` inclusive, robust to rounding."""
    if not step > 0 or hi < lo:
        raise ConfigurationError(f"Invalid scan {lo}:{hi}:{step}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + i * step, 12) for i in range(n))


def _label(t2: float, delta_ev: float, mu_ev: float) -> str:
    return f"T2_{t2:g}K_mu{mu_ev:g}_delta{delta_ev:g}"


def _gap_curves(t2: float, mu_ev: float, gaps=(0.1, 0.2, 0.3)) -> Tuple[CurveSpec, ...]:
    return tuple(CurveSpec(_label(t2, d, mu_ev), t2, d, mu_ev) for d in gaps)


def _bare_silica_curves() -> Tuple[CurveSpec, ...]:
    return (
        CurveSpec("T2_500K", 500.0, coated=BARE, quantity=Quantity.P_NEQ_OVER_CL),
        CurveSpec(
            "equilibrium",
            ENVIRONMENT_TEMPERATURE,
            coated=BARE,
            quantity=Quantity.P_EQ_OVER_CL,
        ),
        CurveSpec("T2_77K", 77.0, coated=BARE, quantity=Quantity.P_NEQ_OVER_CL),
    )


def _catalogue() -> Dict[str, Tuple[ScanSpec, Tuple[float, float]]]:
    full = (0.2, 2.0)
    coated_eq = tuple(
        CurveSpec(_label(ENVIRONMENT_TEMPERATURE, d, m), ENVIRONMENT_TEMPERATURE, d, m)
        for m, d in ((0.0, 0.2), (0.0, 0.1), (0.25, 0.1), (0.25, 0.2))
    )
    coated_neq = tuple(
        CurveSpec(_label(t2, d, m), t2, d, m)
        for t2 in (77.0, 500.0)
        for m in (0.0, 0.25)
        for d in (0.2, 0.1)
    )
    entries = {
        "1a": (Quantity.P_NEQ_OVER_CL, _bare_silica_curves(), (0.2, 0.7)),
        "1b": (Quantity.P_NEQ_OVER_CL, _bare_silica_curves(), (0.7, 2.0)),
        "2a": (Quantity.P_EQ_OVER_BARE, coated_eq, full),
        "2b": (Quantity.P_NEQ_OVER_BARE, coated_neq, full),
    }
    for panel, mu_ev in (("a", 0.0), ("b", 0.25)):
        entries[f"3{panel}"] = (
            Quantity.LOCAL_ERROR_EQ,
            _gap_curves(ENVIRONMENT_TEMPERATURE, mu_ev),
            full,
        )
        entries[f"4{panel}"] = (
            Quantity.LOCAL_ERROR_NEQ,
            _gap_curves(77.0, mu_ev),
            full,
        )
        entries[f"5{panel}"] = (
            Quantity.LOCAL_ERROR_NEQ,
            _gap_curves(500.0, mu_ev),
            full,
        )
        entries[f"6{panel}"] = (
            Quantity.P_NEQ_OVER_EQ,
            tuple(
                CurveSpec(_label(t2, d, mu_ev), t2, d, mu_ev)
                for t2 in (500.0, 77.0)
                for d in (0.1, 0.2)
            ),
            full,
        )
    return {
        figure_id: (ScanSpec(figure_id, quantity, curves, title=figure_id), span)
        for figure_id, (quantity, curves, span) in entries.items()
    }


_FIGURES = _catalogue()
FIGURE_IDS = tuple(sorted(_FIGURES))

INSET_RANGE_UM = (0.2, 0.35)


def figure_spec(
    figure_id: str, points_per_decade: int = POINTS_PER_DECADE, inset: bool = False
) -> ScanSpec:
    """
    Scan specification of one figure panel on its log-spaced separation grid.

    Raises:
        ConfigurationError: For an unknown figure id, or `inset` on a panel
            other than 1a.
    """
    if figure_id not in _FIGURES:
        raise ConfigurationError(
            f"Unknown figure {figure_id!r}; expected one of {', '.join(FIGURE_IDS)}"
        )
    spec, span = _FIGURES[figure_id]
    if inset:
        if figure_id != "1a":
            raise ConfigurationError("Only figure 1a has an inset")
        span = INSET_RANGE_UM
    return spec.with_separations(log_grid(*span, points_per_decade))


def _bare(s: Scenario) -> Scenario:
    return replace(s, plate1=s.plate1.bare(), plate2=s.plate2.bare())


def _neq(s: Scenario, settings: PressureSettings) -> float:
    return p_qeq(s, settings) + delta_p_neq(s, settings)


def _eq(s: Scenario, settings: PressureSettings) -> float:
    return p_eq(s.separation, s.t_env, s.plates, settings)


def evaluate_quantity(
    quantity: Quantity, s: Scenario, settings: Optional[PressureSettings] = None
) -> float:
    """
    Value of `quantity` for one scenario. Pressures are in Pa; ratios and
    relative errors are dimensionless. Equilibrium pressures are taken at T_E
    and the classical normalizer uses the static permittivity of the first
    plate's substrate.
    """
    settings = settings or PressureSettings()
    a = s.separation
    if quantity is Quantity.P_NEQ:
        return _neq(s, settings)
    if quantity is Quantity.P_EQ:
        return _eq(s, settings)
    if quantity is Quantity.P_QEQ:
        return p_qeq(s, settings)
    if quantity is Quantity.DELTA_P_NEQ:
        return delta_p_neq(s, settings)
    if quantity is Quantity.LOCAL_ERROR_EQ:
        return local_error_eq(s, settings)
    if quantity is Quantity.LOCAL_ERROR_NEQ:
        return local_error_neq(s, settings)
    if quantity is Quantity.P_NEQ_OVER_EQ:
        return _neq(s, settings) / _eq(s, settings)
    if quantity is Quantity.P_EQ_OVER_BARE:
        return _eq(s, settings) / _eq(_bare(s), settings)
    if quantity is Quantity.P_NEQ_OVER_BARE:
        return _neq(s, settings) / _neq(_bare(s), settings)
    classical = p_classical(a, s.t_env, s.plate1.substrate.eps_static)
    if quantity is Quantity.P_NEQ_OVER_CL:
        return _neq(s, settings) / classical
    return _eq(s, settings) / classical


@dataclass(frozen=True)
class _PointTask:
    quantity: Quantity
    curve: CurveSpec
    separation_um: float
    section: Dict[str, Any]
    substrate: PermittivityModel
    settings: PressureSettings
    tensor_policy: Optional[QuadraturePolicy]


def _evaluate_point(task: _PointTask) -> Tuple[float, str, int, float]:
    section = dict(task.section)
    section.update(task.curve.overrides())
    section["separation_um"] = task.separation_um
    with tally() as work:
        try:
            s = scenario_from_config(section, task.substrate, task.tensor_policy)
            value, note = evaluate_quantity(task.quantity, s, task.settings), ""
        except (GrapcasError, ArithmeticError) as e:
            value, note = math.nan, f"{type(e).__name__}: {e}"
            logger.warning(
                f"{task.curve.label} at a={task.separation_um} um recorded as NaN: "
                f"{note}"
            )
    return value, note, work.matsubara_terms, work.error_estimate


def figure_scan(
    spec: ScanSpec,
    section: Dict[str, Any],
    settings: Optional[PressureSettings] = None,
    substrate: Optional[PermittivityModel] = None,
    tensor_policy: Optional[QuadraturePolicy] = None,
    jobs: int = 1,
) -> pd.DataFrame:
    """
    Evaluate every (curve, separation) point of `spec`.

    Args:
        spec: Quantity, curves and separations in µm.
        section: Base scenario section; curves override the temperatures and
            the coating.
        settings: Pressure settings shared by every point.
        substrate: Permittivity model; resolved from `section["substrate"]`
            before any computation when omitted.
        tensor_policy: Quadrature policy of the graphene tensor.
        jobs: Worker processes; rows keep scan order regardless.

    Returns:
        A frame with the columns of `SCAN_COLUMNS`.

    Raises:
        ConfigurationError: If the substrate cannot be resolved.
    """
    settings = settings or PressureSettings()
    if substrate is None:
        substrate = resolve_substrate(section["substrate"])
    tasks: List[_PointTask] = [
        _PointTask(
            curve.quantity or spec.quantity,
            curve,
            a,
            dict(section),
            substrate,
            settings,
            tensor_policy,
        )
        for curve in spec.curves
        for a in spec.separations_um
    ]
    logger.info(
        f"Scanning {spec.figure_id or spec.quantity.value}: {len(spec.curves)} "
        f"curves, {len(spec.separations_um)} separations, {jobs} job(s)"
    )
    if jobs > 1 and len(tasks) > 1:
        with futures.ProcessPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(_evaluate_point, tasks))
    else:
        results = [_evaluate_point(task) for task in tasks]

    return pd.DataFrame(
        {
            "curve": [task.curve.label for task in tasks],
            "separation_um": [task.separation_um for task in tasks],
            "value": [row[0] for row in results],
            "note": [row[1] for row in results],
            "matsubara_terms": [row[2] for row in results],
            "error_estimate": [row[3] for row in results],
        },
        columns=list(SCAN_COLUMNS),
    )


def point_diagnostics(table: pd.DataFrame) -> List[Dict[str, Any]]:
    """Per-point work and failures of a scan table, as plain JSON records."""
    records = []
    for row in table.itertuples(index=False):
        record = {
            "curve": str(row.curve),
            "separation_um": float(row.separation_um),
            "matsubara_terms": int(row.matsubara_terms),
            "error_estimate": float(row.error_estimate),
        }
        if row.note:
            record["failure"] = str(row.note)
        records.append(record)
    return records
