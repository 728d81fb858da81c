"""
Tabulated optical data and the permittivity model built on it.

Files are plain text with three whitespace-separated columns. A header line
`#format=rad_eps` (the default) selects (ω in rad/s, Re ε, Im ε); the line
`#format=ev_nk` selects (photon energy in eV, n, k), converted on load with
ε = (n + ik)². Other lines starting with `#` are comments.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from grapcas.errors import OpticalDataError
from grapcas.materials.permittivity import PermittivityModel, kramers_kronig_segment
from grapcas.quadrature import QuadraturePolicy
from grapcas.utils.units import UnitConverter

logger = logging.getLogger(__name__)

FORMATS = ("rad_eps", "ev_nk")

# Power laws for Im ε outside the tabulated range
LOW_FREQUENCY_EXPONENT = 1.0
HIGH_FREQUENCY_EXPONENT = -3.0

# Below this ξ/ω_max the high-frequency tail uses its series form
_TAIL_SERIES_THRESHOLD = 1e-2


@dataclass(frozen=True, eq=False)
class OpticalTable:
    """Rows (ω, Re ε, Im ε), strictly increasing in ω with Im ε ≥ 0."""

    omega: np.ndarray
    eps_re: np.ndarray
    eps_im: np.ndarray
    source: str = "<memory>"

    def __post_init__(self):
        for name in ("omega", "eps_re", "eps_im"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        _validate_rows(self.omega, self.eps_re, self.eps_im, self.source)

    def __len__(self) -> int:
        return len(self.omega)

    @property
    def frequency_range(self) -> Tuple[float, float]:
        return float(self.omega[0]), float(self.omega[-1])


def _validate_rows(omega, eps_re, eps_im, source: str) -> None:
    if not (len(omega) == len(eps_re) == len(eps_im)):
        raise OpticalDataError(f"{source}: columns have different lengths")
    if len(omega) < 2:
        raise OpticalDataError(f"{source}: at least 2 rows are required")
    for i in range(len(omega)):
        row = i + 1
        values = (omega[i], eps_re[i], eps_im[i])
        if not all(math.isfinite(v) for v in values):
            raise OpticalDataError(f"{source}: non-finite value", row=row)
        if not omega[i] > 0:
            raise OpticalDataError(f"{source}: frequency must be positive", row=row)
        if i > 0 and not omega[i] > omega[i - 1]:
            raise OpticalDataError(
                f"{source}: frequencies must be strictly increasing", row=row
            )
        if eps_im[i] < 0:
            raise OpticalDataError(
                f"{source}: negative Im eps violates passivity", row=row
            )


def _read_format(path: Path) -> str:
    with open(path, "r") as f:
        for line in f:
            stripped = line.strip().replace(" ", "")
            if stripped.startswith("#format="):
                fmt = stripped.split("=", 1)[1]
                if fmt not in FORMATS:
                    raise OpticalDataError(
                        f"{path}: unknown format {fmt!r}, expected one of {FORMATS}"
                    )
                return fmt
    return "rad_eps"


def load_optical_table(path: Union[str, Path]) -> OpticalTable:
    """
    Read and validate an optical-data file.

    Raises:
        FileNotFoundError: If the file does not exist.
        OpticalDataError: On unparsable rows, non-increasing frequencies or
            negative absorption; `row` is the 1-based data row.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Optical data file not found: {path}")
    fmt = _read_format(path)
    try:
        frame = pd.read_csv(path, comment="#", sep=r"\s+", header=None)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        logger.error(f"Could not parse optical data {path}: {e}")
        raise OpticalDataError(f"{path}: {e}")
    if frame.shape[1] != 3:
        raise OpticalDataError(f"{path}: expected 3 columns, found {frame.shape[1]}")
    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().any(axis=1).to_numpy()
    if bad.any():
        raise OpticalDataError(
            f"{path}: unparsable value", row=int(np.argmax(bad)) + 1
        )
    first, second, third = (numeric[c].to_numpy(dtype=float) for c in numeric.columns)

    if fmt == "ev_nk":
        omega = UnitConverter.energy_to_angular_frequency(first, "eV")
        eps = (second + 1j * third) ** 2
        eps_re, eps_im = eps.real, eps.imag
    else:
        omega, eps_re, eps_im = first, second, third
    table = OpticalTable(omega, eps_re, eps_im, source=str(path))
    logger.info(f"Loaded {len(table)} optical rows from {path} ({fmt})")
    return table


def _interpolate_log(omega: np.ndarray, nodes: np.ndarray, values: np.ndarray):
    """Linear in log ω; log-log when every value is positive."""
    x = np.log(omega)
    xs = np.log(nodes)
    if np.all(values > 0):
        return np.exp(np.interp(x, xs, np.log(values)))
    return np.interp(x, xs, values)


class TabulatedModel(PermittivityModel):
    """
    Permittivity interpolated from an `OpticalTable`.

    Im ε is interpolated log-log and Re ε linearly in log ω. Outside the
    table Im ε follows ω¹ below and ω⁻³ above, matched at the end rows,
    while Re ε is held at the first row below and relaxes to 1 as ω⁻² above.
    """

    name = "tabulated"
    description = "Optical table, log-log interpolation with power-law tails"

    def __init__(self, table: OpticalTable, policy: Optional[QuadraturePolicy] = None):
        super().__init__(policy)
        self.table = table
        self._warned = False

    def __repr__(self) -> str:
        lo, hi = self.table.frequency_range
        source = self.table.source
        return f"TabulatedModel(source={source!r}, range=[{lo:.3e}, {hi:.3e}])"

    @classmethod
    def from_file(
        cls, path: Union[str, Path], policy: Optional[QuadraturePolicy] = None
    ) -> "TabulatedModel":
        return cls(load_optical_table(path), policy=policy)

    def _warn_extrapolation(self, omega) -> None:
        if not self._warned:
            lo, hi = self.table.frequency_range
            logger.warning(
                f"Extrapolating {self.table.source} outside [{lo:.3e}, {hi:.3e}] rad/s "
                f"(omega={omega:.3e})"
            )
            self._warned = True

    def absorption(self, omega: np.ndarray) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        t = self.table
        lo, hi = t.frequency_range
        inside = np.clip(omega, lo, hi)
        value = _interpolate_log(inside, t.omega, t.eps_im)
        below = t.eps_im[0] * (np.maximum(omega, 0.0) / lo) ** LOW_FREQUENCY_EXPONENT
        above = t.eps_im[-1] * (np.maximum(omega, hi) / hi) ** HIGH_FREQUENCY_EXPONENT
        return np.where(omega < lo, below, np.where(omega > hi, above, value))

    def eps_real_axis(self, omega: float) -> complex:
        t = self.table
        lo, hi = t.frequency_range
        if omega < lo or omega > hi:
            self._warn_extrapolation(omega)
        if omega < lo:
            real = t.eps_re[0]
        elif omega > hi:
            real = 1.0 + (t.eps_re[-1] - 1.0) * (hi / omega) ** 2
        else:
            real = float(np.interp(math.log(omega), np.log(t.omega), t.eps_re))
        return complex(real, float(self.absorption(np.array([omega]))[0]))

    def absorption_peaks(self) -> Tuple[float, ...]:
        return tuple(float(w) for w in self.table.omega)

    def _eps_imaginary_axis(self, xi: float) -> float:
        t = self.table
        lo, hi = t.frequency_range
        inner = kramers_kronig_segment(self, xi, lo, hi, t.omega, self._policy)
        return 1.0 + _below_table(t.eps_im[0], lo, xi) + inner + _above_table(
            t.eps_im[-1], hi, xi
        )


def _below_table(eps_im_lo: float, lo: float, xi: float) -> float:
    """(2/π)∫₀^lo ω·(b·ω)/(ω² + ξ²) dω with b = Im ε(lo)/lo."""
    b = eps_im_lo / lo
    if xi == 0:
        integral = b * lo
    else:
        integral = b * (lo - xi * math.atan(lo / xi))
    return 2.0 / math.pi * integral


def _above_table(eps_im_hi: float, hi: float, xi: float) -> float:
    """(2/π)∫_hi^∞ ω·A ω⁻³/(ω² + ξ²) dω with A = Im ε(hi)·hi³."""
    x = xi / hi
    if x < _TAIL_SERIES_THRESHOLD:
        x2 = x * x
        bracket = 1.0 / 3.0 - x2 / 5.0 + x2 * x2 / 7.0
    else:
        bracket = (1.0 - math.atan(x) / x) / (x * x)
    # A/hi³ = Im ε(hi)
    return 2.0 / math.pi * eps_im_hi * bracket
