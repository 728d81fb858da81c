import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from grapcas.errors import ValidationError
from grapcas.materials.permittivity import PermittivityModel, kramers_kronig
from grapcas.quadrature import QuadraturePolicy

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"
SILICA_OSCILLATORS = DATA_DIR / "silica_oscillators.json"


@dataclass(frozen=True)
class Oscillator:
    """One Lorentz term strength/(ω₀² − ω² − iγω); strength in rad²/s²."""

    strength: float
    omega0: float
    gamma: float = 0.0

    def __post_init__(self):
        violations = []
        if not self.strength > 0:
            violations.append(f"strength must be positive, got {self.strength}")
        if not self.omega0 > 0:
            violations.append(f"omega0 must be positive, got {self.omega0}")
        if not self.gamma >= 0:
            violations.append(f"gamma must be non-negative, got {self.gamma}")
        if violations:
            raise ValidationError(violations)

    @classmethod
    def from_weight(cls, weight: float, omega0: float, gamma: float = 0.0):
        """Build from the dimensionless static contribution strength/ω₀²."""
        return cls(strength=weight * omega0 * omega0, omega0=omega0, gamma=gamma)


class OscillatorModel(PermittivityModel):
    """
    ε(ω) = eps_inf + Σ strength/(ω₀² − ω² − iγω).

    On the imaginary axis the model is evaluated in closed form; the
    numerical Kramers–Kronig path stays available through `kramers_kronig`
    and agrees with it when eps_inf = 1.
    """

    name = "oscillator"
    description = "Lorentz oscillators, closed form on both axes"

    def __init__(
        self,
        eps_inf: float,
        oscillators: Sequence[Oscillator],
        label: Optional[str] = None,
        policy: Optional[QuadraturePolicy] = None,
    ):
        super().__init__(policy)
        if not eps_inf >= 1.0:
            raise ValidationError([f"eps_inf must be at least 1, got {eps_inf}"])
        self.eps_inf = float(eps_inf)
        self.oscillators: Tuple[Oscillator, ...] = tuple(oscillators)
        self.label = label or self.name
        self._strength = np.array([o.strength for o in self.oscillators])
        self._omega0 = np.array([o.omega0 for o in self.oscillators])
        self._gamma = np.array([o.gamma for o in self.oscillators])

    def __repr__(self) -> str:
        return (
            f"OscillatorModel(label={self.label!r}, eps_inf={self.eps_inf}, "
            f"oscillators={len(self.oscillators)})"
        )

    @classmethod
    def from_json(
        cls, path: Union[str, Path], policy: Optional[QuadraturePolicy] = None
    ) -> "OscillatorModel":
        """
        Load a model from JSON with keys `eps_inf` and `oscillators`, each
        oscillator given by `weight` (its static contribution), `omega0_rad_s`
        and `gamma_rad_s`.
        """
        path = Path(path)
        with open(path, "r") as f:
            data = json.load(f)
        try:
            oscillators = [
                Oscillator.from_weight(
                    o["weight"], o["omega0_rad_s"], o.get("gamma_rad_s", 0.0)
                )
                for o in data["oscillators"]
            ]
            eps_inf = data.get("eps_inf", 1.0)
        except (KeyError, TypeError) as e:
            logger.error(f"Malformed oscillator file {path}: {e}")
            raise ValidationError([f"{path}: malformed oscillator entry ({e})"])
        logger.debug(f"Loaded {len(oscillators)} oscillators from {path}")
        label = data.get("label", path.stem)
        return cls(eps_inf, oscillators, label=label, policy=policy)

    @classmethod
    def silica(cls, policy: Optional[QuadraturePolicy] = None) -> "OscillatorModel":
        """Bundled silica-like fit with three infrared and three ultraviolet terms."""
        return cls.from_json(SILICA_OSCILLATORS, policy=policy)

    @classmethod
    def is_available(cls) -> bool:
        return SILICA_OSCILLATORS.exists()

    def eps_real_axis(self, omega: float) -> complex:
        terms = self._strength / (
            self._omega0**2 - omega * omega - 1j * self._gamma * omega
        )
        return complex(self.eps_inf + terms.sum())

    def absorption(self, omega: np.ndarray) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)[..., None]
        detuning = self._omega0**2 - omega * omega
        damping = self._gamma * omega
        terms = self._strength * damping / (detuning * detuning + damping * damping)
        return terms.sum(axis=-1)

    def absorption_peaks(self) -> Tuple[float, ...]:
        peaks = []
        for o in self.oscillators:
            peaks.extend((o.omega0 - o.gamma, o.omega0, o.omega0 + o.gamma))
        return tuple(p for p in peaks if p > 0)

    def _eps_imaginary_axis(self, xi: float) -> float:
        terms = self._strength / (self._omega0**2 + xi * xi + self._gamma * xi)
        return float(self.eps_inf + terms.sum())

    def kramers_kronig(self, xi: float) -> float:
        """ε(iξ) from the numerical Kramers–Kronig transform of Im ε."""
        return kramers_kronig(self, xi, self._policy) + self.eps_inf - 1.0
