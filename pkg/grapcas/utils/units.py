"""
Unit conversion and validation utilities for grapcas.

Inputs arrive in laboratory units (eV for energies, µm for separations, K for
temperatures, and frequencies as rad/s or their energy equivalent ħω in eV or
k_BT in K); all numerical work happens in SI. This module converts between
the two and validates unit names found in configuration files.
"""

import logging
from enum import Enum
from typing import Any, Dict

from scipy import constants as sc

logger = logging.getLogger(__name__)


class EnergyUnit(Enum):
    """Supported energy units."""

    JOULES = "J"
    ELECTRONVOLTS = "eV"
    MILLIELECTRONVOLTS = "meV"


class LengthUnit(Enum):
    """Supported length units."""

    METERS = "m"
    MICROMETERS = "um"
    NANOMETERS = "nm"


class TemperatureUnit(Enum):
    """Supported temperature units."""

    KELVIN = "K"


class FrequencyUnit(Enum):
    """Supported angular frequency units; eV and K stand for ħω and k_B·T."""

    RAD_PER_S = "rad/s"
    ELECTRONVOLTS = "eV"
    KELVIN = "K"


# Conversion factors to base units (J, m, rad/s)
ENERGY_CONVERSIONS = {
    EnergyUnit.JOULES: 1.0,
    EnergyUnit.ELECTRONVOLTS: sc.electron_volt,
    EnergyUnit.MILLIELECTRONVOLTS: 1e-3 * sc.electron_volt,
}

LENGTH_CONVERSIONS = {
    LengthUnit.METERS: 1.0,
    LengthUnit.MICROMETERS: 1e-6,
    LengthUnit.NANOMETERS: 1e-9,
}

# Angular frequency in rad/s of one unit
FREQUENCY_CONVERSIONS = {
    FrequencyUnit.RAD_PER_S: 1.0,
    FrequencyUnit.ELECTRONVOLTS: sc.electron_volt / sc.hbar,
    FrequencyUnit.KELVIN: sc.k / sc.hbar,
}

# Scenario keys carrying a unit suffix, mapped to the unit they are given in
SCENARIO_KEY_UNITS = {
    "separation_um": LengthUnit.MICROMETERS,
    "t1_K": TemperatureUnit.KELVIN,
    "t2_K": TemperatureUnit.KELVIN,
    "tenv_K": TemperatureUnit.KELVIN,
    "delta_eV": EnergyUnit.ELECTRONVOLTS,
    "mu_eV": EnergyUnit.ELECTRONVOLTS,
}


class UnitConverter:
    """Utility class for unit conversions and validations."""

    @staticmethod
    def convert_energy(value: float, from_unit: str, to_unit: str) -> float:
        """
        Convert energy between different units.

        Args:
            value: The energy value to convert
            from_unit: Source unit (e.g., "eV", "J")
            to_unit: Target unit (e.g., "J", "meV")

        Returns:
            Converted energy value

        Raises:
            ValueError: If units are not supported
        """
        try:
            from_enum = EnergyUnit(from_unit)
            to_enum = EnergyUnit(to_unit)
        except ValueError as e:
            raise ValueError(f"Unsupported energy unit: {e}")

        joules = value * ENERGY_CONVERSIONS[from_enum]
        return joules / ENERGY_CONVERSIONS[to_enum]

    @staticmethod
    def convert_length(value: float, from_unit: str, to_unit: str) -> float:
        """
        Convert length between different units.

        Args:
            value: The length to convert
            from_unit: Source unit (e.g., "um", "nm")
            to_unit: Target unit (e.g., "m")

        Returns:
            Converted length

        Raises:
            ValueError: If units are not supported
        """
        try:
            from_enum = LengthUnit(from_unit)
            to_enum = LengthUnit(to_unit)
        except ValueError as e:
            raise ValueError(f"Unsupported length unit: {e}")

        meters = value * LENGTH_CONVERSIONS[from_enum]
        return meters / LENGTH_CONVERSIONS[to_enum]

    @staticmethod
    def convert_frequency(value: float, from_unit: str, to_unit: str) -> float:
        """
        Convert an angular frequency between rad/s, eV (ħω) and K (ħω/k_B).

        Raises:
            ValueError: If units are not supported
        """
        try:
            from_enum = FrequencyUnit(from_unit)
            to_enum = FrequencyUnit(to_unit)
        except ValueError as e:
            raise ValueError(f"Unsupported frequency unit: {e}")

        rad_per_s = value * FREQUENCY_CONVERSIONS[from_enum]
        return rad_per_s / FREQUENCY_CONVERSIONS[to_enum]

    @staticmethod
    def energy_to_angular_frequency(value: float, unit: str = "eV") -> float:
        """Angular frequency ω = E/ħ in rad/s of a photon energy given in `unit`."""
        ev = UnitConverter.convert_energy(value, unit, EnergyUnit.ELECTRONVOLTS.value)
        return UnitConverter.convert_frequency(
            ev, FrequencyUnit.ELECTRONVOLTS.value, FrequencyUnit.RAD_PER_S.value
        )

    @staticmethod
    def angular_frequency_to_energy(omega: float, unit: str = "eV") -> float:
        """Photon energy ħω of an angular frequency in rad/s, expressed in `unit`."""
        ev = UnitConverter.convert_frequency(
            omega, FrequencyUnit.RAD_PER_S.value, FrequencyUnit.ELECTRONVOLTS.value
        )
        return UnitConverter.convert_energy(ev, EnergyUnit.ELECTRONVOLTS.value, unit)

    @staticmethod
    def validate_scenario_units(config: Dict[str, Any]) -> bool:
        """
        Validate that the unit-suffixed scenario values are finite numbers.

        Args:
            config: Configuration dictionary with an optional `scenario` section

        Returns:
            True if all values are usable

        Raises:
            ValueError: If a value is not a real number
        """
        scenario = config.get("scenario", {})
        for key, unit in SCENARIO_KEY_UNITS.items():
            if key not in scenario:
                continue
            value = scenario[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(
                    f"Invalid {key}: expected a number in {unit.value}, got {value!r}"
                )
        vf_over_c = scenario.get("vf_over_c")
        if vf_over_c is not None and (
            isinstance(vf_over_c, bool)
            or not isinstance(vf_over_c, (int, float))
            or not 0 < vf_over_c < 1
        ):
            raise ValueError(f"Invalid vf_over_c: must lie in (0, 1), got {vf_over_c}")
        return True


# Public API
__all__ = [
    "EnergyUnit",
    "LengthUnit",
    "TemperatureUnit",
    "FrequencyUnit",
    "SCENARIO_KEY_UNITS",
    "UnitConverter",
]
