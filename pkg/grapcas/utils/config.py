"""
Configuration module for grapcas.

This module loads configuration from config.json, validates the quadrature and
scenario sections, reads scenario files and turns a scenario section into a
validated `Scenario`.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from grapcas.errors import ConfigurationError
from grapcas.quadrature import QuadraturePolicy
from grapcas.utils.units import UnitConverter

# Public API
__all__ = [
    "load_config",
    "validate_config",
    "load_scenario_file",
    "scenario_from_config",
    "tensor_policy_from_config",
    "SCENARIO_KEYS",
]


# Default configuration path
_CONFIG_FILE_PATH = Path(__file__).parent.parent / "config.json"

logger = logging.getLogger(__name__)

_FLOAT_KEYS = (
    "separation_um",
    "t1_K",
    "t2_K",
    "tenv_K",
    "delta_eV",
    "mu_eV",
    "vf_over_c",
)
SCENARIO_KEYS = _FLOAT_KEYS + ("substrate", "coated", "allow_t1_offset")

_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}


def load_config(config_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Load configuration from JSON file.

    Args:
        config_path: Path to the configuration file. If None, uses the packaged
                    config.json.

    Returns:
        Dictionary containing the configuration data.

    Raises:
        FileNotFoundError: If the configuration file doesn't exist.
        json.JSONDecodeError: If the configuration file contains invalid JSON.
    """
    if config_path is None:
        config_path = _CONFIG_FILE_PATH
    else:
        config_path = Path(config_path)

    if not config_path.exists():
        raise FileNotFoundError(f"Configuration file not found: {config_path}")

    try:
        with open(config_path, "r", encoding="utf-8") as config_file:
            config_data = json.load(config_file)

        logger.debug(f"Configuration loaded from: {config_path}")

        return config_data

    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in configuration file {config_path}: {e}")
        raise


def _validate_quadrature(section: Dict[str, Any]) -> None:
    rel_tol = section.get("rel_tol", 1e-7)
    if not isinstance(rel_tol, (int, float)) or not 0 < rel_tol <= 1e-2:
        raise ConfigurationError(
            f"Invalid rel_tol: must lie in (0, 1e-2], got {rel_tol}"
        )
    budget = section.get("max_subdivisions", 400)
    if not isinstance(budget, int) or budget < 8:
        raise ConfigurationError(
            f"Invalid max_subdivisions: must be an integer >= 8, got {budget}"
        )
    terms = section.get("matsubara_max_terms", 1)
    if not isinstance(terms, int) or terms < 1:
        raise ConfigurationError(
            f"Invalid matsubara_max_terms: must be a positive integer, got {terms}"
        )


def validate_config(config_data: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Validate and normalize configuration data.

    This function:
    1. Validates the quadrature tolerances and budgets
    2. Validates the unit-suffixed scenario values
    3. Normalizes `coated` to one flag per plate

    Args:
        config_data: Configuration data to validate. If None, uses the packaged
                    defaults.

    Returns:
        Validated and normalized configuration dictionary

    Raises:
        ConfigurationError: If the quadrature section is invalid
        ValueError: If a scenario value is invalid
    """
    if config_data is None:
        config_data = load_config()

    validated_config = config_data.copy()

    try:
        _validate_quadrature(validated_config.get("quadrature", {}))
        UnitConverter.validate_scenario_units(validated_config)
        if "scenario" in validated_config:
            scenario = dict(validated_config["scenario"])
            if "coated" in scenario:
                scenario["coated"] = list(_coated_flags(scenario["coated"]))
            validated_config["scenario"] = scenario

        logger.debug("Configuration validation completed successfully")
        return validated_config

    except Exception as e:
        logger.error(f"Configuration validation failed: {e}")
        raise


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _coated_flags(value: Any) -> Tuple[bool, bool]:
    """One flag for both plates, or one per plate."""
    if isinstance(value, bool):
        return value, value
    if isinstance(value, str):
        parts = [p for p in value.replace(",", " ").split() if p]
        flags = [_parse_bool(p) for p in parts]
    elif isinstance(value, (list, tuple)):
        flags = [v if isinstance(v, bool) else _parse_bool(str(v)) for v in value]
    else:
        raise ConfigurationError(f"Invalid coated value: {value!r}")
    if len(flags) == 1:
        return flags[0], flags[0]
    if len(flags) != 2:
        raise ConfigurationError(f"coated takes one or two flags, got {value!r}")
    return flags[0], flags[1]


def _parse_flat(text: str, path: Path) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        separators = [i for i in (line.find("="), line.find(":")) if i >= 0]
        if not separators:
            raise ConfigurationError(
                f"{path}, line {number}: expected 'key = value'"
            )
        cut = min(separators)
        key, value = line[:cut].strip(), line[cut + 1 :].strip()
        if key not in SCENARIO_KEYS:
            raise ConfigurationError(f"{path}, line {number}: unknown key {key!r}")
        try:
            if key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key == "coated":
                values[key] = list(_coated_flags(value))
            elif key == "allow_t1_offset":
                values[key] = _parse_bool(value)
            else:
                values[key] = value
        except ValueError as e:
            raise ConfigurationError(f"{path}, line {number}: invalid {key}: {e}")
    return values


def load_scenario_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a scenario file.

    Flat text files hold one `key = value` (or `key: value`) pair per line with
    `#` comments; JSON files hold either a `scenario` object or a flat object.

    Returns:
        The scenario section, with `coated` normalized to two flags.

    Raises:
        FileNotFoundError: If the file does not exist.
        ConfigurationError: On unknown keys or unparsable values.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Scenario file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            logger.error(f"Invalid JSON in scenario file {path}: {e}")
            raise ConfigurationError(f"{path}: invalid JSON ({e})")
        section = dict(data.get("scenario", data))
        unknown = sorted(set(section) - set(SCENARIO_KEYS))
        if unknown:
            raise ConfigurationError(f"{path}: unknown keys {unknown}")
        if "coated" in section:
            section["coated"] = list(_coated_flags(section["coated"]))
    else:
        section = _parse_flat(text, path)
    UnitConverter.validate_scenario_units({"scenario": section})
    logger.debug(f"Scenario loaded from {path}: {section}")
    return section


def scenario_from_config(
    section: Dict[str, Any],
    substrate: Any = None,
    tensor_policy: Optional[QuadraturePolicy] = None,
):
    """
    Build a validated `Scenario` from a scenario section in laboratory units.

    Args:
        section: Scenario values; every key of the packaged defaults is required.
        substrate: Permittivity model overriding `section["substrate"]`.
        tensor_policy: Quadrature policy of the graphene tensor.

    Raises:
        ConfigurationError: On missing keys or an unknown substrate.
        ValidationError: If the scenario violates an invariant.
    """
    from grapcas.constants import GrapheneSheet, Scenario, validate_scenario
    from grapcas.fresnel import CoatedPlate
    from grapcas.materials import resolve_substrate

    required = [k for k in _FLOAT_KEYS + ("substrate",) if k not in section]
    if required:
        raise ConfigurationError(f"Scenario is missing keys: {required}")
    model = substrate
    if model is None:
        model = resolve_substrate(section["substrate"])
    coated = _coated_flags(section.get("coated", True))
    t1, t2 = float(section["t1_K"]), float(section["t2_K"])
    sheet = GrapheneSheet.from_lab_units(
        delta_ev=float(section["delta_eV"]),
        mu_ev=float(section["mu_eV"]),
        vf_over_c=float(section["vf_over_c"]),
    )
    plates: List[Any] = []
    for flag, temperature in zip(coated, (t1, t2)):
        plates.append(
            CoatedPlate(
                model,
                sheet if flag else None,
                temperature=temperature,
                tensor_policy=tensor_policy,
            )
        )
    separation = UnitConverter.convert_length(
        float(section["separation_um"]), "um", "m"
    )
    scenario = Scenario(
        separation=separation,
        t1=t1,
        t2=t2,
        t_env=float(section["tenv_K"]),
        plate1=plates[0],
        plate2=plates[1],
        allow_t1_offset=bool(section.get("allow_t1_offset", False)),
    )
    return validate_scenario(scenario)


def tensor_policy_from_config(section: Dict[str, Any]) -> Optional[QuadraturePolicy]:
    """Policy of the graphene tensor integrals, or None for the built-in one."""
    if "tensor_rel_tol" not in section:
        return None
    return QuadraturePolicy(
        rel_tol=float(section["tensor_rel_tol"]),
        max_subdivisions=int(section.get("max_subdivisions", 400)),
    )
