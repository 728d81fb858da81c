"""
Utility functions for permittivity model management.

This module provides functional utilities for discovering the registered
permittivity models and for resolving the substrate named in a scenario.
"""

import logging
import os
from pathlib import Path
from typing import Any, List, Optional, Type, Union

from tabulate import tabulate

from grapcas import materials
from grapcas.errors import ConfigurationError
from grapcas.materials.oscillator import OscillatorModel
from grapcas.materials.permittivity import PermittivityModel
from grapcas.materials.tabulated import TabulatedModel
from grapcas.quadrature import QuadraturePolicy

__all__ = [
    "DATA_DIR_ENV",
    "get_model_types",
    "get_available_model_types",
    "get_model_table",
    "resolve_substrate",
]

logger = logging.getLogger(__name__)

DATA_DIR_ENV = "CASIMIR_DATA_DIR"

BUILTIN_SUBSTRATES = {
    "silica": OscillatorModel.silica,
    "sio2": OscillatorModel.silica,
}


def get_model_types(module: Optional[Any] = None) -> List[Type[PermittivityModel]]:
    """
    Get all PermittivityModel subclasses from the given module.

    Args:
        module: The module to search; defaults to `grapcas.materials`.
    """
    if module is None:
        module = materials

    candidates = [
        getattr(module, name)
        for name in dir(module)
        if isinstance(getattr(module, name), type)
    ]
    model_types = filter(
        lambda x: issubclass(x, PermittivityModel) and x is not PermittivityModel,
        candidates,
    )
    return sorted(model_types, key=lambda x: x.name)


def get_available_model_types() -> List[Type[PermittivityModel]]:
    """Model types that can be built without user-supplied data."""
    return [t for t in get_model_types() if t.is_available()]


def get_model_table() -> str:
    """
    Registered models and built-in substrates in a tabular format.
    """
    table = []
    headers = ["Model", "Description", "Built-in"]
    for model_type in get_model_types():
        builtin = "Yes" if model_type.is_available() else "No (needs a data file)"
        table.append([model_type.name, model_type.description, builtin])
    for name in sorted(BUILTIN_SUBSTRATES):
        model = BUILTIN_SUBSTRATES[name]()
        table.append([name, f"built-in substrate, {model.summary()}", "Yes"])
    return tabulate(table, headers, tablefmt="pretty")


def _search_paths(name: str) -> List[Path]:
    path = Path(name).expanduser()
    if path.is_absolute():
        return [path]
    candidates = [Path.cwd() / path]
    data_dir = os.getenv(DATA_DIR_ENV)
    if data_dir:
        candidates.append(Path(data_dir).expanduser() / path)
    return candidates


def resolve_substrate(
    substrate: Union[str, Path, PermittivityModel],
    policy: Optional[QuadraturePolicy] = None,
) -> PermittivityModel:
    """
    Turn a scenario's substrate entry into a permittivity model.

    Accepts a model instance, a built-in name (`silica`), a JSON oscillator
    file or an optical-data table. Relative paths are looked up in the
    working directory and then in $CASIMIR_DATA_DIR.

    Raises:
        ConfigurationError: If nothing matches the name.
    """
    if isinstance(substrate, PermittivityModel):
        return substrate
    name = str(substrate)
    builder = BUILTIN_SUBSTRATES.get(name.lower())
    if builder is not None:
        return builder(policy=policy)

    for path in _search_paths(name):
        if path.is_file():
            logger.info(f"Using substrate data from {path}")
            if path.suffix.lower() == ".json":
                return OscillatorModel.from_json(path, policy=policy)
            return TabulatedModel.from_file(path, policy=policy)
    message = (
        f"Unknown substrate {name!r}: not a built-in model "
        f"({', '.join(sorted(BUILTIN_SUBSTRATES))}) and no such file"
    )
    logger.error(message)
    raise ConfigurationError(message)
