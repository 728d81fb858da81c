"""
grapcas Utils Package

Logging, configuration, unit conversion and result recording for grapcas.
"""

from .logger import setup_logger, setup_logger_from_config, level_from_name
from .recorders import RunManifest, Recorder, CSVRecorder, JSONRecorder
from . import config
from . import units

# Export all public symbols
__all__ = [
    # Logger utilities
    "setup_logger",
    "setup_logger_from_config",
    "level_from_name",
    # Result recorders
    "RunManifest",
    "Recorder",
    "CSVRecorder",
    "JSONRecorder",
    # Config module (as submodule)
    "config",
    # Units module (as submodule)
    "units",
]
