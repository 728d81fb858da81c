"""
Logging setup for command-line runs.

Library modules only call `logging.getLogger(__name__)`; handlers are attached
here, once per run, to the `grapcas` logger.
"""

import logging
import os
import sys
from pathlib import Path
from typing import Any, Mapping, Optional, TextIO

__all__ = ["setup_logger", "setup_logger_from_config", "level_from_name"]

_DEFAULT_FORMATTER = logging.Formatter(
    "%(asctime)s - %(levelname)s - %(name)s - %(processName)s - %(message)s"
)
_DEFAULT_LOG_DIR = Path.cwd() / ".grapcas_logs"
LOG_FILE_NAME = "grapcas.log"


def _attach(
    logger: logging.Logger,
    handler: logging.Handler,
    level: int,
    formatter: logging.Formatter,
) -> None:
    handler.setLevel(level)
    handler.setFormatter(formatter)
    logger.addHandler(handler)


def _stream(stream: TextIO) -> logging.Handler:
    return logging.StreamHandler(stream)


def setup_logger(
    logger: logging.Logger,
    log_dir: os.PathLike = _DEFAULT_LOG_DIR,
    log_file_name: str = LOG_FILE_NAME,
    mode: str = "a",
    formatter: logging.Formatter = _DEFAULT_FORMATTER,
    logging_level: int = logging.INFO,
    to_std_streams: bool = False,
) -> logging.Logger:
    """
    Route `logger` to `log_dir/log_file_name`, replacing its previous handlers.

    With `to_std_streams`, records at `logging_level` also go to stdout and
    errors to stderr.
    """
    logger = _reset_logger(logger)
    Path(log_dir).mkdir(parents=True, exist_ok=True)
    logger.setLevel(logging_level)

    log_file = Path(log_dir) / log_file_name
    _attach(logger, logging.FileHandler(log_file, mode=mode), logging_level, formatter)
    if to_std_streams:
        _attach(logger, _stream(sys.stdout), logging_level, formatter)
        _attach(logger, _stream(sys.stderr), logging.ERROR, formatter)

    logger.info("grapcas logger created ...")
    logger.debug(f"Log file: {log_file}")
    return logger


def setup_logger_from_config(
    section: Mapping[str, Any],
    verbose: bool = False,
    logger: Optional[logging.Logger] = None,
) -> logging.Logger:
    """Configure the `grapcas` logger from the `logger` config section."""
    formatter = _DEFAULT_FORMATTER
    if "format" in section:
        formatter = logging.Formatter(section["format"], section.get("datefmt"))
    return setup_logger(
        logger if logger is not None else logging.getLogger("grapcas"),
        log_dir=Path(section.get("log_directory", _DEFAULT_LOG_DIR)),
        formatter=formatter,
        logging_level=level_from_name(section.get("level", "INFO")),
        to_std_streams=verbose,
    )


def level_from_name(name: str) -> int:
    level = logging.getLevelName(str(name).upper())
    if not isinstance(level, int):
        raise ValueError(f"Unsupported logging level: {name}")
    return level


def _reset_logger(logger: logging.Logger) -> logging.Logger:
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    return logger
