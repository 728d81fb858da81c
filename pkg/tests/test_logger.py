"""Tests for grapcas.utils.logger."""

import logging
from unittest.mock import patch

import pytest

from grapcas.utils import setup_logger, setup_logger_from_config
from grapcas.utils.logger import LOG_FILE_NAME, level_from_name


@pytest.fixture
def fresh_logger(request):
    logger = logging.getLogger(f"grapcas.test.{request.node.name}")
    yield logger
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


class TestSetupLogger:
    def test_creates_nested_log_dir(self, tmp_path, fresh_logger):
        log_dir = tmp_path / "a" / "b"
        setup_logger(fresh_logger, log_dir=log_dir, log_file_name="run.log")
        assert (log_dir / "run.log").is_file()

    def test_announces_itself_with_default_format(self, tmp_path, fresh_logger):
        setup_logger(fresh_logger, log_dir=tmp_path, log_file_name="run.log")
        content = (tmp_path / "run.log").read_text()
        assert (
            f"INFO - {fresh_logger.name} - MainProcess - grapcas logger created ..."
            in content
        )

    def test_debug_records_follow_level(self, tmp_path, fresh_logger):
        setup_logger(
            fresh_logger,
            log_dir=tmp_path,
            log_file_name="run.log",
            logging_level=logging.DEBUG,
        )
        assert "Log file:" in (tmp_path / "run.log").read_text()

    def test_repeated_setup_keeps_one_handler(self, tmp_path, fresh_logger):
        setup_logger(fresh_logger, log_dir=tmp_path, log_file_name="a.log")
        setup_logger(fresh_logger, log_dir=tmp_path, log_file_name="b.log")
        assert len(fresh_logger.handlers) == 1
        assert fresh_logger.handlers[0].baseFilename.endswith("b.log")

    def test_std_streams_add_stdout_and_stderr(self, tmp_path, fresh_logger):
        setup_logger(
            fresh_logger, log_dir=tmp_path, log_file_name="s.log", to_std_streams=True
        )
        levels = sorted(handler.level for handler in fresh_logger.handlers)
        assert levels == [logging.INFO, logging.INFO, logging.ERROR]

    def test_resets_previous_handlers(self, tmp_path, fresh_logger):
        with patch(
            "grapcas.utils.logger._reset_logger", return_value=fresh_logger
        ) as mock_reset:
            setup_logger(fresh_logger, log_dir=tmp_path, log_file_name="r.log")
            mock_reset.assert_called_once_with(fresh_logger)


class TestSetupFromConfig:
    def test_uses_section_values(self, tmp_path, fresh_logger):
        section = {
            "level": "warning",
            "format": "%(levelname)s|%(message)s",
            "log_directory": str(tmp_path / "logs"),
        }
        logger = setup_logger_from_config(section, logger=fresh_logger)
        assert logger.level == logging.WARNING
        logger.warning("scan point failed")
        content = (tmp_path / "logs" / LOG_FILE_NAME).read_text()
        assert "WARNING|scan point failed" in content
        # INFO announcement is below the configured level
        assert "grapcas logger created" not in content

    def test_verbose_forwards_to_std_streams(self, tmp_path, fresh_logger):
        section = {"log_directory": str(tmp_path)}
        logger = setup_logger_from_config(section, verbose=True, logger=fresh_logger)
        assert len(logger.handlers) == 3

    def test_bad_level_is_rejected(self, tmp_path, fresh_logger):
        section = {"level": "chatty", "log_directory": str(tmp_path)}
        with pytest.raises(ValueError, match="Unsupported logging level"):
            setup_logger_from_config(section, logger=fresh_logger)


def test_level_from_name():
    assert level_from_name("debug") == logging.DEBUG
    assert level_from_name("WARNING") == logging.WARNING
    with pytest.raises(ValueError, match="Unsupported logging level"):
        level_from_name("chatty")
