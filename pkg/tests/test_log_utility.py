from __future__ import annotations

import argparse
import logging
from typing import TYPE_CHECKING

import pytest

from bounded_powers.log_utility import (
    CONSOLE_FORMAT,
    DEBUG_CONSOLE_FORMAT,
    ProgressLog,
    SuppressFileOnly,
    add_log_arguments,
    configure_logging,
    create_console_handler,
    log_exceptions,
)

if TYPE_CHECKING:
    from pathlib import Path


def test_log_exceptions_logs_and_reraises(
    caplog: pytest.LogCaptureFixture,
) -> None:
    test_logger = logging.getLogger("tests.log_exceptions")

    @log_exceptions(logger=test_logger)
    def raises() -> None:
        message = "boom"
        raise ValueError(message)

    with (
        caplog.at_level(logging.ERROR, logger=test_logger.name),
        pytest.raises(ValueError, match="boom"),
    ):
        raises()

    assert len(caplog.records) == 1
    record = caplog.records[0]
    assert record.levelname == "ERROR"
    assert record.message == "uncaught exception"
    assert getattr(record, "file_only", False) is True


def test_log_exceptions_returns_normal_result() -> None:
    @log_exceptions()
    def returns_value(value: int) -> int:
        return value + 1

    assert returns_value(4) == 5


def _parse(argv: list[str]) -> argparse.Namespace:
    parser = argparse.ArgumentParser()
    add_log_arguments(parser)
    return parser.parse_args(argv)


@pytest.mark.parametrize(
    "argv,level",
    [
        ([], None),
        (["-v"], logging.INFO),
        (["--quiet"], logging.ERROR),
        (["--debug"], logging.DEBUG),
    ],
)
def test_log_arguments_set_console_level(
    argv: list[str], level: int | None
) -> None:
    assert _parse(argv).console_level == level


def test_log_verbosity_flags_are_exclusive() -> None:
    with pytest.raises(SystemExit):
        _parse(["-v", "-q"])


def test_suppress_file_only_filter() -> None:
    record = logging.LogRecord("x", logging.ERROR, "", 0, "m", None, None)
    assert SuppressFileOnly().filter(record)
    record.__dict__["file_only"] = True
    assert not SuppressFileOnly().filter(record)


def test_configure_logging_writes_log_file(tmp_path: Path) -> None:
    log_file = tmp_path / "run.log"
    root = logging.getLogger()
    saved = (root.handlers[:], root.level)
    try:
        configure_logging(_parse(["-q", "--log-file", str(log_file)]))
        assert root.level == logging.DEBUG
        logging.getLogger("bounded_powers.tests").debug("closure step")
        for handler in root.handlers:
            handler.flush()
        assert "closure step" in log_file.read_text(encoding="utf-8")
    finally:
        for handler in root.handlers:
            handler.close()
        root.handlers, level = saved
        root.setLevel(level)


@pytest.mark.parametrize(
    "level,fmt",
    [
        (logging.DEBUG, DEBUG_CONSOLE_FORMAT),
        (logging.INFO, CONSOLE_FORMAT),
        (logging.ERROR, CONSOLE_FORMAT),
    ],
)
def test_console_handler_format(level: int, fmt: str) -> None:
    handler = create_console_handler(level)
    assert handler.level == level
    assert handler.formatter is not None
    assert handler.formatter._fmt == fmt
    assert any(isinstance(f, SuppressFileOnly) for f in handler.filters)


def test_progress_log_promotes_after_interval(
    caplog: pytest.LogCaptureFixture,
) -> None:
    target = logging.getLogger("tests.progress")
    progress = ProgressLog(target, "S3^4 BFS", interval=0.0)
    with caplog.at_level(logging.DEBUG, logger=target.name):
        progress.update("level 1 adds 8 states")
    assert progress.updates == 1
    (record,) = caplog.records
    assert record.levelno == logging.INFO
    assert record.message.startswith("S3^4 BFS: level 1 adds 8 states [")


def test_progress_log_stays_at_debug_within_interval(
    caplog: pytest.LogCaptureFixture,
) -> None:
    target = logging.getLogger("tests.progress")
    progress = ProgressLog(target, "closure", interval=3600.0)
    with caplog.at_level(logging.DEBUG, logger=target.name):
        progress.update("layer 1")
        progress.update("layer 2")
    assert [r.levelno for r in caplog.records] == [logging.DEBUG] * 2
    assert progress.elapsed >= 0.0


def test_progress_log_skips_disabled_levels(
    caplog: pytest.LogCaptureFixture,
) -> None:
    target = logging.getLogger("tests.progress")
    progress = ProgressLog(target, "search", interval=3600.0)
    with caplog.at_level(logging.INFO, logger=target.name):
        progress.update("65536 words")
    assert not caplog.records
    assert progress.updates == 1
