from __future__ import annotations

import logging
import time
from dataclasses import KW_ONLY, dataclass
from functools import wraps
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import TYPE_CHECKING, ParamSpec, TypeVar

if TYPE_CHECKING:
    import argparse
    from collections.abc import Callable


P = ParamSpec("P")
R = TypeVar("R")

CONSOLE_FORMAT = "{levelname:s}: {message:s}"
DEBUG_CONSOLE_FORMAT = (
    "[{relativeCreated:>9.0f}ms] {levelname:s} {name:s}: {message:s}"
)
FILE_FORMAT = (
    "[{asctime:s}.{msecs:03.0f}] [{levelname:s}] {module:s}: {message:s}"
)
PROGRESS_INTERVAL = 5.0

logger = logging.getLogger(__name__)


@dataclass
class LogFileOptions:
    path: Path
    _ = KW_ONLY
    max_kb: int = 512  # 0 for unbounded size and no rotation
    backup_count: int = 1  # 0 for no rolling backups
    level: int = logging.DEBUG
    append: bool = True

    def create_handler(self) -> logging.Handler:
        handler = RotatingFileHandler(
            self.path,
            mode="a" if self.append else "w",
            encoding="utf-8",
            maxBytes=self.max_kb * 1024,
            backupCount=self.backup_count,
        )
        handler.setLevel(self.level)
        handler.setFormatter(
            logging.Formatter(
                fmt=FILE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S", style="{"
            )
        )
        return handler


class SuppressFileOnly(logging.Filter):
    """Drops records logged with ``extra={"file_only": True}``."""

    def filter(self, record: logging.LogRecord) -> bool:
        return not getattr(record, "file_only", False)


def create_console_handler(level: int) -> logging.Handler:
    # stderr: stdout carries the reports
    handler = logging.StreamHandler()
    handler.setLevel(level)
    fmt = DEBUG_CONSOLE_FORMAT if level <= logging.DEBUG else CONSOLE_FORMAT
    handler.setFormatter(logging.Formatter(fmt=fmt, style="{"))
    handler.addFilter(SuppressFileOnly())
    return handler


def configure_logging_custom(
    console_level: int, log_file_options: LogFileOptions | None = None
) -> None:
    root_logger = logging.getLogger()
    root_logger.handlers = [create_console_handler(console_level)]
    global_level = console_level
    if log_file_options:
        global_level = min(global_level, log_file_options.level)
        root_logger.addHandler(log_file_options.create_handler())
    root_logger.setLevel(global_level)
    logger.debug(
        f"logging configured: console {logging.getLevelName(console_level)}"
        f", file {log_file_options.path if log_file_options else '-'}"
    )


def add_log_arguments(parser: argparse.ArgumentParser) -> None:
    log_group = parser.add_argument_group("logging")
    log_group.add_argument(
        "--log-file",
        metavar="FILE",
        help="Also write DEBUG logs to FILE (rotated at 512 KiB).",
    )
    log_verbosity_group = log_group.add_mutually_exclusive_group(
        required=False
    )
    log_verbosity_group.add_argument(
        "-v",
        "--verbose",
        action="store_const",
        dest="console_level",
        const=logging.INFO,
        help="Report closure and search progress (INFO).",
    )
    log_verbosity_group.add_argument(
        "-q",
        "--quiet",
        action="store_const",
        dest="console_level",
        const=logging.ERROR,
        help="Only log errors.  Overrides -v.",
    )
    log_verbosity_group.add_argument(
        "--debug",
        action="store_const",
        dest="console_level",
        const=logging.DEBUG,
        help="Log every BFS level and closure step.  Overrides -v and -q.",
    )


def configure_logging(args: argparse.Namespace) -> None:
    configure_logging_custom(
        console_level=args.console_level or logging.WARNING,
        log_file_options=(
            LogFileOptions(Path(args.log_file)) if args.log_file else None
        ),
    )


class ProgressLog:
    """Progress of a long loop. Every update goes out at DEBUG; at most one
    update per ``interval`` seconds is promoted to INFO."""

    def __init__(
        self,
        target: logging.Logger,
        label: str,
        *,
        interval: float = PROGRESS_INTERVAL,
    ) -> None:
        self.target = target
        self.label = label
        self.interval = interval
        self.started = self._last_info = time.monotonic()
        self.updates = 0

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self.started

    def update(self, message: str) -> None:
        self.updates += 1
        now = time.monotonic()
        level = logging.DEBUG
        if now - self._last_info >= self.interval:
            level, self._last_info = logging.INFO, now
        if self.target.isEnabledFor(level):
            self.target.log(
                level, f"{self.label}: {message} [{now - self.started:.1f}s]"
            )


def log_exceptions(
    *,
    logger: logging.Logger | None = None,
    message: str = "uncaught exception",
    file_only: bool = True,
) -> Callable[[Callable[P, R]], Callable[P, R]]:
    def decorator(function: Callable[P, R]) -> Callable[P, R]:
        target_logger = logger or logging.getLogger(function.__module__)

        @wraps(function)
        def wrapped(*args: P.args, **kwargs: P.kwargs) -> R:
            try:
                return function(*args, **kwargs)
            except Exception:
                target_logger.exception(
                    message, extra={"file_only": file_only}
                )
                raise

        return wrapped

    return decorator
