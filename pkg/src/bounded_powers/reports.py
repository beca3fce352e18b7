from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, TextIO

from . import __version__
from .parsing import dump_json

if TYPE_CHECKING:
    from collections.abc import Iterator

    from .parsing import JsonValue

logger = logging.getLogger(__name__)


@dataclass
class Stopwatch:
    seconds: float = 0.0


@contextmanager
def stopwatch() -> Iterator[Stopwatch]:
    watch = Stopwatch()
    start = time.perf_counter()
    try:
        yield watch
    finally:
        watch.seconds = time.perf_counter() - start


@dataclass(frozen=True)
class RunReport:
    """One command's output; equal inputs and seed give equal reports.

    ``elapsed`` is left out of comparisons and out of ``to_json`` unless
    asked for.
    """

    command: str
    inputs: dict[str, JsonValue]
    results: JsonValue
    passed: bool = True
    seed: int | None = None
    elapsed: float = field(default=0.0, compare=False)
    version: str = __version__

    def to_json(self, *, timing: bool = False) -> dict[str, JsonValue]:
        result: dict[str, JsonValue] = {
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "passed": self.passed,
            "seed": self.seed,
            "version": self.version,
        }
        if timing:
            result["timing"] = {"seconds": round(self.elapsed, 3)}
        return result

    def render_text(self) -> str:
        lines = [f"{self.command} ({'pass' if self.passed else 'FAIL'})"]
        lines.extend(_text_lines(self.inputs, indent=1))
        lines.extend(_text_lines(self.results, indent=1))
        return "\n".join(lines) + "\n"

    def emit(
        self, stream: TextIO, *, as_json: bool, timing: bool = False
    ) -> None:
        if as_json:
            stream.write(dump_json(self.to_json(timing=timing)))
        else:
            stream.write(self.render_text())
        logger.debug(f"{self.command} report written in {self.elapsed:.3f}s")


def _is_scalar(value: JsonValue) -> bool:
    return not isinstance(value, dict | list)


def _text_lines(value: JsonValue, *, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(value, dict):
        lines = []
        for key, item in value.items():
            if _is_scalar(item) or (
                isinstance(item, list) and all(map(_is_scalar, item))
            ):
                lines.append(f"{pad}{key}: {_inline(item)}")
            else:
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(item, indent=indent + 1))
        return lines
    if isinstance(value, list):
        lines = []
        for item in value:
            if _is_scalar(item):
                lines.append(f"{pad}- {_inline(item)}")
            else:
                lines.append(f"{pad}-")
                lines.extend(_text_lines(item, indent=indent + 1))
        return lines
    return [f"{pad}{_inline(value)}"]


def _inline(value: JsonValue) -> str:
    if isinstance(value, list):
        return "[" + ", ".join(_inline(item) for item in value) + "]"
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)
