from __future__ import annotations

import json
import logging
import os
import re
from pathlib import Path
from typing import TextIO, TypeAlias, cast

from .errors import InputError

logger = logging.getLogger(__name__)

TextProvider: TypeAlias = str | Path | TextIO | list[str]
# NOTE: must quote recursive type aliases even with future annotations
JsonValue: TypeAlias = (
    dict[str, "JsonValue"]
    | list["JsonValue"]
    | str
    | int
    | float
    | bool
    | None
)


class JsonSyntaxError(InputError):
    def __init__(self, *, source_name: str, detail: str) -> None:
        super().__init__(f"Could not parse JSON from {source_name}: {detail}")
        self.source_name = source_name
        self.detail = detail


class ValueSyntaxError(InputError):
    def __init__(self, value: str, *, expected: str) -> None:
        super().__init__(f"Could not parse {value!r} as {expected}")
        self.value = value
        self.expected = expected


def get_text(source: TextProvider) -> str:
    """Return the full text from any supported TextProvider."""
    if isinstance(source, str):
        return source
    if isinstance(source, list):
        return os.linesep.join(source)
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8")
    return source.read()  # TextIO


def describe_source(source: TextProvider) -> str:
    if isinstance(source, Path):
        return str(source)
    return f"<{type(source).__name__}>"


_JSON5_COMMENT_PATTERN = re.compile(
    r"""
    (                               # 1: double-quoted string
        "(?:\\.|[^"\\])*"
    )
  | (                               # 2: single-quoted string
        '(?:\\.|[^'\\])*'
    )
  | (?:[ \t]*//[^\r\n]*)            # remove spaces + single-line comment
  | (?:[ \t]*/\*.*?\*/)             # remove spaces + block comment (ungreedy)
    """,
    re.VERBOSE | re.DOTALL,
)


def json5_load(source: TextProvider) -> JsonValue:
    """Decode JSON that may carry comments and trailing commas.

    Catalog and configuration files are written by hand, so both are
    accepted; everything else must be strict JSON.
    """

    def comment_replacer(match: re.Match[str]) -> str:
        return match.group(1) or match.group(2) or ""

    no_comments = _JSON5_COMMENT_PATTERN.sub(
        comment_replacer, get_text(source)
    )
    try:
        return cast(
            "JsonValue",
            json.loads(re.sub(r",(?=\s*[\]}])", "", no_comments)),
        )
    except json.JSONDecodeError as error:
        logger.debug(f"JSON decode failure: {error}")
        raise JsonSyntaxError(
            source_name=describe_source(source), detail=str(error)
        ) from error


def dump_json(value: object) -> str:
    """Stable rendering: sorted keys, fixed separators, trailing newline."""
    return json.dumps(value, sort_keys=True, indent=2) + "\n"


def parse_positive_int(value: str) -> int:
    """argparse ``type=`` helper accepting integers >= 1."""
    try:
        parsed = int(value)
    except ValueError:
        raise ValueSyntaxError(value, expected="an integer") from None
    if parsed < 1:
        raise ValueSyntaxError(value, expected="an integer >= 1")
    return parsed
