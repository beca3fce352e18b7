from __future__ import annotations

from collections import deque
from types import UnionType
from typing import (
    TYPE_CHECKING,
    Any,
    TypeVar,
    Union,
    cast,
    get_args,
    get_origin,
)

from .errors import InputError

if TYPE_CHECKING:
    from collections.abc import Iterator, Mapping


T = TypeVar("T")


class InvalidTypeError(InputError, TypeError):
    """Raised when a decoded value's type does not match the expected type."""

    def __init__(
        self,
        value: object,
        *,
        expected_type: type[Any] | UnionType,
        where: str = "value",
    ) -> None:
        super().__init__(
            f"{where}: expected {expected_type}, "
            f"got {type(value).__name__} ({value!r})"
        )
        self.expected_type = expected_type
        self.value = value
        self.where = where


class ParameterizedTypeNotSupportedError(TypeError):
    """Raised when verify_type receives a parameterized generic."""

    def __init__(self, expected_type: object) -> None:
        super().__init__(
            "Parameterized generics are not supported by verify_type: "
            f"{expected_type}. Use an unparameterized runtime type instead."
        )
        self.expected_type = expected_type


class MissingFieldError(InputError, KeyError):
    def __init__(self, key: str, *, where: str) -> None:
        super().__init__(f"{where}: missing required field {key!r}")
        self.key = key
        self.where = where

    def __str__(self) -> str:
        return str(self.args[0])


def iterate_types(*source_types: type | UnionType) -> Iterator[type]:
    stack = deque(source_types)
    seen: set[type] = set()
    while stack:
        current = stack.popleft()
        if isinstance(current, UnionType) or get_origin(current) is Union:
            stack.extendleft(reversed(get_args(current)))
        elif current not in seen:
            seen.add(current)
            yield current


def verify_type(
    expected_type: type | UnionType, value: T, *, where: str = "value"
) -> T:
    for candidate_type in iterate_types(expected_type):
        if get_origin(candidate_type) is not None:
            raise ParameterizedTypeNotSupportedError(candidate_type)
        # JSON has no separate boolean/integer domains; keep them apart.
        if candidate_type is int and isinstance(value, bool):
            continue
        if candidate_type in (Any, object) or isinstance(
            value, candidate_type
        ):
            return value
    raise InvalidTypeError(value, expected_type=expected_type, where=where)


def require_field(
    source: Mapping[str, object],
    key: str,
    expected_type: type[T],
    *,
    where: str,
) -> T:
    if key not in source:
        raise MissingFieldError(key, where=where)
    return cast(
        "T",
        verify_type(expected_type, source[key], where=f"{where}.{key}"),
    )


def int_list(value: object, *, where: str) -> list[int]:
    items = verify_type(list, value, where=where)
    return [
        verify_type(int, item, where=f"{where}[{index}]")
        for index, item in enumerate(items)
    ]


def int_matrix(value: object, *, where: str) -> list[list[int]]:
    rows = verify_type(list, value, where=where)
    return [
        int_list(row, where=f"{where}[{index}]")
        for index, row in enumerate(rows)
    ]
