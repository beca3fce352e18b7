from __future__ import annotations

from typing import Any, Union

import pytest

from bounded_powers.errors import InputError
from bounded_powers.validation import (
    InvalidTypeError,
    MissingFieldError,
    ParameterizedTypeNotSupportedError,
    int_list,
    int_matrix,
    iterate_types,
    require_field,
    verify_type,
)

# --- iterate_types -----------------------------------------------------------


def test_iterate_types_flattening() -> None:
    result = list(
        iterate_types(int | float | Union[str, bytes] | list)  # noqa: UP007
    )
    assert result == [int, float, str, bytes, list]


def test_iterate_types_deduplication() -> None:
    assert list(iterate_types(int | int | (str | str))) == [int, str]


def test_iterate_types_non_union() -> None:
    assert list(iterate_types(dict)) == [dict]


# --- verify_type -------------------------------------------------------------


def test_verify_type_accepts_valid_type() -> None:
    assert verify_type(int | str, 5) == 5
    assert verify_type(int | str, "ok") == "ok"


def test_verify_type_rejects_invalid_type() -> None:
    with pytest.raises(InvalidTypeError, match="catalog.groups"):
        verify_type(list, {"a": 1}, where="catalog.groups")


def test_verify_type_keeps_bool_apart_from_int() -> None:
    with pytest.raises(InvalidTypeError):
        verify_type(int, True)
    assert verify_type(bool, True) is True
    assert verify_type(bool | None, None) is None


def test_invalid_type_is_an_input_error() -> None:
    with pytest.raises(InputError):
        verify_type(str, 3)


def test_verify_type_rejects_parameterized_generic() -> None:
    with pytest.raises(ParameterizedTypeNotSupportedError):
        verify_type(dict[Any, Any], {"a": 1})


def test_verify_type_rejects_parameterized_generic_in_union() -> None:
    with pytest.raises(ParameterizedTypeNotSupportedError):
        verify_type(dict[str, int] | list[int], {"a": 1})


# --- decoded JSON helpers ----------------------------------------------------


def test_require_field() -> None:
    source = {"x": 3, "J": [0, 1]}
    assert require_field(source, "x", int, where="generator") == 3
    with pytest.raises(MissingFieldError, match="'label'"):
        require_field(source, "label", str, where="entry")
    with pytest.raises(InvalidTypeError, match=r"generator\.J"):
        require_field(source, "J", int, where="generator")


def test_missing_field_is_a_key_error_with_a_readable_message() -> None:
    with pytest.raises(KeyError) as info:
        require_field({}, "universe", int, where="family")
    assert str(info.value) == "family: missing required field 'universe'"


def test_int_list_and_matrix() -> None:
    assert int_list([1, 2], where="perm") == [1, 2]
    assert int_matrix([[0, 1], [1, 0]], where="table") == [[0, 1], [1, 0]]
    with pytest.raises(InvalidTypeError, match=r"perm\[1\]"):
        int_list([1, "2"], where="perm")
    with pytest.raises(InvalidTypeError, match=r"table\[0\]\[1\]"):
        int_matrix([[0, 1.5]], where="table")
