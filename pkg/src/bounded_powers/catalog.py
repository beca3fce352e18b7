"""Named groups: the built-in catalog and hand-written catalog files.

A catalog file holds ``{"groups": [entry, ...]}`` (or just the list). Each
entry has a ``label``, exactly one source and optional ``expected`` flags::

    {"label": "V4", "table": [[0, 1, 2, 3], [1, 0, 3, 2], ...]}
    {"label": "V4", "order": 4, "table": [[0, 1, 2, 3], ...]}
    {"label": "C3", "permutations": [[1, 2, 0]]}
    {"label": "C3", "degree": 3, "generators": [[1, 2, 0]]}
    {"label": "Alt5", "builtin": "A5", "expected": {"perfect": true}}
    {"label": "S3xS3", "product": ["S3", "S3"]}

``degree`` is required with ``generators`` and optional with
``permutations``; ``order`` is optional with ``table``. When given they
must match the lengths of the rows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import TYPE_CHECKING

from .config import DEFAULT_LIMITS, LabLimits
from .errors import InputError, PropertyViolationError
from .groups import (
    InvalidGroupSpecError,
    build_from_permutations,
    build_from_table,
    direct_product,
)
from .parsing import json5_load
from .series import central_series
from .validation import int_matrix, require_field, verify_type

if TYPE_CHECKING:
    from collections.abc import Iterator, Mapping

    from .groups import FiniteGroup, Permutation
    from .parsing import JsonValue, TextProvider

logger = logging.getLogger(__name__)

SOURCE_KINDS = ("table", "permutations", "generators", "builtin", "product")
# size field that may accompany each kind, and whether it is required
SIZE_FIELDS = {
    "table": ("order", False),
    "permutations": ("degree", False),
    "generators": ("degree", True),
}


class UnknownGroupError(InputError, KeyError):
    def __init__(self, label: str, *, known: list[str]) -> None:
        super().__init__(
            f"Unknown group {label!r}; known groups: {', '.join(known)}"
        )
        self.label = label
        self.known = known

    def __str__(self) -> str:
        return str(self.args[0])


class DuplicateLabelError(InputError):
    def __init__(self, label: str) -> None:
        super().__init__(f"label {label!r} appears more than once")
        self.label = label


class ExpectationMismatchError(PropertyViolationError):
    def __init__(self, label: str, *, flag: str, expected: bool) -> None:
        super().__init__(
            f"{label}: expected {flag}={expected}, computed {not expected}"
        )
        self.label = label
        self.flag = flag
        self.expected = expected


def normalize_label(label: str) -> str:
    """``"Z/6"``, ``"z6"`` and ``"Z 6"`` all name the same group."""
    return (
        label.replace("/", "").replace(" ", "").replace("×", "x").upper()
    )


def _cycle(n: int) -> Permutation:
    return (*range(1, n), 0)


def _sl23_permutations() -> list[Permutation]:
    """SL(2,3) acting on the eight nonzero vectors of ``F_3^2``."""
    vectors = [v for v in product(range(3), repeat=2) if v != (0, 0)]
    index = {vector: position for position, vector in enumerate(vectors)}

    def action(a: int, b: int, c: int, d: int) -> Permutation:
        return tuple(
            index[((a * x + b * y) % 3, (c * x + d * y) % 3)]
            for x, y in vectors
        )

    return [action(1, 1, 0, 1), action(1, 0, 1, 1)]


def _builtin_sources() -> dict[str, dict[str, JsonValue]]:
    sources: dict[str, dict[str, JsonValue]] = {
        f"Z{n}": {
            "permutations": [list(_cycle(n))],
            "expected": {"perfect": n == 1, "nilpotent": True},
        }
        for n in range(1, 13)
    }
    solvable = {"perfect": False, "nilpotent": False}
    two_group = {"perfect": False, "nilpotent": True}
    permutation_groups: dict[str, tuple[list[list[int]], dict[str, bool]]]
    permutation_groups = {
        "S3": ([[1, 0, 2], [1, 2, 0]], solvable),
        "S4": ([[1, 0, 2, 3], [1, 2, 3, 0]], solvable),
        "A4": ([[1, 2, 0, 3], [1, 0, 3, 2]], solvable),
        "A5": (
            [[1, 2, 3, 4, 0], [1, 2, 0, 3, 4]],
            {"perfect": True, "nilpotent": False},
        ),
        "D4": ([[1, 2, 3, 0], [0, 3, 2, 1]], two_group),
        "D5": ([[1, 2, 3, 4, 0], [0, 4, 3, 2, 1]], solvable),
        "Q8": (
            [[2, 3, 1, 0, 6, 7, 5, 4], [4, 5, 7, 6, 1, 0, 2, 3]],
            two_group,
        ),
        "SL(2,3)": (
            [list(perm) for perm in _sl23_permutations()],
            solvable,
        ),
    }
    for label, (perms, expected) in permutation_groups.items():
        sources[label] = {
            "permutations": list(perms),
            "expected": dict(expected),
        }
    sources["S3xZ2"] = {"product": ["S3", "Z2"], "expected": dict(solvable)}
    sources["Z4xS3"] = {"product": ["Z4", "S3"], "expected": dict(solvable)}
    return sources


@dataclass(frozen=True)
class CatalogEntry:
    label: str
    kind: str
    source: JsonValue = field(repr=False)
    expected_perfect: bool | None = None
    expected_nilpotent: bool | None = None
    size: int | None = None  # declared order or degree

    @classmethod
    def from_json(cls, value: JsonValue, *, where: str) -> CatalogEntry:
        data = verify_type(dict, value, where=where)
        label = verify_type(str, data.get("label"), where=f"{where}.label")
        return cls.from_source(label, data, where=where)

    @classmethod
    def from_source(
        cls, label: str, data: Mapping[str, JsonValue], *, where: str
    ) -> CatalogEntry:
        kinds = [kind for kind in SOURCE_KINDS if kind in data]
        if len(kinds) != 1:
            raise InvalidGroupSpecError(
                f"{where} needs exactly one of {', '.join(SOURCE_KINDS)}",
                label=label,
            )
        expected = verify_type(
            dict, data.get("expected", {}), where=f"{where}.expected"
        )
        flags = {
            name: verify_type(
                bool | None,
                expected.get(name),
                where=f"{where}.expected.{name}",
            )
            for name in ("perfect", "nilpotent")
        }
        kind = kinds[0]
        size: int | None = None
        if kind in SIZE_FIELDS:
            name, required = SIZE_FIELDS[kind]
            if required or name in data:
                size = require_field(data, name, int, where=where)
            if size is not None and size < 0:
                raise InvalidGroupSpecError(
                    f"{where}.{name} must be >= 0", label=label
                )
        return cls(
            label=label,
            kind=kind,
            source=data[kind],
            expected_perfect=flags["perfect"],
            expected_nilpotent=flags["nilpotent"],
            size=size,
        )

    def expectations(self) -> dict[str, bool]:
        pinned = {
            "perfect": self.expected_perfect,
            "nilpotent": self.expected_nilpotent,
        }
        return {
            name: flag for name, flag in pinned.items() if flag is not None
        }

    def check_expectations(self, group: FiniteGroup) -> None:
        report = central_series(group)
        computed = {"perfect": report.perfect, "nilpotent": report.nilpotent}
        for flag, expected in self.expectations().items():
            if computed[flag] != expected:
                raise ExpectationMismatchError(
                    self.label, flag=flag, expected=expected
                )


class Catalog:
    """Built-in groups plus any entries read from catalog files; groups are
    built on first use."""

    def __init__(self, *, limits: LabLimits | None = None) -> None:
        self.limits = limits or DEFAULT_LIMITS
        self._entries: dict[str, CatalogEntry] = {}
        self._groups: dict[str, FiniteGroup] = {}
        self._building: set[str] = set()
        for label, source in _builtin_sources().items():
            self._add(
                CatalogEntry.from_source(label, source, where=label)
            )
        self._add(CatalogEntry("1", "builtin", "Z1", True, True))

    def _add(self, entry: CatalogEntry) -> None:
        key = normalize_label(entry.label)
        if key in self._entries:
            logger.info(f"catalog entry {entry.label!r} replaces a built-in")
        self._entries[key] = entry
        self._groups.pop(key, None)

    def load(self, source: TextProvider) -> None:
        decoded = json5_load(source)
        if isinstance(decoded, dict):
            decoded = decoded.get("groups")
        entries = verify_type(list, decoded, where="catalog.groups")
        seen: set[str] = set()
        for position, value in enumerate(entries):
            entry = CatalogEntry.from_json(
                value, where=f"catalog.groups[{position}]"
            )
            if (key := normalize_label(entry.label)) in seen:
                raise DuplicateLabelError(entry.label)
            seen.add(key)
            self._add(entry)
        logger.debug(f"catalog loaded {len(seen)} entries")

    def labels(self) -> list[str]:
        return sorted(entry.label for entry in self._entries.values())

    def __iter__(self) -> Iterator[CatalogEntry]:
        return iter(self._entries.values())

    def __contains__(self, label: object) -> bool:
        return (
            isinstance(label, str) and normalize_label(label) in self._entries
        )

    def entry(self, label: str) -> CatalogEntry:
        try:
            return self._entries[normalize_label(label)]
        except KeyError:
            raise UnknownGroupError(label, known=self.labels()) from None

    def group(self, label: str) -> FiniteGroup:
        entry = self.entry(label)
        key = normalize_label(entry.label)
        if key not in self._groups:
            if key in self._building:
                raise InvalidGroupSpecError(
                    "catalog entries refer to each other", label=entry.label
                )
            self._building.add(key)
            try:
                self._groups[key] = self._build(entry)
            finally:
                self._building.discard(key)
        return self._groups[key]

    def _build(self, entry: CatalogEntry) -> FiniteGroup:
        where = f"{entry.label}.{entry.kind}"
        if entry.kind == "builtin":
            name = verify_type(str, entry.source, where=where)
            built = self.group(name)
            return build_from_table(
                built.order,
                built.table,
                entry.label,
                element_names=built.element_names,
                generators=built.generators,
                limits=self.limits,
            )
        if entry.kind == "product":
            first, second = (
                self.group(name)
                for name in _two_labels(entry.source, where=where)
            )
            return direct_product(
                first, second, entry.label, limits=self.limits
            )
        if entry.kind in ("permutations", "generators"):
            perms = int_matrix(entry.source, where=where)
            degree = entry.size
            if degree is None:
                degree = len(perms[0]) if perms else 1
            for index, perm in enumerate(perms):
                if len(perm) != degree:
                    raise InvalidGroupSpecError(
                        f"{where}[{index}] has length {len(perm)}"
                        f" but the degree is {degree}",
                        label=entry.label,
                    )
            return build_from_permutations(
                degree, perms, entry.label, limits=self.limits
            )
        table = int_matrix(entry.source, where=where)
        order = len(table) if entry.size is None else entry.size
        if len(table) != order:
            raise InvalidGroupSpecError(
                f"{where} has {len(table)} rows but the order is {order}",
                label=entry.label,
            )
        return build_from_table(order, table, entry.label, limits=self.limits)


def _two_labels(value: JsonValue, *, where: str) -> tuple[str, str]:
    labels = verify_type(list, value, where=where)
    if len(labels) != 2:  # noqa: PLR2004
        message = f"{where} needs two labels"
        raise InvalidGroupSpecError(message)
    first, second = (
        verify_type(str, label, where=f"{where}[{index}]")
        for index, label in enumerate(labels)
    )
    return first, second

