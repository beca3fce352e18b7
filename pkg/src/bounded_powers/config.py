from __future__ import annotations

import logging
from dataclasses import dataclass, fields, replace
from typing import TYPE_CHECKING

from .errors import InputError
from .parsing import json5_load
from .validation import verify_type

if TYPE_CHECKING:
    from collections.abc import Mapping

    from .parsing import TextProvider

logger = logging.getLogger(__name__)


class UnknownLimitError(InputError):
    def __init__(self, names: list[str]) -> None:
        super().__init__(f"Unknown limit names: {', '.join(names)}")
        self.names = names


@dataclass(frozen=True)
class LabLimits:
    max_group_order: int = 512
    max_universe: int = 16
    max_states: int = 2**28  # flat uint8 distance array
    length_check_states: int = 10**4
    closure_cap: int = 2**20
    search_word_cap: int = 10**7
    negative_search_length: int = 4
    max_relation_power: int = 5
    max_series_power: int = 3  # R^n / D^2n iteration depth
    max_disjoint_power: int = 2  # D^n in V_(2^2^n)(I_(2^n))

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> LabLimits:
        known = {entry.name for entry in fields(cls)}
        if unknown := sorted(set(values) - known):
            raise UnknownLimitError(unknown)
        overrides = {
            name: verify_type(int, value, where=f"limits.{name}")
            for name, value in values.items()
        }
        return replace(cls(), **overrides)

    @classmethod
    def load(cls, source: TextProvider) -> LabLimits:
        decoded = verify_type(dict, json5_load(source), where="limits")
        limits = cls.from_mapping(decoded)
        logger.debug(f"loaded limits: {limits}")
        return limits


DEFAULT_LIMITS = LabLimits()
