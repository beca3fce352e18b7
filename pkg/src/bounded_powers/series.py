from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .groups import (
    ElementSet,
    SetKind,
    commutator_span,
    derived_subgroup,
    require_subgroup,
)

if TYPE_CHECKING:
    from .groups import FiniteGroup
    from .parsing import JsonValue

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CentralSeriesReport:
    """Both central series of a subgroup ``A`` (often the whole group).

    Each series keeps its repeated final term so stabilization is visible.
    """

    subject: ElementSet
    descending: tuple[ElementSet, ...]
    ascending: tuple[ElementSet, ...]
    perfect: bool

    @property
    def last_term(self) -> ElementSet:
        return self.descending[-1]

    @property
    def hypercenter(self) -> ElementSet:
        return self.ascending[-1]

    @property
    def nilpotent(self) -> bool:
        return self.last_term.is_trivial

    @property
    def nilpotency_class(self) -> int | None:
        """Number of strict descents to the trivial group, if it gets there."""
        if not self.nilpotent:
            return None
        return len(self.descending) - 2 if len(self.subject) > 1 else 0

    def to_json(self) -> dict[str, JsonValue]:
        return {
            "order": len(self.subject),
            "perfect": self.perfect,
            "nilpotent": self.nilpotent,
            "descending": [term.to_json() for term in self.descending],
            "ascending": [term.to_json() for term in self.ascending],
            "last_term": self.last_term.to_json(),
            "hypercenter": self.hypercenter.to_json(),
        }


def _upper_step(subject: ElementSet, below: ElementSet) -> ElementSet:
    """Elements of ``subject`` central modulo ``below``."""
    group = subject.group
    members = subject.to_array()
    in_below = below.mask()
    commutators = group.commutators[np.ix_(members, members)]
    central = members[in_below[commutators].all(axis=1)]
    return group.element_set(central.tolist(), SetKind.NORMAL)


def relative_central_series(
    group: FiniteGroup, subject: ElementSet
) -> CentralSeriesReport:
    """Central series of the subgroup ``subject`` as a group in its own
    right, expressed in the indices of ``group``."""
    require_subgroup(subject)
    descending = [subject]
    while True:
        following = commutator_span(group, subject, descending[-1])
        descending.append(following.with_kind(SetKind.NORMAL))
        if following == descending[-2]:
            break
    ascending = [group.trivial]
    while True:
        following = _upper_step(subject, ascending[-1])
        ascending.append(following)
        if following == ascending[-2]:
            break
    logger.debug(
        f"{group.label}: series of a subgroup of order {len(subject)}: "
        f"descending {[len(term) for term in descending]}, "
        f"ascending {[len(term) for term in ascending]}"
    )
    return CentralSeriesReport(
        subject=subject,
        descending=tuple(descending),
        ascending=tuple(ascending),
        perfect=descending[1] == subject,
    )


def central_series(group: FiniteGroup) -> CentralSeriesReport:
    return relative_central_series(group, group.whole)


def is_perfect(group: FiniteGroup) -> bool:
    return derived_subgroup(group).is_whole


def is_nilpotent(group: FiniteGroup) -> bool:
    return central_series(group).nilpotent


def last_term(group: FiniteGroup) -> ElementSet:
    return central_series(group).last_term


def hypercenter(group: FiniteGroup) -> ElementSet:
    return central_series(group).hypercenter
