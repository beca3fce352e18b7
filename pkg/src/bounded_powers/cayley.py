"""Word metrics on ``G^n``: breadth-first distances, Cayley diameters,
balls ``K_r`` and the length-function checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, TypeAlias

import numpy as np
import numpy.typing as npt

from .config import DEFAULT_LIMITS, LabLimits
from .errors import InputError, ResourceCapError
from .groups import default_generators
from .log_utility import ProgressLog
from .products import (
    PowerGroup,
    ProductElement,
    StateSpaceTooLargeError,
    embed_xJ,
)
from .validation import int_list, require_field, verify_type

if TYPE_CHECKING:
    from collections.abc import Iterable

    from .groups import ElementSet, FiniteGroup
    from .parsing import JsonValue
    from .products import CodeArray

logger = logging.getLogger(__name__)

DistanceArray: TypeAlias = npt.NDArray[np.uint8]

UNVISITED = 255
_ROW_CHUNK = 256


class NotGeneratingError(InputError):
    def __init__(self, *, label: str, reached: int, order: int) -> None:
        super().__init__(
            f"{label}: generators reach {reached} of {order} elements"
        )
        self.label = label
        self.reached = reached
        self.order = order


class DistanceOverflowError(ResourceCapError):
    def __init__(self, *, cap: int) -> None:
        super().__init__("word distance", size=cap + 1, cap=cap)


class NotBaseGeneratingSetError(InputError):
    def __init__(self, power: int) -> None:
        super().__init__(f"balls need generators of G itself, not G^{power}")
        self.power = power


@dataclass(frozen=True)
class GeneratingSet:
    """A deduplicated set of elements of ``G^n``; whether it generates is
    computed, never assumed."""

    space: PowerGroup
    members: frozenset[ProductElement]

    @classmethod
    def of(
        cls, space: PowerGroup, elements: Iterable[ProductElement]
    ) -> GeneratingSet:
        members = frozenset(elements)
        for member in members:
            space.code_of(member)
        return cls(space, members)

    @classmethod
    def of_base(
        cls, group: FiniteGroup, generators: Iterable[int] | None = None
    ) -> GeneratingSet:
        """Generators of ``G`` itself, the recorded ones by default."""
        if generators is None:
            generators = default_generators(group)
        return cls.of(
            PowerGroup.of(group, 1),
            (ProductElement(group, (g,)) for g in generators),
        )

    @property
    def label(self) -> str:
        return self.space.label

    def __len__(self) -> int:
        return len(self.members)

    def codes(self) -> CodeArray:
        return np.sort(self.space.codes_of(self.members))

    def with_inverses(self) -> GeneratingSet:
        return GeneratingSet(
            self.space,
            self.members | {member.inverse() for member in self.members},
        )

    def to_json(self) -> JsonValue:
        return [member.to_json() for member in self._sorted()]

    def _sorted(self) -> list[ProductElement]:
        return sorted(self.members, key=self.space.code_of)

    @classmethod
    def from_json(
        cls, space: PowerGroup, value: JsonValue
    ) -> GeneratingSet:
        """Accepts ``{"x": element, "J": [indices]}`` entries (``J``
        defaults to every index) and plain coordinate lists."""
        entries = verify_type(list, value, where="generators")
        elements = []
        for position, entry in enumerate(entries):
            where = f"generators[{position}]"
            if isinstance(entry, dict):
                x = require_field(entry, "x", int, where=where)
                indices: Iterable[int] = range(space.power)
                if "J" in entry:
                    indices = int_list(entry["J"], where=f"{where}.J")
                elements.append(
                    embed_xJ(space.base, space.power, x, indices)
                )
            else:
                coords = int_list(entry, where=where)
                elements.append(ProductElement(space.base, tuple(coords)))
        return cls.of(space, elements)


def union_of_factors(
    group: FiniteGroup, n: int, *, limits: LabLimits | None = None
) -> GeneratingSet:
    """Every ``x_{i}`` with ``x ≠ 1``."""
    space = PowerGroup.of(group, n, limits=limits)
    return GeneratingSet.of(
        space,
        (
            embed_xJ(group, n, x, (i,))
            for i in range(n)
            for x in group.elements
            if x
        ),
    )


def word_distances(
    generators: GeneratingSet, *, limits: LabLimits | None = None
) -> DistanceArray:
    """Distance from the identity to every code, ``UNVISITED`` when
    unreachable; steps are right multiplications by generators and their
    inverses, one BFS level at a time."""
    limits = limits or DEFAULT_LIMITS
    space = generators.space
    if space.order > limits.max_states:
        raise StateSpaceTooLargeError(
            size=space.order, cap=limits.max_states
        )
    codes = generators.codes()
    steps = space.decode(np.union1d(codes, space.inv_codes(codes)))
    table = space.base.table
    distances = np.full(space.order, UNVISITED, dtype=np.uint8)
    distances[0] = 0
    frontier = np.zeros(1, dtype=np.int64)
    level = 0
    progress = ProgressLog(logger, f"{space.label} BFS")
    while frontier.size and len(steps):
        coords = space.decode(frontier)
        reached = np.zeros(space.order, dtype=np.bool_)
        for step in steps:
            reached[space.encode(table[coords, step])] = True
        reached &= distances == UNVISITED
        frontier = np.flatnonzero(reached)
        if not frontier.size:
            break
        level += 1
        if level >= UNVISITED:
            raise DistanceOverflowError(cap=UNVISITED - 1)
        distances[frontier] = level
        progress.update(f"level {level} adds {frontier.size} states")
    return distances


@dataclass(frozen=True)
class DiameterReport:
    """BFS summary; when the generators fall short, ``diameter`` is the
    largest distance inside the generated subgroup."""

    label: str
    n: int
    generator_count: int
    generates: bool
    diameter: int
    histogram: tuple[int, ...]
    states_visited: int
    farthest: tuple[int, ...]

    def to_json(self) -> dict[str, JsonValue]:
        return {
            "group": self.label,
            "n": self.n,
            "generators": self.generator_count,
            "generates": self.generates,
            "diameter": self.diameter,
            "histogram": list(self.histogram),
            "states_visited": self.states_visited,
            "farthest": list(self.farthest),
        }


def cayley_diameter(
    generators: GeneratingSet, *, limits: LabLimits | None = None
) -> DiameterReport:
    space = generators.space
    distances = word_distances(generators, limits=limits)
    visited = distances != UNVISITED
    histogram = np.bincount(distances[visited])
    diameter = len(histogram) - 1
    farthest = int(np.flatnonzero(distances == diameter)[0])
    report = DiameterReport(
        label=space.base.label,
        n=space.power,
        generator_count=len(generators),
        generates=bool(visited.all()),
        diameter=diameter,
        histogram=tuple(histogram.tolist()),
        states_visited=int(visited.sum()),
        farthest=space.element(farthest).coords,
    )
    logger.info(
        f"{space.label}: {report.states_visited} states, "
        f"diameter {diameter}, generates={report.generates}"
    )
    return report


def _base_distances(
    generators: GeneratingSet, *, limits: LabLimits | None
) -> npt.NDArray[np.int64]:
    space = generators.space
    if space.power != 1:
        raise NotBaseGeneratingSetError(space.power)
    distances = word_distances(generators, limits=limits)
    if (reached := int((distances != UNVISITED).sum())) < space.order:
        raise NotGeneratingError(
            label=space.label, reached=reached, order=space.order
        )
    return distances.astype(np.int64)


def word_ball(
    generators: GeneratingSet,
    radius: int,
    *,
    limits: LabLimits | None = None,
) -> ElementSet:
    """``K_r``: elements at word distance strictly below ``radius``."""
    distances = _base_distances(generators, limits=limits)
    group = generators.space.base
    return group.element_set(np.flatnonzero(distances < radius).tolist())


def _product_power(members: ElementSet, times: int) -> ElementSet:
    group = members.group
    values = members.to_array()
    current = group.trivial
    for _ in range(times):
        products = group.table[np.ix_(current.to_array(), values)]
        current = group.element_set(np.unique(products).tolist())
    return current


def check_ball_power(
    generators: GeneratingSet,
    n: int,
    m: int,
    *,
    limits: LabLimits | None = None,
) -> bool:
    """``G ⊆ (K_n)^m`` implies ``G ⊆ K_(nm)``; true when the premise
    fails."""
    if n < 1 or m < 1:
        message = f"ball radius and power must be >= 1, got {n}, {m}"
        raise InputError(message)
    ball = word_ball(generators, n, limits=limits)
    if not _product_power(ball, m).is_whole:
        return True
    return word_ball(generators, n * m, limits=limits).is_whole


@dataclass(frozen=True)
class LengthFunctionReport:
    label: str
    n: int
    states: int
    pairs_checked: int
    identity_zero: bool
    counterexample: tuple[tuple[int, ...], tuple[int, ...]] | None = None

    @property
    def subadditive(self) -> bool:
        return self.counterexample is None

    @property
    def passed(self) -> bool:
        return self.identity_zero and self.subadditive

    def to_json(self) -> dict[str, JsonValue]:
        result: dict[str, JsonValue] = {
            "group": self.label,
            "n": self.n,
            "states": self.states,
            "pairs_checked": self.pairs_checked,
            "identity_zero": self.identity_zero,
            "subadditive": self.subadditive,
        }
        if self.counterexample is not None:
            result["counterexample"] = [list(g) for g in self.counterexample]
        return result


def check_length_function(
    generators: GeneratingSet, *, limits: LabLimits | None = None
) -> LengthFunctionReport:
    """``ℓ(1) = 0`` and ``ℓ(gh) ≤ ℓ(g) + ℓ(h)`` over every pair."""
    limits = limits or DEFAULT_LIMITS
    space = generators.space
    if space.order > limits.length_check_states:
        raise StateSpaceTooLargeError(
            size=space.order, cap=limits.length_check_states
        )
    distances = word_distances(generators, limits=limits)
    if (reached := int((distances != UNVISITED).sum())) < space.order:
        raise NotGeneratingError(
            label=space.label, reached=reached, order=space.order
        )
    length = distances.astype(np.int64)
    coords = space.decode(np.arange(space.order))
    table = space.base.table
    counterexample = None
    for start in range(0, space.order, _ROW_CHUNK):
        rows = slice(start, start + _ROW_CHUNK)
        products = space.encode(table[coords[rows, None, :], coords[None]])
        bound = length[rows, None] + length[None, :]
        bad = np.argwhere(length[products] > bound)
        if bad.size:
            g, h = (int(value) for value in bad[0])
            counterexample = (
                tuple(coords[start + g].tolist()),
                tuple(coords[h].tolist()),
            )
            break
    return LengthFunctionReport(
        label=space.base.label,
        n=space.power,
        states=space.order,
        pairs_checked=space.order**2,
        identity_zero=bool(length[0] == 0),
        counterexample=counterexample,
    )
