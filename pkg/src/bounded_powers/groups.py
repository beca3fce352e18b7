"""Finite groups given by multiplication tables, and their element sets.

Elements are the indices ``0..order-1`` and the identity is always ``0``.
``table[g, h]`` is the index of ``g·h``; for permutation groups the product
``g·h`` applies ``g`` first, then ``h``.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum, auto, unique
from functools import cached_property
from typing import TYPE_CHECKING, ClassVar, TypeAlias

import numpy as np
import numpy.typing as npt

from .config import DEFAULT_LIMITS, LabLimits
from .errors import InputError, ResourceCapError

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Sequence

logger = logging.getLogger(__name__)

IntArray: TypeAlias = npt.NDArray[np.intp]
Permutation: TypeAlias = tuple[int, ...]


class InvalidGroupSpecError(InputError):
    """Raised when a table or permutation list is malformed."""

    def __init__(self, detail: str, *, label: str = "") -> None:
        prefix = f"{label}: " if label else ""
        super().__init__(f"{prefix}{detail}")
        self.detail = detail
        self.label = label


class NotAGroupError(InputError):
    """Raised when a table violates a group law.

    ``witness`` holds the offending elements: ``(g,)`` for the identity and
    inverse laws, ``(a, b, c)`` for associativity.
    """

    def __init__(
        self, *, law: str, witness: tuple[int, ...], label: str = ""
    ) -> None:
        prefix = f"{label}: " if label else ""
        super().__init__(f"{prefix}{law} law fails at {witness}")
        self.law = law
        self.witness = witness
        self.label = label


class GroupTooLargeError(ResourceCapError):
    def __init__(self, *, size: int, cap: int) -> None:
        super().__init__("group order", size=size, cap=cap)


class NotASubgroupError(InputError):
    def __init__(self, *, label: str, reason: str) -> None:
        super().__init__(f"element set of {label or 'group'} {reason}")
        self.label = label
        self.reason = reason


class UnknownElementError(InputError, KeyError):
    def __init__(self, name: str, *, label: str) -> None:
        super().__init__(f"{label or 'group'} has no element named {name!r}")
        self.name = name

    def __str__(self) -> str:
        return str(self.args[0])


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A validated finite group; build it with the ``build_from_*`` helpers.

    Instances compare by identity: two groups are only "the same" when they
    are the same object, which is what element sets rely on.
    """

    order: int
    table: IntArray = field(repr=False)
    inverses: tuple[int, ...] = field(repr=False)
    label: str = ""
    element_names: tuple[str, ...] | None = field(default=None, repr=False)
    generators: tuple[int, ...] | None = None

    identity: ClassVar[int] = 0

    @cached_property
    def rows(self) -> list[list[int]]:
        # plain lists for scalar lookups
        rows: list[list[int]] = self.table.tolist()
        return rows

    @cached_property
    def inverse_array(self) -> IntArray:
        array = np.asarray(self.inverses, dtype=np.intp)
        array.flags.writeable = False
        return array

    @cached_property
    def commutators(self) -> IntArray:
        """``commutators[g, h]`` is ``[g, h] = g⁻¹h⁻¹gh``."""
        table = self.table
        inverse = self.inverse_array
        elements = np.arange(self.order, dtype=np.intp)
        step = table[inverse[:, None], inverse[None, :]]
        step = table[step, elements[:, None]]
        result = table[step, elements[None, :]]
        result.flags.writeable = False
        return result

    @cached_property
    def whole(self) -> ElementSet:
        return ElementSet(self, (1 << self.order) - 1, SetKind.NORMAL)

    @cached_property
    def trivial(self) -> ElementSet:
        return ElementSet(self, 1, SetKind.NORMAL)

    @cached_property
    def _name_to_index(self) -> dict[str, int]:
        return {name: index for index, name in enumerate(self.names)}

    @property
    def names(self) -> tuple[str, ...]:
        if self.element_names is None:
            return tuple(str(index) for index in range(self.order))
        return self.element_names

    @property
    def elements(self) -> range:
        return range(self.order)

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def mul(self, g: int, h: int) -> int:
        return self.rows[g][h]

    def inv(self, g: int) -> int:
        return self.inverses[g]

    def conjugate(self, g: int, by: int) -> int:
        """Return ``by · g · by⁻¹``."""
        rows = self.rows
        return rows[rows[by][g]][self.inverses[by]]

    def power(self, g: int, exponent: int) -> int:
        base = g if exponent >= 0 else self.inverses[g]
        result = 0
        for _ in range(abs(exponent)):
            result = self.rows[result][base]
        return result

    def name(self, g: int) -> str:
        return self.names[g]

    def index_of(self, name: str) -> int:
        try:
            return self._name_to_index[name]
        except KeyError:
            raise UnknownElementError(name, label=self.label) from None

    def element_set(
        self, members: Iterable[int], kind: SetKind | None = None
    ) -> ElementSet:
        return ElementSet.from_indices(
            self, members, kind or SetKind.SUBSET
        )


@unique
class SetKind(Enum):
    SUBSET = auto()
    SUBGROUP = auto()
    NORMAL = auto()


@dataclass(frozen=True)
class ElementSet:
    """A set of element indices of one group, stored as an int bitset.

    ``kind`` records what the producing operation guarantees; it takes no
    part in equality.
    """

    group: FiniteGroup
    members: int
    kind: SetKind = field(default=SetKind.SUBSET, compare=False)

    @classmethod
    def from_indices(
        cls,
        group: FiniteGroup,
        indices: Iterable[int],
        kind: SetKind = SetKind.SUBSET,
    ) -> ElementSet:
        members = 0
        for index in indices:
            if not 0 <= index < group.order:
                raise InvalidGroupSpecError(
                    f"element index {index} out of range", label=group.label
                )
            members |= 1 << index
        return cls(group, members, kind)

    def __contains__(self, index: object) -> bool:
        return isinstance(index, int) and bool(self.members >> index & 1)

    def __iter__(self) -> Iterator[int]:
        remaining = self.members
        while remaining:
            lowest = remaining & -remaining
            yield lowest.bit_length() - 1
            remaining ^= lowest

    def __len__(self) -> int:
        return self.members.bit_count()

    def __le__(self, other: ElementSet) -> bool:
        return self.issubset(other)

    def issubset(self, other: ElementSet) -> bool:
        return self.members & ~other.members == 0

    def union(self, other: ElementSet) -> ElementSet:
        return ElementSet(self.group, self.members | other.members)

    def intersection(self, other: ElementSet) -> ElementSet:
        return ElementSet(self.group, self.members & other.members)

    def difference(self, other: ElementSet) -> ElementSet:
        return ElementSet(self.group, self.members & ~other.members)

    def with_kind(self, kind: SetKind) -> ElementSet:
        return replace(self, kind=kind)

    @property
    def is_trivial(self) -> bool:
        return self.members == 1

    @property
    def is_whole(self) -> bool:
        return self.members == self.group.whole.members

    def smallest(self) -> int:
        if not self.members:
            message = "empty element set has no smallest element"
            raise ValueError(message)
        return (self.members & -self.members).bit_length() - 1

    def to_array(self) -> IntArray:
        return np.fromiter(iter(self), dtype=np.intp, count=len(self))

    def mask(self) -> npt.NDArray[np.bool_]:
        flags = np.zeros(self.group.order, dtype=np.bool_)
        flags[self.to_array()] = True
        return flags

    def to_json(self) -> list[int]:
        return list(self)

    def describe(self) -> str:
        return "{" + ", ".join(self.group.name(g) for g in self) + "}"


def _check_table_shape(
    order: int, table: npt.ArrayLike, *, label: str, limits: LabLimits
) -> IntArray:
    if order < 1:
        raise InvalidGroupSpecError("order must be positive", label=label)
    if order > limits.max_group_order:
        raise GroupTooLargeError(size=order, cap=limits.max_group_order)
    try:
        array = np.array(table, dtype=np.intp)
    except (TypeError, ValueError):
        raise InvalidGroupSpecError(
            "table is not a rectangular integer matrix", label=label
        ) from None
    if array.shape != (order, order):
        raise InvalidGroupSpecError(
            f"table shape {array.shape} does not match order {order}",
            label=label,
        )
    if array.size and (array.min() < 0 or array.max() >= order):
        raise InvalidGroupSpecError(
            f"table entries must lie in [0, {order})", label=label
        )
    return array


def _check_identity(table: IntArray, *, label: str) -> None:
    elements = np.arange(len(table), dtype=np.intp)
    for line in (table[0], table[:, 0]):
        if bad := np.flatnonzero(line != elements).tolist():
            raise NotAGroupError(
                law="identity", witness=(bad[0],), label=label
            )


def _compute_inverses(table: IntArray, *, label: str) -> tuple[int, ...]:
    is_identity = table == 0
    if missing := np.flatnonzero(~is_identity.any(axis=1)).tolist():
        raise NotAGroupError(law="inverse", witness=(missing[0],), label=label)
    right = is_identity.argmax(axis=1)
    if bad := np.flatnonzero(
        table[right, np.arange(len(table))] != 0
    ).tolist():
        raise NotAGroupError(law="inverse", witness=(bad[0],), label=label)
    inverses: list[int] = right.tolist()
    return tuple(inverses)


def _check_associativity(table: IntArray, *, label: str) -> None:
    # one a at a time: order² memory
    for a, row in enumerate(table):
        left = table[row]  # [b, c] -> (ab)c
        right = row[table]  # [b, c] -> a(bc)
        if (mismatch := np.argwhere(left != right)).size:
            b, c = mismatch[0].tolist()
            raise NotAGroupError(
                law="associativity", witness=(a, b, c), label=label
            )


def build_from_table(
    order: int,
    table: npt.ArrayLike,
    label: str = "",
    *,
    element_names: Sequence[str] | None = None,
    generators: Sequence[int] | None = None,
    limits: LabLimits | None = None,
) -> FiniteGroup:
    """Validate a multiplication table exhaustively and wrap it."""
    limits = limits or DEFAULT_LIMITS
    array = _check_table_shape(order, table, label=label, limits=limits)
    _check_identity(array, label=label)
    inverses = _compute_inverses(array, label=label)
    _check_associativity(array, label=label)
    if element_names is not None and len(element_names) != order:
        raise InvalidGroupSpecError(
            f"{len(element_names)} element names for order {order}",
            label=label,
        )
    array.flags.writeable = False
    logger.debug(f"validated group {label or '<unlabelled>'} of order {order}")
    return FiniteGroup(
        order=order,
        table=array,
        inverses=inverses,
        label=label,
        element_names=(
            None if element_names is None else tuple(element_names)
        ),
        generators=None if generators is None else tuple(generators),
    )


def cycle_notation(permutation: Sequence[int]) -> str:
    seen: set[int] = set()
    cycles: list[str] = []
    for start in range(len(permutation)):
        if start in seen or permutation[start] == start:
            continue
        cycle = [start]
        seen.add(start)
        point = permutation[start]
        while point != start:
            cycle.append(point)
            seen.add(point)
            point = permutation[point]
        cycles.append("(" + " ".join(map(str, cycle)) + ")")
    return "".join(cycles) or "()"


def _check_permutation(
    permutation: Sequence[int], degree: int, *, label: str
) -> Permutation:
    if sorted(permutation) != list(range(degree)):
        raise InvalidGroupSpecError(
            f"{list(permutation)} is not a permutation of 0..{degree - 1}",
            label=label,
        )
    return tuple(permutation)


def build_from_permutations(
    degree: int,
    generators: Sequence[Sequence[int]],
    label: str = "",
    *,
    limits: LabLimits | None = None,
) -> FiniteGroup:
    """Close the generators under composition, breadth first.

    The identity gets index 0; every other element is numbered in order of
    discovery, expanding elements in queue order and generators in input
    order.
    """
    limits = limits or DEFAULT_LIMITS
    if degree < 0:
        raise InvalidGroupSpecError("degree must be >= 0", label=label)
    perms = [
        _check_permutation(generator, degree, label=label)
        for generator in generators
    ]
    identity: Permutation = tuple(range(degree))
    index_of: dict[Permutation, int] = {identity: 0}
    elements: list[Permutation] = [identity]
    queue = deque([identity])
    while queue:
        current = queue.popleft()
        for generator in perms:
            product = tuple(generator[point] for point in current)
            if product not in index_of:
                if len(elements) >= limits.max_group_order:
                    raise GroupTooLargeError(
                        size=len(elements) + 1, cap=limits.max_group_order
                    )
                index_of[product] = len(elements)
                elements.append(product)
                queue.append(product)
    logger.debug(f"closure of {len(perms)} generators: {len(elements)}")

    stacked = np.array(elements, dtype=np.intp).reshape(len(elements), degree)
    table = np.empty((len(elements), len(elements)), dtype=np.intp)
    for row, element in enumerate(stacked):
        # [h, i] -> h(g(i)), i.e. g first, then h
        composed = stacked[:, element]
        table[row] = [index_of[tuple(image)] for image in composed.tolist()]
    return build_from_table(
        len(elements),
        table,
        label,
        element_names=[cycle_notation(element) for element in elements],
        generators=[index_of[perm] for perm in perms],
        limits=limits,
    )


def direct_product(
    first: FiniteGroup,
    second: FiniteGroup,
    label: str | None = None,
    *,
    limits: LabLimits | None = None,
) -> FiniteGroup:
    """``(g, h)`` gets index ``g·|second| + h``, so the identity stays 0."""
    width = second.order
    order = first.order * width
    limits = limits or DEFAULT_LIMITS
    if order > limits.max_group_order:
        raise GroupTooLargeError(size=order, cap=limits.max_group_order)
    table = (
        first.table[:, None, :, None] * width + second.table[None, :, None, :]
    ).reshape(order, order)
    names = [f"({g},{h})" for g in first.names for h in second.names]
    generators = None
    if first.generators is not None and second.generators is not None:
        generators = [g * width for g in first.generators] + list(
            second.generators
        )
    return build_from_table(
        order,
        table,
        label or f"{first.label}x{second.label}",
        element_names=names,
        generators=generators,
        limits=limits,
    )


def commutator(group: FiniteGroup, g: int, h: int) -> int:
    """``[g, h] = g⁻¹h⁻¹gh``, the one convention used throughout."""
    rows = group.rows
    inverses = group.inverses
    return rows[rows[rows[inverses[g]][inverses[h]]][g]][h]


def _as_indices(seed: ElementSet | Iterable[int]) -> list[int]:
    return list(seed)


def subgroup_generated(
    group: FiniteGroup, seed: ElementSet | Iterable[int]
) -> ElementSet:
    generators = sorted(set(_as_indices(seed)) - {0})
    rows = group.rows
    members = 1
    queue = deque([0])
    while queue:
        current = rows[queue.popleft()]
        for generator in generators:
            product = current[generator]
            if not members >> product & 1:
                members |= 1 << product
                queue.append(product)
    return ElementSet(group, members, SetKind.SUBGROUP)


def conjugacy_closure(
    group: FiniteGroup, seed: ElementSet | Iterable[int]
) -> ElementSet:
    indices = np.asarray(_as_indices(seed), dtype=np.intp)
    if not indices.size:
        return ElementSet(group, 0)
    table = group.table
    conjugators = np.arange(group.order, dtype=np.intp)
    # [c, s] -> c s c⁻¹
    images = table[
        table[conjugators[:, None], indices[None, :]],
        group.inverse_array[:, None],
    ]
    return group.element_set(np.unique(images).tolist())


def normal_closure(
    group: FiniteGroup, seed: ElementSet | Iterable[int]
) -> ElementSet:
    closure = subgroup_generated(group, conjugacy_closure(group, seed))
    return closure.with_kind(SetKind.NORMAL)


def commutator_span(
    group: FiniteGroup, left: ElementSet, right: ElementSet
) -> ElementSet:
    """The subgroup generated by ``[x, y]``, x in left and y in right."""
    values = group.commutators[np.ix_(left.to_array(), right.to_array())]
    return subgroup_generated(group, np.unique(values).tolist())


def derived_subgroup(group: FiniteGroup) -> ElementSet:
    return commutator_span(group, group.whole, group.whole).with_kind(
        SetKind.NORMAL
    )


def center(group: FiniteGroup) -> ElementSet:
    table = group.table
    central = np.flatnonzero((table == table.T).all(axis=1))
    return group.element_set(central.tolist(), SetKind.NORMAL)


def is_subgroup(candidate: ElementSet) -> bool:
    if 0 not in candidate:
        return False
    indices = candidate.to_array()
    products = candidate.group.table[np.ix_(indices, indices)]
    return bool(candidate.mask()[products].all())


def is_normal_subgroup(candidate: ElementSet) -> bool:
    if not is_subgroup(candidate):
        return False
    return conjugacy_closure(candidate.group, candidate) == candidate


def require_subgroup(candidate: ElementSet) -> None:
    if not is_subgroup(candidate):
        raise NotASubgroupError(
            label=candidate.group.label, reason="is not a subgroup"
        )


def element_order(group: FiniteGroup, g: int) -> int:
    order, current = 1, g
    while current != 0:
        current = group.mul(current, g)
        order += 1
    return order


def default_generators(group: FiniteGroup) -> tuple[int, ...]:
    """Recorded generators, else a greedy generating set."""
    if group.generators is not None:
        return group.generators
    chosen: list[int] = []
    span = group.trivial
    while not span.is_whole:
        chosen.append(group.whole.difference(span).smallest())
        span = subgroup_generated(group, chosen)
    return tuple(chosen)


def quotient_group(
    group: FiniteGroup, kernel: ElementSet, label: str | None = None
) -> FiniteGroup:
    """``G/W``; cosets are numbered by their smallest representative."""
    if not is_normal_subgroup(kernel):
        raise NotASubgroupError(
            label=group.label, reason="is not a normal subgroup"
        )
    coset_of = np.full(group.order, -1, dtype=np.intp)
    representatives: list[int] = []
    kernel_members = kernel.to_array()
    for g in group.elements:
        if coset_of[g] < 0:
            coset_of[group.table[g, kernel_members]] = len(representatives)
            representatives.append(g)
    reps = np.asarray(representatives, dtype=np.intp)
    table = coset_of[group.table[np.ix_(reps, reps)]]
    names = [f"{group.name(g)}W" for g in representatives]
    return build_from_table(
        len(reps),
        table,
        label or f"{group.label}/W{len(kernel)}",
        element_names=names,
    )


def _prime_factors(value: int) -> list[int]:
    factors: list[int] = []
    candidate = 2
    while candidate * candidate <= value:
        if value % candidate == 0:
            factors.append(candidate)
            while value % candidate == 0:
                value //= candidate
        candidate += 1
    if value > 1:
        factors.append(value)
    return factors


def abelianization_primes(group: FiniteGroup) -> list[int]:
    """Primes dividing ``|G : [G, G]|``; empty exactly when G is perfect."""
    return _prime_factors(group.order // len(derived_subgroup(group)))


def conjugate_width(group: FiniteGroup, b: int) -> int:
    """Least R such that every element of the normal closure of ``b`` is a
    product of at most R conjugates of powers of ``b``."""
    cyclic = subgroup_generated(group, [b])
    factors = sorted(set(conjugacy_closure(group, cyclic)) - {0})
    rows = group.rows
    distance = {0: 0}
    queue = deque([0])
    while queue:
        current = queue.popleft()
        for factor in factors:
            product = rows[current][factor]
            if product not in distance:
                distance[product] = distance[current] + 1
                queue.append(product)
    return max(distance.values())
