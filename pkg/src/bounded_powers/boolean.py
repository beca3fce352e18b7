"""Families of subsets of a finite set ``E`` and the closure operators of
the Boolean ring ``P(E)``.

A subset is a bitmask below ``2**|E|``. In the ring, product is AND, sum is
XOR, ``0`` is the empty mask and ``1`` the full mask; ``-1 = 1`` since the
characteristic is 2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, TypeAlias, TypeVar

import numpy as np
import numpy.typing as npt

from .config import DEFAULT_LIMITS, LabLimits
from .errors import InputError, ResourceCapError

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Iterator

    from .parsing import JsonValue

logger = logging.getLogger(__name__)

MaskArray: TypeAlias = npt.NDArray[np.int64]
Mask = TypeVar("Mask", int, MaskArray)


class UniverseTooLargeError(ResourceCapError):
    def __init__(self, *, size: int, cap: int) -> None:
        super().__init__("universe size", size=size, cap=cap)


class InvalidFamilyError(InputError):
    def __init__(self, detail: str) -> None:
        super().__init__(f"invalid family: {detail}")
        self.detail = detail


class HypothesisViolatedError(InputError):
    """Raised when a family is not symmetric or lacks the empty set."""

    def __init__(self, family: BoolFamily) -> None:
        super().__init__(
            "family must contain 0 and be closed under complement: "
            f"{family.describe()}"
        )
        self.family = family


class BoundTooLargeError(ResourceCapError):
    def __init__(self, *, size: int, cap: int) -> None:
        super().__init__("iteration bound", size=size, cap=cap)


@dataclass(frozen=True)
class BoolFamily:
    """A deduplicated family of subsets of ``{0, ..., universe_size - 1}``."""

    universe_size: int
    sets: frozenset[int]

    @classmethod
    def of(
        cls,
        universe_size: int,
        sets: Iterable[int],
        *,
        limits: LabLimits | None = None,
    ) -> BoolFamily:
        limits = limits or DEFAULT_LIMITS
        if universe_size < 0:
            message = f"negative universe {universe_size}"
            raise InvalidFamilyError(message)
        if universe_size > limits.max_universe:
            raise UniverseTooLargeError(
                size=universe_size, cap=limits.max_universe
            )
        members = frozenset(int(mask) for mask in sets)
        limit = 1 << universe_size
        if bad := sorted(mask for mask in members if not 0 <= mask < limit):
            raise InvalidFamilyError(
                f"masks {bad} do not fit a universe of {universe_size}"
            )
        return cls(universe_size, members)

    @classmethod
    def from_subsets(
        cls, universe_size: int, subsets: Iterable[Iterable[int]]
    ) -> BoolFamily:
        return cls.of(
            universe_size,
            (sum(1 << point for point in set(subset)) for subset in subsets),
        )

    @classmethod
    def empty(cls, universe_size: int) -> BoolFamily:
        return cls.of(universe_size, ())

    @classmethod
    def power_set(cls, universe_size: int) -> BoolFamily:
        return cls.of(universe_size, range(1 << universe_size))

    @property
    def full(self) -> int:
        return (1 << self.universe_size) - 1

    @cached_property
    def array(self) -> MaskArray:
        array = np.array(sorted(self.sets), dtype=np.int64)
        array.flags.writeable = False
        return array

    def __contains__(self, mask: object) -> bool:
        return mask in self.sets

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.sets))

    def __len__(self) -> int:
        return len(self.sets)

    def __le__(self, other: BoolFamily) -> bool:
        return self.issubset(other)

    def issubset(self, other: BoolFamily) -> bool:
        return self.sets <= other.sets

    def _from_array(self, masks: npt.ArrayLike) -> BoolFamily:
        return BoolFamily(
            self.universe_size,
            frozenset(np.unique(np.asarray(masks)).tolist()),
        )

    def complement(self, mask: int) -> int:
        return self.full ^ mask

    def is_symmetric_with_zero(self) -> bool:
        return 0 in self.sets and all(
            self.complement(mask) in self.sets for mask in self.sets
        )

    def describe(self) -> str:
        return f"|E|={self.universe_size} sets={sorted(self.sets)}"

    def to_json(self) -> dict[str, JsonValue]:
        return {"universe": self.universe_size, "sets": sorted(self.sets)}


def _pairwise(
    family: BoolFamily, *, disjoint_sums_only: bool
) -> BoolFamily:
    masks = family.array
    products = np.bitwise_and.outer(masks, masks)
    sums = np.bitwise_xor.outer(masks, masks)
    if disjoint_sums_only:
        sums = sums[products == 0]
    constants = np.array([0, family.full], dtype=np.int64)
    return family._from_array(
        np.concatenate([masks, constants, products.ravel(), sums.ravel()])
    )


def op_R(family: BoolFamily) -> BoolFamily:  # noqa: N802
    """``X ∪ {0, 1} ∪ {x + y} ∪ {xy}`` over all pairs."""
    return _pairwise(family, disjoint_sums_only=False)


def op_D(family: BoolFamily) -> BoolFamily:  # noqa: N802
    """Like ``op_R`` but only sums of disjoint pairs."""
    return _pairwise(family, disjoint_sums_only=True)


def iterate(
    operator: Callable[[BoolFamily], BoolFamily],
    family: BoolFamily,
    times: int,
) -> BoolFamily:
    for _ in range(times):
        following = operator(family)
        if following == family:
            break  # every further application is the identity too
        family = following
    return family


def ring_closure(family: BoolFamily) -> BoolFamily:
    """The subring generated by ``family``: least fixed point of ``op_R``."""
    steps = 0
    while (following := op_R(family)) != family:
        family = following
        steps += 1
    logger.debug(f"ring closure stable after {steps} steps: {len(family)}")
    return family


def _require_positive(k: int) -> None:
    if k < 1:
        message = f"k must be >= 1, got {k}"
        raise InvalidFamilyError(message)


def op_I(k: int, family: BoolFamily) -> BoolFamily:  # noqa: N802
    """All products of ``k`` (not necessarily distinct) members."""
    _require_positive(k)
    masks = family.array
    products = masks
    for _ in range(k - 1):
        if not products.size:
            break
        following = np.unique(np.bitwise_and.outer(products, masks))
        if np.array_equal(following, products):
            break  # x·x = x makes the sequence stationary from here on
        products = following
    return family._from_array(products)


def op_V(k: int, family: BoolFamily) -> BoolFamily:  # noqa: N802
    """All sums of ``k`` pairwise disjoint members.

    Disjointness forces the nonzero summands to be distinct, so only ``0``
    can repeat. Unions of ``j`` disjoint nonzero members are grown one
    member at a time over a presence array indexed by mask.
    """
    _require_positive(k)
    nonzero = family.array[family.array != 0]
    reach = np.zeros(1 << family.universe_size, dtype=np.bool_)
    reach[0] = True  # the empty sum
    collected = reach.copy() if 0 in family else None
    for _ in range(k):
        current = np.flatnonzero(reach)
        following = np.zeros_like(reach)
        for mask in nonzero.tolist():
            free = current[(current & mask) == 0]
            following[free | mask] = True
        reach = following
        if collected is not None:
            if not (reach & ~collected).any():
                break  # padded with zeros, nothing new can appear later
            collected |= reach
        elif not reach.any():
            break
    result = reach if collected is None else collected
    return family._from_array(np.flatnonzero(result))


def symmetrize(family: BoolFamily) -> BoolFamily:
    """``family ∪ {0}`` together with all complements."""
    with_zero = family.sets | {0}
    return BoolFamily(
        family.universe_size,
        with_zero | {family.complement(mask) for mask in with_zero},
    )


def disjoint_decomposition(x: Mask, y: Mask, full: int) -> tuple[Mask, Mask]:
    """Write ``x + y`` as the disjoint sum ``(1 - x)y + (1 - y)x``; works
    elementwise on mask arrays too."""
    return (full ^ x) & y, (full ^ y) & x


def _check_hypothesis(family: BoolFamily) -> None:
    if not family.is_symmetric_with_zero():
        raise HypothesisViolatedError(family)


def check_disjoint_split(family: BoolFamily) -> bool:
    """Every ``x + y`` over ``X`` is the sum of two disjoint members of
    ``D(X)``, hence lies in ``D(D(X))``. ``X`` must be symmetric and
    contain 0."""
    _check_hypothesis(family)
    masks = family.array
    left, right = disjoint_decomposition(
        masks[:, None], masks[None, :], family.full
    )
    sums = np.bitwise_xor.outer(masks, masks)
    once = op_D(family)
    twice = op_D(once)
    return bool(
        not (left & right).any()
        and np.array_equal(left ^ right, sums)
        and np.isin(left, once.array).all()
        and np.isin(right, once.array).all()
        and np.isin(sums, twice.array).all()
    )


def check_RnD2n_part1(  # noqa: N802
    family: BoolFamily, n: int, *, limits: LabLimits | None = None
) -> bool:
    """``R^n(X) ⊆ D^(2n)(X)`` for symmetric ``X`` containing 0."""
    limits = limits or DEFAULT_LIMITS
    _check_hypothesis(family)
    if n > limits.max_series_power:
        raise BoundTooLargeError(size=n, cap=limits.max_series_power)
    ring_side = iterate(op_R, family, n)
    disjoint_side = iterate(op_D, family, 2 * n)
    return ring_side <= disjoint_side


def check_RnD2n_part2(  # noqa: N802
    family: BoolFamily, n: int, *, limits: LabLimits | None = None
) -> bool:
    """``D^n(X) ⊆ V_(2^2^n)(I_(2^n)(X))`` for symmetric ``X`` containing 0."""
    limits = limits or DEFAULT_LIMITS
    _check_hypothesis(family)
    if n > limits.max_disjoint_power:
        raise BoundTooLargeError(size=n, cap=limits.max_disjoint_power)
    disjoint_side = iterate(op_D, family, n)
    bound_side = op_V(2 ** (2**n), op_I(2**n, family))
    return disjoint_side <= bound_side


def random_family(
    universe_size: int, rng: np.random.Generator
) -> BoolFamily:
    """Each subset kept with probability 1/2, then symmetrized."""
    keep = rng.random(1 << universe_size) < 0.5  # noqa: PLR2004
    family = BoolFamily.of(universe_size, np.flatnonzero(keep).tolist())
    return symmetrize(family)
