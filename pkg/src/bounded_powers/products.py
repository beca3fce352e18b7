"""Finite powers ``G^n``: embeddings ``x_J``, lifted monomials, the four
relations behind the witness argument and closure-layer experiments.

An element of ``G^n`` is also addressed by a mixed-radix code, coordinate 0
least significant, so the identity has code 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, TypeAlias

import numpy as np
import numpy.typing as npt

from .boolean import BoolFamily, op_V
from .config import DEFAULT_LIMITS, LabLimits
from .errors import InputError, ResourceCapError
from .groups import NotASubgroupError, is_normal_subgroup
from .log_utility import ProgressLog
from .monomials import ArityMismatchError, evaluate, evaluate_columns
from .series import last_term

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Sequence

    from .groups import ElementSet, FiniteGroup, IntArray
    from .monomials import Monomial, Witness
    from .parsing import JsonValue

logger = logging.getLogger(__name__)

CodeArray: TypeAlias = npt.NDArray[np.int64]
BoolArray: TypeAlias = npt.NDArray[np.bool_]

_PRODUCT_CHUNK = 1 << 18


class StateSpaceTooLargeError(ResourceCapError):
    def __init__(self, *, size: int, cap: int) -> None:
        super().__init__("state space", size=size, cap=cap)


class SizeCapError(ResourceCapError):
    pass


class RelationPowerTooLargeError(ResourceCapError):
    def __init__(self, *, size: int, cap: int) -> None:
        super().__init__("relation check power", size=size, cap=cap)


class IndexSetError(InputError):
    def __init__(self, indices: Iterable[int], *, power: int) -> None:
        self.indices = sorted(indices)
        self.power = power
        super().__init__(
            f"index set {self.indices} is not a subset of "
            f"{{0, ..., {power - 1}}}"
        )


class InvalidProductElementError(InputError):
    def __init__(self, detail: str) -> None:
        super().__init__(f"invalid product element: {detail}")
        self.detail = detail


@dataclass(frozen=True)
class ProductElement:
    """A tuple of ``base`` elements, one per index ``0..n-1``."""

    base: FiniteGroup = field(repr=False)
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        if bad := [c for c in self.coords if not 0 <= c < self.base.order]:
            raise InvalidProductElementError(
                f"coordinates {bad} are not elements of {self.base.label}"
            )

    @classmethod
    def identity(cls, base: FiniteGroup, power: int) -> ProductElement:
        return cls(base, (0,) * power)

    @property
    def power(self) -> int:
        return len(self.coords)

    @property
    def is_identity(self) -> bool:
        return not any(self.coords)

    def support(self) -> frozenset[int]:
        return frozenset(i for i, c in enumerate(self.coords) if c)

    def _check_compatible(self, other: ProductElement) -> None:
        if other.base is not self.base or other.power != self.power:
            raise InvalidProductElementError(
                f"cannot combine elements of {self.base.label}^{self.power} "
                f"and {other.base.label}^{other.power}"
            )

    def __mul__(self, other: ProductElement) -> ProductElement:
        self._check_compatible(other)
        rows = self.base.rows
        return ProductElement(
            self.base,
            tuple(rows[g][h] for g, h in zip(self.coords, other.coords)),
        )

    def inverse(self) -> ProductElement:
        inverses = self.base.inverses
        return ProductElement(
            self.base, tuple(inverses[g] for g in self.coords)
        )

    def names(self) -> list[str]:
        return [self.base.name(g) for g in self.coords]

    def to_json(self) -> JsonValue:
        return list(self.coords)


@dataclass(frozen=True, eq=False)
class PowerGroup:
    """``base^power`` addressed by mixed-radix codes."""

    base: FiniteGroup
    power: int

    @classmethod
    def of(
        cls,
        base: FiniteGroup,
        power: int,
        *,
        limits: LabLimits | None = None,
    ) -> PowerGroup:
        limits = limits or DEFAULT_LIMITS
        if power < 0:
            message = f"power must be >= 0, got {power}"
            raise InputError(message)
        if (size := base.order**power) > limits.max_states:
            raise StateSpaceTooLargeError(size=size, cap=limits.max_states)
        return cls(base, power)

    @property
    def label(self) -> str:
        return f"{self.base.label}^{self.power}"

    @cached_property
    def order(self) -> int:
        return int(self.base.order**self.power)

    @cached_property
    def weights(self) -> CodeArray:
        weights = self.base.order ** np.arange(self.power, dtype=np.int64)
        weights.flags.writeable = False
        return weights

    def decode(self, codes: npt.ArrayLike) -> IntArray:
        """Coordinates along a new last axis."""
        codes = np.asarray(codes, dtype=np.int64)
        coords = (codes[..., None] // self.weights) % self.base.order
        return coords.astype(np.intp)

    def encode(self, coords: npt.ArrayLike) -> CodeArray:
        return np.asarray(coords, dtype=np.int64) @ self.weights

    def mul_codes(
        self, left: npt.ArrayLike, right: npt.ArrayLike
    ) -> CodeArray:
        table = self.base.table
        return self.encode(table[self.decode(left), self.decode(right)])

    def inv_codes(self, codes: npt.ArrayLike) -> CodeArray:
        return self.encode(self.base.inverse_array[self.decode(codes)])

    def element(self, code: int) -> ProductElement:
        return ProductElement(self.base, tuple(self.decode(code).tolist()))

    def code_of(self, element: ProductElement) -> int:
        if element.base is not self.base or element.power != self.power:
            raise InvalidProductElementError(
                f"{element.names()} is not an element of {self.label}"
            )
        return int(self.encode(element.coords))

    def codes_of(self, elements: Iterable[ProductElement]) -> CodeArray:
        return np.array(
            [self.code_of(element) for element in elements], dtype=np.int64
        )

    def embedding_codes(self, x: int) -> CodeArray:
        """Codes of ``x_J`` for every ``J``, indexed by the bitmask of J."""
        masks = np.arange(1 << self.power, dtype=np.int64)
        bits = (masks[:, None] >> np.arange(self.power)) & 1
        return self.encode(bits * x)

    def power_codes(self, members: ElementSet) -> CodeArray:
        """Codes of every tuple with all coordinates in ``members``."""
        values = members.to_array().astype(np.int64)
        codes = np.zeros(1, dtype=np.int64)
        for weight in self.weights.tolist():
            codes = (codes[:, None] + values[None, :] * weight).ravel()
        return codes


def _index_set(indices: Iterable[int], power: int) -> frozenset[int]:
    result = frozenset(indices)
    if any(not 0 <= index < power for index in result):
        raise IndexSetError(result, power=power)
    return result


def _indices_of(mask: int, power: int) -> list[int]:
    return [i for i in range(power) if mask >> i & 1]


def embed_xJ(  # noqa: N802
    group: FiniteGroup, n: int, x: int, indices: Iterable[int]
) -> ProductElement:
    """``x`` on ``indices`` and the identity elsewhere."""
    support = _index_set(indices, n)
    if not 0 <= x < group.order:
        raise InvalidProductElementError(
            f"{x} is not an element of {group.label}"
        )
    return ProductElement(
        group, tuple(x if i in support else 0 for i in range(n))
    )


@dataclass(frozen=True)
class LiftedMonomial:
    """A monomial applied coordinatewise; ``Const(c)`` acts as ``c_I``."""

    space: PowerGroup
    monomial: Monomial

    @property
    def arity(self) -> int:
        return self.monomial.arity

    def _evaluate_flat(
        self, columns: Sequence[IntArray], size: int
    ) -> IntArray:
        if not columns:
            value = evaluate(self.space.base, self.monomial, ())
            return np.full(size, value, dtype=np.intp)
        return evaluate_columns(self.space.base, self.monomial, columns)

    def __call__(self, *args: ProductElement) -> ProductElement:
        if len(args) != self.arity:
            raise ArityMismatchError(arity=self.arity, given=len(args))
        for arg in args:
            self.space.code_of(arg)
        columns = [np.array(arg.coords, dtype=np.intp) for arg in args]
        values = self._evaluate_flat(columns, self.space.power)
        return ProductElement(self.space.base, tuple(values.tolist()))

    def apply_codes(self, args: Sequence[npt.ArrayLike]) -> CodeArray:
        """Apply to many argument tuples given as code arrays."""
        if len(args) != self.arity:
            raise ArityMismatchError(arity=self.arity, given=len(args))
        decoded = np.broadcast_arrays(
            *(self.space.decode(codes) for codes in args)
        )
        shape = decoded[0].shape if decoded else (1, self.space.power)
        columns = [coords.ravel() for coords in decoded]
        values = self._evaluate_flat(columns, int(np.prod(shape)))
        return self.space.encode(values.reshape(shape))


def lift_monomial(
    group: FiniteGroup,
    monomial: Monomial,
    n: int,
    *,
    limits: LabLimits | None = None,
) -> LiftedMonomial:
    return LiftedMonomial(PowerGroup.of(group, n, limits=limits), monomial)


def lift_depth(monomial: Monomial) -> int:
    """Closure steps after which ``f̄(X_m, X_m)`` lies in ``X_(m+d)``,
    provided every constant of ``f`` is already in ``X_0``.

    One step makes the inverses available, then products of ``len(f)``
    factors need ``ceil(log2 len(f))`` more.
    """
    return 1 + (max(len(monomial), 1) - 1).bit_length()


@dataclass(frozen=True)
class EquationCheck:
    key: str
    statement: str
    anchor: str
    cases: int
    counterexample: tuple[list[int], list[int] | None] | None = None

    @property
    def passed(self) -> bool:
        return self.counterexample is None

    def to_json(self) -> dict[str, JsonValue]:
        result: dict[str, JsonValue] = {
            "key": self.key,
            "statement": self.statement,
            "anchor": self.anchor,
            "cases": self.cases,
            "passed": self.passed,
        }
        if self.counterexample is not None:
            j, k = self.counterexample
            result["counterexample"] = {"J": j, "K": k}
        return result


def _equation(
    key: str,
    statement: str,
    *,
    anchor: str,
    power: int,
    lhs: CodeArray,
    rhs: CodeArray,
    j: CodeArray,
    k: CodeArray | None = None,
) -> EquationCheck:
    failures = np.flatnonzero(lhs != rhs)
    counterexample = None
    if failures.size:
        first = int(failures[0])
        counterexample = (
            _indices_of(int(j[first]), power),
            None if k is None else _indices_of(int(k[first]), power),
        )
        logger.error(f"{key} fails at {counterexample}")
    return EquationCheck(
        key, statement, anchor, int(lhs.size), counterexample
    )


@dataclass(frozen=True)
class RelationsReport:
    label: str
    n: int
    equations: tuple[EquationCheck, ...]

    @property
    def passed(self) -> bool:
        return all(equation.passed for equation in self.equations)

    def to_json(self) -> dict[str, JsonValue]:
        return {
            "group": self.label,
            "n": self.n,
            "passed": self.passed,
            "equations": [equation.to_json() for equation in self.equations],
        }


def verify_relations(
    witness: Witness, n: int, *, limits: LabLimits | None = None
) -> RelationsReport:
    """Check the four relations between ``a_J``, ``b_K`` and ``f̄`` for
    every pair of subsets of ``{0, ..., n-1}``."""
    limits = limits or DEFAULT_LIMITS
    if n > limits.max_relation_power:
        raise RelationPowerTooLargeError(
            size=n, cap=limits.max_relation_power
        )
    lifted = lift_monomial(witness.group, witness.f, n, limits=limits)
    space = lifted.space
    a = space.embedding_codes(witness.a)
    b = space.embedding_codes(witness.b)
    full = (1 << n) - 1
    subsets = np.arange(1 << n, dtype=np.int64)
    j, k = (
        grid.ravel() for grid in np.meshgrid(subsets, subsets, indexing="ij")
    )
    disjoint = (j & k) == 0
    j_disjoint, k_disjoint = j[disjoint], k[disjoint]
    equations = (
        _equation(
            "constant_quotient",
            "a_I a_J^-1 = a_(I-J)",
            anchor="lemma:Main_Lemma.eq1",
            power=n,
            lhs=space.mul_codes(a[full], space.inv_codes(a[subsets])),
            rhs=a[full ^ subsets],
            j=subsets,
        ),
        _equation(
            "lift_intersects_supports",
            "f(a_J, b_K) = b_(J&K)",
            anchor="lemma:Main_Lemma.eq2",
            power=n,
            lhs=lifted.apply_codes([a[j], b[k]]),
            rhs=b[j & k],
            j=j,
            k=k,
        ),
        _equation(
            "lift_restricts_support",
            "f(a_J, b_I) = b_J",
            anchor="lemma:Main_Lemma.eq3",
            power=n,
            lhs=lifted.apply_codes([a[subsets], b[full]]),
            rhs=b[subsets],
            j=subsets,
        ),
        _equation(
            "disjoint_supports_multiply",
            "b_J b_K = b_(J|K) for disjoint J, K",
            anchor="lemma:Main_Lemma.eq4",
            power=n,
            lhs=space.mul_codes(b[j_disjoint], b[k_disjoint]),
            rhs=b[j_disjoint | k_disjoint],
            j=j_disjoint,
            k=k_disjoint,
        ),
    )
    report = RelationsReport(witness.group.label, n, equations)
    logger.info(
        f"{witness.group.label}: relations at n={n} "
        f"{'pass' if report.passed else 'FAIL'}"
    )
    return report


def _presence(
    space: PowerGroup, codes: npt.ArrayLike, *, limits: LabLimits
) -> BoolArray:
    if space.order > limits.closure_cap:
        raise SizeCapError(
            "closure state space", size=space.order, cap=limits.closure_cap
        )
    present = np.zeros(space.order, dtype=np.bool_)
    present[np.asarray(codes, dtype=np.int64)] = True
    return present


def _closure_step(space: PowerGroup, present: BoolArray) -> BoolArray:
    """One step on a presence array; the state cap is checked by
    ``_presence``."""
    members = np.flatnonzero(present)
    if 2 * len(members) > space.order:
        # hX⁻¹ meets X for every h, so XX is everything
        return np.ones(space.order, dtype=np.bool_)
    following = present.copy()
    following[0] = True
    following[space.inv_codes(members)] = True
    coords = space.decode(members)
    table = space.base.table
    chunk = max(1, _PRODUCT_CHUNK // max(1, len(members)))
    for start in range(0, len(members), chunk):
        left = coords[start : start + chunk, None, :]
        products = space.encode(table[left, coords[None, :, :]])
        following[products.ravel()] = True
        if following.all():
            break
    return following


def group_closure_step(
    space: PowerGroup,
    elements: Iterable[ProductElement],
    *,
    limits: LabLimits | None = None,
) -> frozenset[ProductElement]:
    """``X ∪ {1} ∪ X⁻¹ ∪ XX``."""
    limits = limits or DEFAULT_LIMITS
    present = _presence(space, space.codes_of(elements), limits=limits)
    following = _closure_step(space, present)
    return frozenset(
        space.element(code) for code in np.flatnonzero(following).tolist()
    )


def closure_layers(
    space: PowerGroup,
    seed: npt.ArrayLike,
    *,
    limits: LabLimits | None = None,
) -> Iterator[BoolArray]:
    """``X_0 = seed, X_(m+1) = G(X_m)`` up to and including the fixed
    point."""
    limits = limits or DEFAULT_LIMITS
    present = _presence(space, seed, limits=limits)
    progress = ProgressLog(logger, f"{space.label} closure")
    yield present
    while True:
        following = _closure_step(space, present)
        if np.array_equal(following, present):
            return
        present = following
        progress.update(f"layer {progress.updates + 1} has {present.sum()}")
        yield present


@dataclass(frozen=True)
class ExhaustionOutcome:
    """Least ``m`` with ``target^n ⊆ X_m``; ``steps`` is None when the
    fixed point of the layers misses ``target^n``."""

    label: str
    n: int
    steps: int | None
    layer_sizes: tuple[int, ...]
    target_size: int

    @property
    def reachable(self) -> bool:
        return self.steps is not None

    def to_json(self) -> dict[str, JsonValue]:
        return {
            "group": self.label,
            "n": self.n,
            "reachable": self.reachable,
            "steps": self.steps,
            "layer_sizes": list(self.layer_sizes),
            "target_size": self.target_size,
        }


def exhaustion_experiment(
    group: FiniteGroup,
    n: int,
    seed: Iterable[ProductElement],
    target: ElementSet,
    *,
    limits: LabLimits | None = None,
) -> ExhaustionOutcome:
    limits = limits or DEFAULT_LIMITS
    if not is_normal_subgroup(target):
        raise NotASubgroupError(
            label=group.label, reason="target is not a normal subgroup"
        )
    space = PowerGroup.of(group, n, limits=limits)
    wanted = space.power_codes(target)
    sizes: list[int] = []
    steps = None
    layers = closure_layers(space, space.codes_of(seed), limits=limits)
    for index, present in enumerate(layers):
        sizes.append(int(present.sum()))
        if present[wanted].all():
            steps = index
            break
    return ExhaustionOutcome(
        group.label, n, steps, tuple(sizes), len(target) ** n
    )


def witness_seed(witness: Witness, n: int) -> frozenset[ProductElement]:
    """Every ``a_J``, then ``b_I`` and every constant ``c_I``."""
    group = witness.group
    full = range(n)
    seed = {
        ProductElement(
            group, tuple(witness.a if mask >> i & 1 else 0 for i in full)
        )
        for mask in range(1 << n)
    }
    seed.add(embed_xJ(group, n, witness.b, full))
    seed.update(embed_xJ(group, n, c, full) for c in group.elements)
    return frozenset(seed)


def exhaustion_table(
    witness: Witness,
    ns: Iterable[int],
    *,
    target: ElementSet | None = None,
    limits: LabLimits | None = None,
) -> list[ExhaustionOutcome]:
    """Steps needed from the witness seed, one row per ``n``; the target
    defaults to the last term of the lower central series."""
    group = witness.group
    target = target or last_term(group)
    table = []
    for n in ns:
        outcome = exhaustion_experiment(
            group, n, witness_seed(witness, n), target, limits=limits
        )
        logger.info(f"{group.label}: n={n} steps={outcome.steps}")
        table.append(outcome)
    return table


@dataclass(frozen=True)
class SupportProfile:
    """Supports of ``a_J`` and ``b_J`` present in each closure layer."""

    label: str
    n: int
    depth: int
    a_supports: tuple[BoolFamily, ...]
    b_supports: tuple[BoolFamily, ...]

    def _later(self, m: int) -> BoolFamily:
        return self.b_supports[min(m, len(self.b_supports) - 1)]

    @property
    def lift_within_depth(self) -> bool:
        """``a_J ∈ X_m`` implies ``b_J ∈ X_(m+depth)``."""
        return all(
            family <= self._later(m + self.depth)
            for m, family in enumerate(self.a_supports)
        )

    @property
    def disjoint_pairs_advance(self) -> bool:
        """Disjoint unions of two ``b`` supports appear one layer later."""
        return all(
            op_V(2, family) <= self._later(m + 1)
            for m, family in enumerate(self.b_supports)
        )

    def to_json(self) -> dict[str, JsonValue]:
        return {
            "group": self.label,
            "n": self.n,
            "depth": self.depth,
            "a_supports": [sorted(family) for family in self.a_supports],
            "b_supports": [sorted(family) for family in self.b_supports],
            "lift_within_depth": self.lift_within_depth,
            "disjoint_pairs_advance": self.disjoint_pairs_advance,
        }


def support_profile(
    witness: Witness,
    n: int,
    *,
    seed: Iterable[ProductElement] | None = None,
    limits: LabLimits | None = None,
) -> SupportProfile:
    """Closure layers from ``seed`` (the witness seed by default) read as
    families of subsets of ``{0, ..., n-1}``.

    Both checks rely on ``b_I`` and every ``c_I`` being in the seed.
    """
    limits = limits or DEFAULT_LIMITS
    space = PowerGroup.of(witness.group, n, limits=limits)
    seed = witness_seed(witness, n) if seed is None else seed
    a = space.embedding_codes(witness.a)
    b = space.embedding_codes(witness.b)
    a_supports: list[BoolFamily] = []
    b_supports: list[BoolFamily] = []
    for present in closure_layers(space, space.codes_of(seed), limits=limits):
        a_supports.append(
            BoolFamily.of(n, np.flatnonzero(present[a]).tolist())
        )
        b_supports.append(
            BoolFamily.of(n, np.flatnonzero(present[b]).tolist())
        )
    return SupportProfile(
        witness.group.label,
        n,
        lift_depth(witness.f),
        tuple(a_supports),
        tuple(b_supports),
    )
