"""Property suites: each checks named statements over many cases and
collects counterexamples instead of stopping at the first one."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .boolean import (
    check_disjoint_split,
    check_RnD2n_part1,
    check_RnD2n_part2,
    random_family,
)
from .cayley import (
    GeneratingSet,
    check_ball_power,
    check_length_function,
    union_of_factors,
)
from .config import DEFAULT_LIMITS, LabLimits
from .errors import InputError
from .monomials import (
    Const,
    GroupIsNilpotentError,
    InternalContradictionError,
    Monomial,
    check_central_vanishing,
    commutator_monomial,
    exhaust_no_witness,
    find_witness,
    projection,
    random_homogeneous_monomials,
)
from .products import verify_relations
from .series import is_nilpotent

if TYPE_CHECKING:
    from .catalog import Catalog
    from .groups import FiniteGroup
    from .parsing import JsonValue

logger = logging.getLogger(__name__)

MAX_COUNTEREXAMPLES = 5
BALL_RANGE = 6
CENTRAL_VANISHING_MAX_ORDER = 24
RELATION_CASES = (("S3", 4), ("A5", 3))


class UnknownSuiteError(InputError):
    def __init__(self, name: str) -> None:
        super().__init__(
            f"Unknown suite {name!r}; known suites: {', '.join(SUITES)}"
        )
        self.name = name


@dataclass(frozen=True)
class StatementResult:
    key: str
    anchor: str
    cases: int
    failures: int
    counterexamples: tuple[JsonValue, ...] = ()

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict[str, JsonValue]:
        return {
            "statement": self.key,
            "anchor": self.anchor,
            "cases": self.cases,
            "failures": self.failures,
            "passed": self.passed,
            "counterexamples": list(self.counterexamples),
        }


@dataclass
class _Tally:
    key: str
    anchor: str
    cases: int = 0
    failures: int = 0
    counterexamples: list[JsonValue] = field(default_factory=list)

    def record(
        self,
        holds: bool,
        example: Callable[[], JsonValue],
        *,
        cases: int = 1,
    ) -> None:
        self.cases += cases
        if holds:
            return
        self.failures += 1
        if len(self.counterexamples) < MAX_COUNTEREXAMPLES:
            self.counterexamples.append(example())
        logger.error(f"{self.key} fails: {self.counterexamples[-1]}")

    def result(self) -> StatementResult:
        return StatementResult(
            self.key,
            self.anchor,
            self.cases,
            self.failures,
            tuple(self.counterexamples),
        )


@dataclass(frozen=True)
class SuiteResult:
    name: str
    seed: int
    trials: int
    statements: tuple[StatementResult, ...]

    @property
    def passed(self) -> bool:
        return all(statement.passed for statement in self.statements)

    def to_json(self) -> dict[str, JsonValue]:
        return {
            "suite": self.name,
            "trials": self.trials,
            "passed": self.passed,
            "statements": [s.to_json() for s in self.statements],
        }


@dataclass(frozen=True)
class SuiteContext:
    catalog: Catalog
    seed: int
    trials: int
    limits: LabLimits

    def streams(self, count: int) -> list[np.random.Generator]:
        """Independent generators, one per trial or group, so results do
        not depend on evaluation order."""
        children = np.random.SeedSequence(self.seed).spawn(count)
        return [np.random.default_rng(child) for child in children]

    def groups(self) -> list[FiniteGroup]:
        labels = sorted({entry.label for entry in self.catalog})
        return [self.catalog.group(label) for label in labels]


SuiteFunction = Callable[[SuiteContext], list[StatementResult]]
SUITES: dict[str, SuiteFunction] = {}


def _suite(name: str) -> Callable[[SuiteFunction], SuiteFunction]:
    def register(function: SuiteFunction) -> SuiteFunction:
        SUITES[name] = function
        return function

    return register


@_suite("rnd2n")
def _ring_steps(context: SuiteContext) -> list[StatementResult]:
    first = _Tally("ring_steps_within_double_disjoint_steps", "lemma:RnD2n.1")
    second = _Tally("disjoint_steps_within_sums_of_products", "lemma:RnD2n.2")
    split = _Tally("ring_sums_split_into_disjoint_products", "lemma:RnD2n.1")
    for rng in context.streams(context.trials):
        family = random_family(int(rng.integers(3, 9)), rng)
        n = int(rng.integers(1, 3))
        first.record(
            check_RnD2n_part1(family, n, limits=context.limits),
            lambda family=family, n=n: {"family": family.to_json(), "n": n},
        )
        split.record(
            check_disjoint_split(family),
            lambda family=family: {"family": family.to_json()},
        )
        family = random_family(int(rng.integers(3, 7)), rng)
        n = int(rng.integers(1, 3))
        second.record(
            check_RnD2n_part2(family, n, limits=context.limits),
            lambda family=family, n=n: {"family": family.to_json(), "n": n},
        )
    return [first.result(), second.result(), split.result()]


@_suite("relations")
def _relations(context: SuiteContext) -> list[StatementResult]:
    tallies: dict[str, _Tally] = {}
    for label, n in RELATION_CASES:
        witness = find_witness(
            context.catalog.group(label), limits=context.limits
        )
        report = verify_relations(witness, n, limits=context.limits)
        for equation in report.equations:
            tally = tallies.setdefault(
                equation.key, _Tally(equation.key, equation.anchor)
            )
            tally.record(
                equation.passed,
                lambda equation=equation, label=label, n=n: {
                    "group": label,
                    "n": n,
                    **equation.to_json(),
                },
                cases=equation.cases,
            )
    return [tally.result() for tally in tallies.values()]


@_suite("balls")
def _balls(context: SuiteContext) -> list[StatementResult]:
    tally = _Tally("ball_power_within_larger_ball", "prop:strongbd")
    for group in context.groups():
        generators = GeneratingSet.of_base(group)
        for n in range(1, BALL_RANGE + 1):
            for m in range(1, BALL_RANGE + 1):
                tally.record(
                    check_ball_power(
                        generators, n, m, limits=context.limits
                    ),
                    lambda group=group, n=n, m=m: {
                        "group": group.label,
                        "n": n,
                        "m": m,
                    },
                )
    return [tally.result()]


def _shift_constants(monomial: Monomial, factor: int) -> Monomial:
    """Constants ``c`` become ``(c, 1)`` in a direct product whose second
    factor has ``factor`` elements."""
    return Monomial(
        monomial.arity,
        tuple(
            Const(letter.element * factor)
            if isinstance(letter, Const)
            else letter
            for letter in monomial.word
        ),
    )


@_suite("central-vanishing")
def _central_vanishing(context: SuiteContext) -> list[StatementResult]:
    tally = _Tally("homogeneous_vanishes_on_center", "lemma:f(a,b).remark")
    catalog = context.catalog
    cases: list[tuple[FiniteGroup, Monomial]] = []
    product = catalog.group("Z4xS3")
    cases.append(
        (
            product,
            commutator_monomial(product, projection(0, 2), projection(1, 2)),
        )
    )
    s3 = catalog.group("S3")
    witness = find_witness(s3, limits=context.limits)
    factor = catalog.group("Z2").order
    cases.append(
        (catalog.group("S3xZ2"), _shift_constants(witness.f, factor))
    )
    groups = [
        group
        for group in context.groups()
        if group.order <= CENTRAL_VANISHING_MAX_ORDER
    ]
    for group, rng in zip(groups, context.streams(len(groups))):
        cases.extend(
            (group, monomial)
            for monomial in random_homogeneous_monomials(
                group, rng, context.trials
            )
        )
    for group, monomial in cases:
        tally.record(
            check_central_vanishing(group, monomial, limits=context.limits),
            lambda group=group, monomial=monomial: {
                "group": group.label,
                "monomial": monomial.to_json(),
            },
        )
    return [tally.result()]


@_suite("witnesses")
def _witnesses(context: SuiteContext) -> list[StatementResult]:
    found = _Tally("witness_exists_when_not_nilpotent", "lemma:f(a,b)")
    refused = _Tally("nilpotent_groups_refuse_witness", "lemma:f(a,b).remark")
    searched = _Tally("no_short_witness_when_nilpotent", "lemma:f(a,b).remark")
    length = context.limits.negative_search_length
    for group in context.groups():
        if not is_nilpotent(group):
            # find_witness re-verifies before returning
            try:
                find_witness(group, limits=context.limits)
            except InternalContradictionError as error:
                found.record(
                    False,
                    lambda group=group, error=error: {
                        "group": group.label,
                        "error": str(error),
                    },
                )
            else:
                found.record(True, lambda: None)
            continue
        try:
            find_witness(group, limits=context.limits)
        except GroupIsNilpotentError:
            refused.record(True, lambda: None)
        else:
            refused.record(False, lambda group=group: group.label)
        searched.record(
            exhaust_no_witness(group, length, limits=context.limits),
            lambda group=group: {"group": group.label, "length": length},
        )
    return [found.result(), refused.result(), searched.result()]


@_suite("length")
def _length(context: SuiteContext) -> list[StatementResult]:
    tally = _Tally("distance_is_length_function", "prop:strongbd")
    generating_sets = [
        GeneratingSet.of_base(group) for group in context.groups()
    ]
    generating_sets.append(
        union_of_factors(
            context.catalog.group("S3"), 2, limits=context.limits
        )
    )
    for generators in generating_sets:
        report = check_length_function(generators, limits=context.limits)
        tally.record(report.passed, report.to_json)
    return [tally.result()]


def run_suite(
    name: str,
    catalog: Catalog,
    *,
    seed: int = 0,
    trials: int = 200,
    limits: LabLimits | None = None,
) -> SuiteResult:
    try:
        function = SUITES[name]
    except KeyError:
        raise UnknownSuiteError(name) from None
    context = SuiteContext(catalog, seed, trials, limits or DEFAULT_LIMITS)
    result = SuiteResult(name, seed, trials, tuple(function(context)))
    logger.info(
        f"suite {name}: {'pass' if result.passed else 'FAIL'} "
        f"({sum(s.cases for s in result.statements)} cases)"
    )
    return result
