from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest

from bounded_powers.catalog import Catalog
from bounded_powers.config import LabLimits
from bounded_powers.groups import normal_closure
from bounded_powers.monomials import (
    ArityMismatchError,
    Const,
    GroupIsNilpotentError,
    GroupNotNilpotentError,
    InvalidMonomialError,
    Monomial,
    NotHomogeneousError,
    NotInClosureError,
    SearchSpaceTooLargeError,
    Var,
    check_central_vanishing,
    commutator_monomial,
    conjugate_expression,
    conjugation_monomial,
    evaluate,
    evaluate_columns,
    exhaust_no_witness,
    find_non_nilpotent_generator,
    find_witness,
    invert,
    is_homogeneous,
    projection,
    random_homogeneous_monomials,
    search_witnesses,
)

if TYPE_CHECKING:
    from collections.abc import Callable

    from bounded_powers.groups import FiniteGroup

COMMUTATOR_WORD = Monomial(2, (Var(0, -1), Var(1, -1), Var(0), Var(1)))
NON_NILPOTENT = ["S3", "D5", "A4", "S4", "A5", "SL(2,3)", "S3xZ2"]
NILPOTENT = [f"Z{n}" for n in range(2, 13)] + ["Q8", "D4"]


def test_reduction_drops_identity_and_cancels_inverse_pairs() -> None:
    monomial = Monomial(
        2, (Var(0), Var(0, -1), Const(0), Var(1), Const(3))
    )
    assert monomial.word == (Var(1), Const(3))
    assert len(monomial) == 2
    assert str(monomial) == "x1·c3"
    assert str(Monomial(1)) == "1"


def test_reduction_keeps_constants_between_variables() -> None:
    monomial = Monomial(1, (Var(0), Const(2), Var(0, -1)))
    assert len(monomial) == 3


@pytest.mark.parametrize(
    "build",
    [
        lambda: Var(0, 2),
        lambda: Var(-1),
        lambda: Monomial(-1),
        lambda: Monomial(1, (Var(1),)),
        lambda: Monomial(1, (Const(-2),)),
    ],
)
def test_invalid_monomials(build: Callable[[], object]) -> None:
    with pytest.raises(InvalidMonomialError):
        build()


def test_monomial_json() -> None:
    monomial = Monomial(2, (Const(3), Var(1, -1)))
    data = monomial.to_json()
    assert data == {
        "arity": 2,
        "word": [{"const": 3}, {"var": 1, "exp": -1}],
    }
    assert Monomial.from_json(data) == monomial


def test_multiplication_requires_equal_arity() -> None:
    with pytest.raises(ArityMismatchError):
        _ = projection(0, 1) * projection(0, 2)


def test_evaluate(s3: FiniteGroup) -> None:
    assert evaluate(s3, projection(1, 2), (1, 2)) == 2
    assert evaluate(s3, COMMUTATOR_WORD, (1, 2)) == 5
    assert evaluate(s3, Monomial(0, (Const(2), Const(2))), ()) == 5
    assert evaluate(s3, Monomial(0), ()) == 0


def test_evaluate_checks_arity_and_constants(s3: FiniteGroup) -> None:
    with pytest.raises(ArityMismatchError, match="arity 2 evaluated on 1"):
        evaluate(s3, projection(0, 2), (1,))
    with pytest.raises(InvalidMonomialError, match="c7"):
        evaluate(s3, Monomial(1, (Const(7),)), (0,))


def test_evaluate_columns_matches_evaluate(s4: FiniteGroup) -> None:
    monomial = Monomial(2, (Const(5), Var(0), Var(1, -1), Const(9), Var(0)))
    xs, ys = (grid.ravel() for grid in np.indices((24, 24)))
    values = evaluate_columns(s4, monomial, [xs, ys])
    for x, y, value in zip(xs.tolist(), ys.tolist(), values.tolist()):
        assert evaluate(s4, monomial, (x, y)) == value


def test_commutator_monomial_and_invert(s3: FiniteGroup) -> None:
    built = commutator_monomial(s3, projection(0, 2), projection(1, 2))
    assert built == COMMUTATOR_WORD
    conjugation = conjugation_monomial(s3, 1, -1)
    inverse = invert(s3, conjugation)
    for g in s3.elements:
        value = evaluate(s3, conjugation, (g,))
        assert evaluate(s3, inverse, (g,)) == s3.inv(value)


def test_homogeneity(s3: FiniteGroup) -> None:
    assert is_homogeneous(s3, conjugation_monomial(s3, 2))
    assert is_homogeneous(s3, COMMUTATOR_WORD)
    assert is_homogeneous(s3, Monomial(0, (Const(1),)))
    assert not is_homogeneous(s3, projection(0, 2))
    assert not is_homogeneous(s3, Monomial(1, (Const(1),)))


def test_conjugate_expression(s3: FiniteGroup) -> None:
    assert conjugate_expression(s3, 1, 0) == Monomial(1)
    for target in s3.elements:
        expression = conjugate_expression(s3, 1, target)
        assert expression.arity == 1
        assert evaluate(s3, expression, (1,)) == target
    # g itself is the first factor tried
    assert conjugate_expression(s3, 1, 1) == projection(0, 1)


def test_conjugate_expression_outside_closure(s3: FiniteGroup) -> None:
    with pytest.raises(NotInClosureError, match="not in the normal closure"):
        conjugate_expression(s3, 2, 1)


def test_find_non_nilpotent_generator(
    s3: FiniteGroup, q8: FiniteGroup
) -> None:
    assert find_non_nilpotent_generator(s3) == 1
    with pytest.raises(GroupIsNilpotentError):
        find_non_nilpotent_generator(q8)


@pytest.mark.parametrize("label", NON_NILPOTENT)
def test_find_witness(catalog: Catalog, label: str) -> None:
    group = catalog.group(label)
    witness = find_witness(group)
    assert witness.b != 0
    assert evaluate(group, witness.f, (witness.a, witness.b)) == witness.b
    assert is_homogeneous(group, witness.f)
    trace = witness.trace
    assert trace.m < trace.m_prime == len(trace.b) - 1
    assert trace.b[trace.m] == trace.b[trace.m_prime] == witness.b
    assert witness.b in trace.closure
    assert witness.b not in trace.closure_hypercenter


def test_find_witness_is_deterministic(catalog: Catalog) -> None:
    group = catalog.group("A4")
    assert find_witness(group).to_json() == find_witness(group).to_json()


def test_witness_json(s3: FiniteGroup) -> None:
    data = find_witness(s3).to_json()
    assert data["group"] == "S3"
    assert data["a"] == 1
    assert data["word_length"] == len(find_witness(s3).f)
    trace = data["trace"]
    assert isinstance(trace, dict)
    assert trace["closure_order"] == 6


@pytest.mark.parametrize("label", NILPOTENT)
def test_nilpotent_groups_have_no_witness(
    catalog: Catalog, label: str
) -> None:
    with pytest.raises(GroupIsNilpotentError, match="is nilpotent"):
        find_witness(catalog.group(label))


def test_central_vanishing(catalog: Catalog) -> None:
    for label in ("Z4xS3", "D4", "S3xZ2"):
        group = catalog.group(label)
        assert check_central_vanishing(group, COMMUTATOR_WORD)


def test_central_vanishing_needs_homogeneous_arity_two(
    s3: FiniteGroup,
) -> None:
    with pytest.raises(InvalidMonomialError, match="arity >= 2"):
        check_central_vanishing(s3, conjugation_monomial(s3, 1))
    with pytest.raises(NotHomogeneousError):
        check_central_vanishing(s3, projection(0, 2))


@pytest.mark.parametrize("label", ["Z2", "Q8", "D4"])
def test_exhaust_no_witness(catalog: Catalog, label: str) -> None:
    assert exhaust_no_witness(catalog.group(label), 4)


def test_search_report(q8: FiniteGroup) -> None:
    report = search_witnesses(q8, 2)
    assert report.no_witness
    assert report.words_checked > report.homogeneous_words > 0
    data = report.to_json()
    assert data["no_witness_up_to_length"] == 2
    assert data["counterexample"] is None


def test_search_refuses_non_nilpotent_groups(s3: FiniteGroup) -> None:
    with pytest.raises(GroupNotNilpotentError):
        search_witnesses(s3, 2)


def test_search_space_cap(catalog: Catalog) -> None:
    with pytest.raises(SearchSpaceTooLargeError) as info:
        search_witnesses(
            catalog.group("Z2"), 4, limits=LabLimits(search_word_cap=10)
        )
    assert info.value.size == 5**4


def test_random_homogeneous_monomials(s4: FiniteGroup) -> None:
    rng = np.random.default_rng(7)
    monomials = random_homogeneous_monomials(s4, rng, 12)
    assert len(monomials) == 12
    for monomial in monomials:
        assert monomial.arity == 2
        assert is_homogeneous(s4, monomial)
        assert check_central_vanishing(s4, monomial)


# --- evaluation and conjugate expressions over the catalog ----------------

_CATALOG = Catalog()
SMALL_GROUPS = [
    label for label in _CATALOG.labels() if _CATALOG.group(label).order <= 24
]


def random_word(
    group: FiniteGroup, rng: np.random.Generator, arity: int
) -> Monomial:
    letters: list[Const | Var] = []
    for _ in range(int(rng.integers(0, 8))):
        if rng.random() < 0.3:  # noqa: PLR2004
            letters.append(Const(int(rng.integers(group.order))))
        else:
            position = int(rng.integers(arity))
            letters.append(Var(position, int(rng.choice([1, -1]))))
    return Monomial(arity, tuple(letters))


@pytest.mark.parametrize("label", ["S3", "Q8", "S4", "A5", "SL(2,3)"])
def test_evaluation_of_product_is_product_of_evaluations(
    catalog: Catalog, label: str
) -> None:
    group = catalog.group(label)
    rng = np.random.default_rng(len(label) * 31 + group.order)
    for _ in range(100):
        left = random_word(group, rng, 2)
        right = random_word(group, rng, 2)
        args = tuple(int(x) for x in rng.integers(group.order, size=2))
        assert evaluate(group, left * right, args) == group.mul(
            evaluate(group, left, args), evaluate(group, right, args)
        )


@pytest.mark.parametrize("label", SMALL_GROUPS)
def test_conjugate_expressions_reach_the_normal_closure(
    catalog: Catalog, label: str
) -> None:
    group = catalog.group(label)
    for g in group.elements:
        for target in normal_closure(group, [g]):
            expression = conjugate_expression(group, g, target)
            assert expression.arity == 1
            assert is_homogeneous(group, expression)
            assert evaluate(group, expression, (g,)) == target
