"""Monomials ``G^k -> G`` and the witness construction for non-nilpotent
finite groups.

A monomial is a word whose letters are constants ``Const(c)`` and signed
argument variables ``Var(i, ±1)``; it evaluates left to right.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, TypeAlias

import numpy as np

from .config import DEFAULT_LIMITS, LabLimits
from .errors import InputError, PropertyViolationError, ResourceCapError
from .groups import (
    ElementSet,
    UnknownElementError,
    center,
    commutator,
    normal_closure,
)
from .log_utility import ProgressLog
from .series import central_series, relative_central_series
from .validation import require_field, verify_type

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Sequence

    from .groups import FiniteGroup, IntArray
    from .parsing import JsonValue

logger = logging.getLogger(__name__)

PROGRESS_WORDS = 1 << 16


class InvalidMonomialError(InputError):
    def __init__(self, detail: str) -> None:
        super().__init__(f"invalid monomial: {detail}")
        self.detail = detail


class ArityMismatchError(InputError):
    def __init__(self, *, arity: int, given: int) -> None:
        super().__init__(
            f"monomial of arity {arity} evaluated on {given} arguments"
        )
        self.arity = arity
        self.given = given


class NotInClosureError(InputError):
    def __init__(self, *, label: str, g: int, target: int) -> None:
        super().__init__(
            f"{label or 'group'}: element {target} is not in the normal "
            f"closure of {g}"
        )
        self.g = g
        self.target = target


class GroupIsNilpotentError(InputError):
    def __init__(self, label: str) -> None:
        super().__init__(f"{label or 'group'} is nilpotent")
        self.label = label


class GroupNotNilpotentError(InputError):
    def __init__(self, label: str) -> None:
        super().__init__(f"{label or 'group'} is not nilpotent")
        self.label = label


class NotHomogeneousError(InputError):
    def __init__(self, monomial: Monomial) -> None:
        super().__init__(f"monomial is not homogeneous: {monomial}")
        self.monomial = monomial


class InternalContradictionError(PropertyViolationError):
    """A constructed object failed its own re-check; this is a bug."""

    def __init__(self, detail: str) -> None:
        super().__init__(f"internal contradiction: {detail}")
        self.detail = detail


class SearchSpaceTooLargeError(ResourceCapError):
    def __init__(self, *, size: int, cap: int) -> None:
        super().__init__("monomial search space", size=size, cap=cap)


@dataclass(frozen=True)
class Const:
    element: int

    def __str__(self) -> str:
        return f"c{self.element}"


@dataclass(frozen=True)
class Var:
    position: int
    exponent: int = 1

    def __post_init__(self) -> None:
        if self.exponent not in (1, -1):
            message = f"exponent {self.exponent} not ±1"
            raise InvalidMonomialError(message)
        if self.position < 0:
            message = f"negative position {self.position}"
            raise InvalidMonomialError(message)

    def inverse(self) -> Var:
        return Var(self.position, -self.exponent)

    def __str__(self) -> str:
        name = f"x{self.position}"
        return name if self.exponent == 1 else f"{name}^-1"


Letter: TypeAlias = Const | Var


def _reduce(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for letter in letters:
        if letter == Const(0):
            continue
        if (
            isinstance(letter, Var)
            and stack
            and stack[-1] == letter.inverse()
        ):
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


@dataclass(frozen=True)
class Monomial:
    """A reduced word of arity ``arity``.

    Construction drops ``Const(0)`` letters and cancels adjacent
    ``Var(i, e) Var(i, -e)`` pairs; nothing else is simplified.
    """

    arity: int
    word: tuple[Letter, ...] = ()

    def __post_init__(self) -> None:
        if self.arity < 0:
            message = f"negative arity {self.arity}"
            raise InvalidMonomialError(message)
        for letter in self.word:
            if isinstance(letter, Var) and letter.position >= self.arity:
                raise InvalidMonomialError(
                    f"{letter} out of range for arity {self.arity}"
                )
            if isinstance(letter, Const) and letter.element < 0:
                message = f"negative constant {letter}"
                raise InvalidMonomialError(message)
        object.__setattr__(self, "word", _reduce(self.word))

    def __len__(self) -> int:
        return len(self.word)

    def __mul__(self, other: Monomial) -> Monomial:
        if other.arity != self.arity:
            raise ArityMismatchError(arity=self.arity, given=other.arity)
        return Monomial(self.arity, self.word + other.word)

    def __str__(self) -> str:
        return "·".join(map(str, self.word)) or "1"

    def with_arity(self, arity: int) -> Monomial:
        return Monomial(arity, self.word)

    def to_json(self) -> dict[str, JsonValue]:
        return {
            "arity": self.arity,
            "word": [
                (
                    {"const": letter.element}
                    if isinstance(letter, Const)
                    else {"var": letter.position, "exp": letter.exponent}
                )
                for letter in self.word
            ],
        }

    @classmethod
    def from_json(cls, value: JsonValue) -> Monomial:
        source = verify_type(dict, value, where="monomial")
        arity = require_field(source, "arity", int, where="monomial")
        letters: list[Letter] = []
        for index, raw in enumerate(
            require_field(source, "word", list, where="monomial")
        ):
            where = f"monomial.word[{index}]"
            entry = verify_type(dict, raw, where=where)
            if "const" in entry:
                letters.append(
                    Const(require_field(entry, "const", int, where=where))
                )
            else:
                letters.append(
                    Var(
                        require_field(entry, "var", int, where=where),
                        require_field(entry, "exp", int, where=where),
                    )
                )
        return cls(arity, tuple(letters))


def projection(position: int, arity: int) -> Monomial:
    return Monomial(arity, (Var(position),))


def invert(group: FiniteGroup, monomial: Monomial) -> Monomial:
    return Monomial(
        monomial.arity,
        tuple(
            (
                Const(group.inv(letter.element))
                if isinstance(letter, Const)
                else letter.inverse()
            )
            for letter in reversed(monomial.word)
        ),
    )


def commutator_monomial(
    group: FiniteGroup, left: Monomial, right: Monomial
) -> Monomial:
    """``[u, v] = u⁻¹v⁻¹uv``, matching ``groups.commutator``."""
    return invert(group, left) * invert(group, right) * left * right


def conjugation_monomial(
    group: FiniteGroup, by: int, exponent: int = 1, arity: int = 1
) -> Monomial:
    """``x ↦ by · x^exponent · by⁻¹`` in the first argument."""
    return Monomial(
        arity, (Const(by), Var(0, exponent), Const(group.inv(by)))
    )


def _check_constants(group: FiniteGroup, monomial: Monomial) -> None:
    for letter in monomial.word:
        if isinstance(letter, Const) and letter.element >= group.order:
            raise InvalidMonomialError(
                f"{letter} is not an element of {group.label or 'group'}"
            )


def evaluate(
    group: FiniteGroup, monomial: Monomial, args: Sequence[int]
) -> int:
    if len(args) != monomial.arity:
        raise ArityMismatchError(arity=monomial.arity, given=len(args))
    _check_constants(group, monomial)
    rows = group.rows
    inverses = group.inverses
    value = 0
    for letter in monomial.word:
        if isinstance(letter, Const):
            value = rows[value][letter.element]
        elif letter.exponent == 1:
            value = rows[value][args[letter.position]]
        else:
            value = rows[value][inverses[args[letter.position]]]
    return value


def evaluate_columns(
    group: FiniteGroup, monomial: Monomial, columns: Sequence[IntArray]
) -> IntArray:
    """Evaluate on many argument tuples at once.

    ``columns[i]`` holds argument ``i`` of every tuple; all columns share
    one length.
    """
    if len(columns) != monomial.arity:
        raise ArityMismatchError(arity=monomial.arity, given=len(columns))
    _check_constants(group, monomial)
    size = len(columns[0]) if columns else 1
    table = group.table
    inverted = [group.inverse_array[column] for column in columns]
    values = np.zeros(size, dtype=np.intp)
    for letter in monomial.word:
        if isinstance(letter, Const):
            values = table[values, letter.element]
        elif letter.exponent == 1:
            values = table[values, columns[letter.position]]
        else:
            values = table[values, inverted[letter.position]]
    return values


def _all_tuples(order: int, arity: int) -> list[IntArray]:
    grids = np.indices((order,) * arity).reshape(arity, -1)
    return [np.ascontiguousarray(grid, dtype=np.intp) for grid in grids]


def _tuples_touching(
    order: int,
    arity: int,
    marked: ElementSet,
    *,
    limits: LabLimits,
) -> list[IntArray]:
    """Every argument tuple with at least one coordinate in ``marked``."""
    if order**arity > limits.closure_cap:
        raise SearchSpaceTooLargeError(
            size=order**arity, cap=limits.closure_cap
        )
    columns = _all_tuples(order, arity)
    flags = marked.mask()
    keep = np.zeros(len(columns[0]), dtype=np.bool_)
    for column in columns:
        keep |= flags[column]
    return [column[keep] for column in columns]


def is_homogeneous(
    group: FiniteGroup, monomial: Monomial, *, limits: LabLimits | None = None
) -> bool:
    """True iff the value is 1 whenever some argument is 1."""
    if monomial.arity == 0:
        return True  # no argument can be 1
    columns = _tuples_touching(
        group.order,
        monomial.arity,
        group.trivial,
        limits=limits or DEFAULT_LIMITS,
    )
    return not evaluate_columns(group, monomial, columns).any()


def check_central_vanishing(
    group: FiniteGroup, monomial: Monomial, *, limits: LabLimits | None = None
) -> bool:
    """True iff the value is 1 whenever some argument is central."""
    limits = limits or DEFAULT_LIMITS
    if monomial.arity < 2:  # noqa: PLR2004
        raise InvalidMonomialError("central vanishing needs arity >= 2")
    if not is_homogeneous(group, monomial, limits=limits):
        raise NotHomogeneousError(monomial)
    columns = _tuples_touching(
        group.order, monomial.arity, center(group), limits=limits
    )
    return not evaluate_columns(group, monomial, columns).any()


def conjugate_expression(group: FiniteGroup, g: int, target: int) -> Monomial:
    """An arity-1 product of factors ``c x^±1 c⁻¹`` sending ``g`` to
    ``target``, with the fewest factors.

    Factors are tried with exponent +1 before -1 and conjugators in index
    order; of several factors with the same value only the first is used.
    """
    rows = group.rows
    factors: dict[int, tuple[int, int]] = {}
    for exponent in (1, -1):
        power = g if exponent == 1 else group.inv(g)
        for by in group.elements:
            factors.setdefault(group.conjugate(power, by), (by, exponent))
    parent: dict[int, tuple[int, int] | None] = {0: None}
    queue = deque([0])
    while queue and target not in parent:
        current = queue.popleft()
        for value in factors:
            product = rows[current][value]
            if product not in parent:
                parent[product] = (current, value)
                queue.append(product)
    if target not in parent:
        raise NotInClosureError(label=group.label, g=g, target=target)
    chain: list[int] = []
    node = target
    while (step := parent[node]) is not None:
        node, value = step
        chain.append(value)
    expression = Monomial(1)
    for value in reversed(chain):
        by, exponent = factors[value]
        expression *= conjugation_monomial(group, by, exponent)
    return expression


def find_non_nilpotent_generator(group: FiniteGroup) -> int:
    """Smallest ``a`` whose normal closure is not nilpotent."""
    if central_series(group).nilpotent:
        raise GroupIsNilpotentError(group.label)
    for a in group.elements:
        closure = normal_closure(group, [a])
        if not relative_central_series(group, closure).nilpotent:
            return a
    raise InternalContradictionError(
        f"{group.label}: not nilpotent, yet every normal closure of an "
        "element is nilpotent"
    )


@dataclass(frozen=True)
class WitnessTrace:
    """The sequences behind a witness; ``b[m] == b[m_prime]``."""

    a: tuple[int, ...]
    b: tuple[int, ...]
    m: int
    m_prime: int
    closure: ElementSet = field(repr=False)
    closure_hypercenter: ElementSet = field(repr=False)

    def to_json(self) -> dict[str, JsonValue]:
        return {
            "a_sequence": list(self.a),
            "b_sequence": list(self.b),
            "m": self.m,
            "m_prime": self.m_prime,
            "closure_order": len(self.closure),
            "closure_hypercenter": self.closure_hypercenter.to_json(),
        }


@dataclass(frozen=True)
class Witness:
    """``(a, b, f)`` with ``b ≠ 1``, ``f`` homogeneous and ``f(a, b) = b``."""

    group: FiniteGroup
    a: int
    b: int
    f: Monomial
    trace: WitnessTrace

    def to_json(self) -> dict[str, JsonValue]:
        return {
            "group": self.group.label,
            "a": self.a,
            "b": self.b,
            "a_name": self.group.name(self.a),
            "b_name": self.group.name(self.b),
            "word_length": len(self.f),
            "monomial": self.f.to_json(),
            "trace": self.trace.to_json(),
        }


def verify_witness(
    witness: Witness, *, limits: LabLimits | None = None
) -> None:
    group = witness.group
    if witness.b == 0:
        message = f"{group.label}: witness b is the identity"
        raise InternalContradictionError(message)
    if (value := evaluate(group, witness.f, (witness.a, witness.b))) != (
        witness.b
    ):
        message = f"{group.label}: f(a, b) = {value}, expected {witness.b}"
        raise InternalContradictionError(message)
    if not is_homogeneous(group, witness.f, limits=limits):
        message = f"{group.label}: witness monomial is not homogeneous"
        raise InternalContradictionError(message)


@dataclass(frozen=True)
class WitnessClaim:
    """A hand-supplied ``(a, b, f)``, e.g. the ``results`` of an earlier
    ``witness`` report."""

    a: int
    b: int
    f: Monomial

    @classmethod
    def from_json(cls, value: JsonValue) -> WitnessClaim:
        source = verify_type(dict, value, where="witness")
        return cls(
            require_field(source, "a", int, where="witness"),
            require_field(source, "b", int, where="witness"),
            Monomial.from_json(
                require_field(source, "monomial", dict, where="witness")
            ),
        )

    def check(
        self, group: FiniteGroup, *, limits: LabLimits | None = None
    ) -> dict[str, bool]:
        for element in (self.a, self.b):
            if not 0 <= element < group.order:
                raise UnknownElementError(str(element), label=group.label)
        return {
            "b_nontrivial": self.b != 0,
            "returns_b": evaluate(group, self.f, (self.a, self.b)) == self.b,
            "homogeneous": is_homogeneous(group, self.f, limits=limits),
        }


def _first_escaping(
    group: FiniteGroup, closure: ElementSet, upper: ElementSet, b: int
) -> int:
    for candidate in closure:
        if commutator(group, candidate, b) not in upper:
            return candidate
    raise InternalContradictionError(
        f"{group.label}: {b} lies outside the hypercenter of its closure "
        "but commutes into it with every element"
    )


def find_witness(
    group: FiniteGroup, *, limits: LabLimits | None = None
) -> Witness:
    """Build ``(a, b, f)`` following the nested commutator construction.

    Every choice is the smallest admissible element index, so the trace is
    reproducible.
    """
    a = find_non_nilpotent_generator(group)
    closure = normal_closure(group, [a])
    upper = relative_central_series(group, closure).hypercenter
    b_values = [closure.difference(upper).smallest()]
    a_values: list[int] = []
    first_seen = {b_values[0]: 0}
    for _ in range(len(closure) + 1):
        a_values.append(
            _first_escaping(group, closure, upper, b_values[-1])
        )
        following = commutator(group, a_values[-1], b_values[-1])
        if following in first_seen:
            m, m_prime = first_seen[following], len(b_values)
            b_values.append(following)
            break
        first_seen[following] = len(b_values)
        b_values.append(following)
    else:
        message = f"{group.label}: b sequence did not repeat"
        raise InternalContradictionError(message)
    logger.debug(
        f"{group.label}: a={a}, closure order {len(closure)}, "
        f"b sequence {b_values}, repeat at {m} < {m_prime}"
    )

    monomial = projection(1, 2)
    for index in range(m, m_prime):
        factor = conjugate_expression(group, a, a_values[index])
        monomial = commutator_monomial(group, factor.with_arity(2), monomial)
    witness = Witness(
        group=group,
        a=a,
        b=b_values[m],
        f=monomial,
        trace=WitnessTrace(
            a=tuple(a_values),
            b=tuple(b_values),
            m=m,
            m_prime=m_prime,
            closure=closure,
            closure_hypercenter=upper,
        ),
    )
    verify_witness(witness, limits=limits)
    logger.info(
        f"{group.label}: witness a={a}, b={witness.b}, "
        f"word length {len(monomial)}"
    )
    return witness


@dataclass(frozen=True)
class NegativeSearchReport:
    """Outcome of searching short arity-2 words for a witness."""

    label: str
    max_length: int
    words_checked: int
    homogeneous_words: int
    counterexample: tuple[Monomial, int, int] | None = None

    @property
    def no_witness(self) -> bool:
        return self.counterexample is None

    def to_json(self) -> dict[str, JsonValue]:
        counterexample: JsonValue = None
        if self.counterexample is not None:
            monomial, a, b = self.counterexample
            counterexample = {"monomial": monomial.to_json(), "a": a, "b": b}
        return {
            "group": self.label,
            "nilpotent": True,
            "no_witness_up_to_length": self.max_length,
            "no_witness": self.no_witness,
            "words_checked": self.words_checked,
            "homogeneous_words": self.homogeneous_words,
            "counterexample": counterexample,
        }


def _alphabet(group: FiniteGroup) -> list[Letter]:
    return [
        *(Const(c) for c in range(1, group.order)),
        *(
            Var(position, exponent)
            for position in (0, 1)
            for exponent in (1, -1)
        ),
    ]


def _normal_form_words(
    alphabet: Sequence[Letter], max_length: int
) -> Iterator[tuple[Letter, ...]]:
    """Words with no adjacent ``Var`` cancellation, in depth-first preorder.

    The prefix of each yielded word is the latest word yielded at that
    shorter length, which lets callers extend prefix values in place.
    """
    stack: list[tuple[Letter, ...]] = [()]
    while stack:
        word = stack.pop()
        yield word
        if len(word) == max_length:
            continue
        last = word[-1] if word else None
        for letter in reversed(alphabet):
            if (
                isinstance(letter, Var)
                and isinstance(last, Var)
                and last == letter.inverse()
            ):
                continue
            stack.append((*word, letter))


def search_witnesses(
    group: FiniteGroup,
    max_length: int,
    *,
    limits: LabLimits | None = None,
) -> NegativeSearchReport:
    """Look for ``f(a, b) = b`` with ``b ≠ 1`` among homogeneous arity-2
    words of length at most ``max_length``."""
    limits = limits or DEFAULT_LIMITS
    if not central_series(group).nilpotent:
        raise GroupNotNilpotentError(group.label)
    alphabet = _alphabet(group)
    bound = len(alphabet) ** max_length
    if bound > limits.search_word_cap:
        raise SearchSpaceTooLargeError(size=bound, cap=limits.search_word_cap)

    xs, ys = _all_tuples(group.order, 2)
    inverse = group.inverse_array
    table = group.table
    arguments = (xs, ys)
    inverted = (inverse[xs], inverse[ys])
    letter_values: dict[Letter, IntArray] = {}
    for letter in alphabet:
        if isinstance(letter, Const):
            letter_values[letter] = np.full(len(xs), letter.element)
        elif letter.exponent == 1:
            letter_values[letter] = arguments[letter.position]
        else:
            letter_values[letter] = inverted[letter.position]
    slab = (xs == 0) | (ys == 0)
    nontrivial_b = ys != 0
    # values[depth] holds the evaluation of the current word's prefix
    values: list[IntArray] = [np.zeros(len(xs), dtype=np.intp)]
    words = homogeneous = 0
    progress = ProgressLog(logger, f"{group.label} word search")
    for word in _normal_form_words(alphabet, max_length):
        depth = len(word)
        if depth:
            del values[depth:]
            values.append(table[values[depth - 1], letter_values[word[-1]]])
        words += 1
        if not words % PROGRESS_WORDS:
            progress.update(f"{words} words, {homogeneous} homogeneous")
        current = values[depth]
        if current[slab].any():
            continue
        homogeneous += 1
        if hits := np.flatnonzero((current == ys) & nontrivial_b).tolist():
            hit = hits[0]
            logger.warning(f"{group.label}: witness found for {word}")
            return NegativeSearchReport(
                label=group.label,
                max_length=max_length,
                words_checked=words,
                homogeneous_words=homogeneous,
                counterexample=(
                    Monomial(2, word),
                    int(xs[hit]),
                    int(ys[hit]),
                ),
            )
    logger.info(
        f"{group.label}: {words} words up to length {max_length}, "
        f"{homogeneous} homogeneous, no witness"
    )
    return NegativeSearchReport(
        label=group.label,
        max_length=max_length,
        words_checked=words,
        homogeneous_words=homogeneous,
    )


def exhaust_no_witness(
    group: FiniteGroup, max_length: int, *, limits: LabLimits | None = None
) -> bool:
    return search_witnesses(group, max_length, limits=limits).no_witness


def random_homogeneous_monomials(
    group: FiniteGroup,
    rng: np.random.Generator,
    count: int,
    *,
    max_length: int = 6,
) -> list[Monomial]:
    """Arity-2 homogeneous monomials: nested commutators of random
    products of conjugates, plus random words that happen to qualify."""
    found: list[Monomial] = []
    letters = _alphabet(group)
    attempts = 0
    while len(found) < count and attempts < count * 50:
        attempts += 1
        if attempts % 2:
            left, right = (
                _random_conjugate_product(group, rng, position)
                for position in (0, 1)
            )
            candidate = commutator_monomial(group, left, right)
        else:
            length = int(rng.integers(1, max_length + 1))
            picks = rng.integers(0, len(letters), size=length).tolist()
            candidate = Monomial(2, tuple(letters[pick] for pick in picks))
            if not candidate.word or not is_homogeneous(group, candidate):
                continue
        found.append(candidate)
    return found


def _random_conjugate_product(
    group: FiniteGroup, rng: np.random.Generator, position: int
) -> Monomial:
    result = Monomial(2)
    for _ in range(int(rng.integers(1, 3))):
        by = int(rng.integers(0, group.order))
        exponent = int(rng.choice([1, -1]))
        result *= Monomial(
            2, (Const(by), Var(position, exponent), Const(group.inv(by)))
        )
    return result

