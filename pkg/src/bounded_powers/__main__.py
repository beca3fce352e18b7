from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import TYPE_CHECKING

from . import __version__
from .catalog import Catalog
from .cayley import GeneratingSet, cayley_diameter, union_of_factors
from .config import DEFAULT_LIMITS, LabLimits
from .errors import ExitCode, LabError
from .groups import (
    abelianization_primes,
    center,
    conjugate_width,
    derived_subgroup,
    element_order,
    quotient_group,
)
from .log_utility import add_log_arguments, configure_logging, log_exceptions
from .monomials import WitnessClaim, find_witness, search_witnesses
from .parsing import json5_load, parse_positive_int
from .products import (
    PowerGroup,
    exhaustion_table,
    lift_depth,
    support_profile,
    verify_relations,
)
from .reports import RunReport, stopwatch
from .series import central_series, last_term
from .suites import SUITES, run_suite

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .parsing import JsonValue

logger = logging.getLogger(__name__)


def cmd_analyze(
    args: argparse.Namespace, catalog: Catalog, limits: LabLimits
) -> RunReport:
    del limits
    entry = catalog.entry(args.group)
    group = catalog.group(args.group)
    series = central_series(group)
    entry.check_expectations(group)
    central = center(group)
    results = series.to_json()
    results.update(
        {
            "group": group.label,
            "abelian": group.is_abelian,
            "nilpotency_class": series.nilpotency_class,
            "last_term_order": len(series.last_term),
            "hypercenter_order": len(series.hypercenter),
            "derived_subgroup": derived_subgroup(group).to_json(),
            "center": central.to_json(),
            "central_quotient_order": quotient_group(group, central).order,
            "exponent": math.lcm(
                *(element_order(group, g) for g in group.elements)
            ),
            "abelianization_primes": list(abelianization_primes(group)),
            "expected": dict(entry.expectations()),
        }
    )
    return RunReport("analyze", {"group": args.group}, results)


def cmd_witness(
    args: argparse.Namespace, catalog: Catalog, limits: LabLimits
) -> RunReport:
    group = catalog.group(args.group)
    inputs: dict[str, JsonValue] = {"group": args.group}
    if args.verify is not None:
        inputs["verify"] = args.verify
        claim = WitnessClaim.from_json(json5_load(args.verify))
        checks = claim.check(group, limits=limits)
        claimed: dict[str, JsonValue] = {
            "a": claim.a,
            "b": claim.b,
            "monomial": claim.f.to_json(),
            "checks": dict(checks),
        }
        return RunReport(
            "witness", inputs, claimed, passed=all(checks.values())
        )
    if central_series(group).nilpotent:
        length = args.max_length or limits.negative_search_length
        inputs["max_length"] = length
        search = search_witnesses(group, length, limits=limits)
        return RunReport(
            "witness", inputs, search.to_json(), passed=search.no_witness
        )
    witness = find_witness(group, limits=limits)
    results = witness.to_json()
    results.update(
        {
            "nilpotent": False,
            "verified": True,
            "conjugate_width": conjugate_width(group, witness.b),
        }
    )
    return RunReport("witness", inputs, results)


def cmd_diameter(
    args: argparse.Namespace, catalog: Catalog, limits: LabLimits
) -> RunReport:
    group = catalog.group(args.group)
    if args.generators is None:
        generators = union_of_factors(group, args.n, limits=limits)
    else:
        generators = GeneratingSet.from_json(
            PowerGroup.of(group, args.n, limits=limits),
            json5_load(args.generators),
        )
    report = cayley_diameter(generators, limits=limits)
    results = report.to_json()
    results["generating_set"] = generators.to_json()
    return RunReport(
        "diameter",
        {
            "group": args.group,
            "n": args.n,
            "generators": args.generators or "union-of-factors",
            "require_generates": args.require_generates,
        },
        results,
        passed=report.generates or not args.require_generates,
    )


def cmd_suite(
    args: argparse.Namespace, catalog: Catalog, limits: LabLimits
) -> RunReport:
    result = run_suite(
        args.name, catalog, seed=args.seed, trials=args.trials, limits=limits
    )
    return RunReport(
        "suite",
        {"suite": args.name, "trials": args.trials},
        result.to_json(),
        passed=result.passed,
        seed=args.seed,
    )


def cmd_relations(
    args: argparse.Namespace, catalog: Catalog, limits: LabLimits
) -> RunReport:
    witness = find_witness(catalog.group(args.group), limits=limits)
    report = verify_relations(witness, args.n, limits=limits)
    return RunReport(
        "relations",
        {"group": args.group, "n": args.n},
        report.to_json(),
        passed=report.passed,
    )


def cmd_exhaust(
    args: argparse.Namespace, catalog: Catalog, limits: LabLimits
) -> RunReport:
    group = catalog.group(args.group)
    witness = find_witness(group, limits=limits)
    target = last_term(group)
    ns = range(1, args.max_n + 1)
    rows = exhaustion_table(witness, ns, target=target, limits=limits)
    results: dict[str, JsonValue] = {
        "group": group.label,
        "target_order": len(target),
        "lift_depth": lift_depth(witness.f),
        "rows": [row.to_json() for row in rows],
    }
    passed = True
    if args.profile:
        profiles = [support_profile(witness, n, limits=limits) for n in ns]
        results["profiles"] = [profile.to_json() for profile in profiles]
        passed = all(
            profile.lift_within_depth and profile.disjoint_pairs_advance
            for profile in profiles
        )
    return RunReport(
        "exhaust",
        {"group": args.group, "max_n": args.max_n, "profile": args.profile},
        results,
        passed=passed,
    )


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bounded-powers",
        description=(
            "Check the finite-group constructions behind strong "
            "boundedness of infinite powers."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    parser.add_argument(
        "--catalog",
        metavar="PATH",
        help="JSON5 catalog file adding groups to the built-in catalog.",
    )
    parser.add_argument(
        "--config",
        metavar="PATH",
        help="JSON5 file overriding resource limits.",
    )
    parser.add_argument(
        "--json", action="store_true", help="Emit the report as JSON."
    )
    parser.add_argument(
        "--timing",
        action="store_true",
        help="Include elapsed time in JSON reports.",
    )
    add_log_arguments(parser)

    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser(
        "analyze", help="Central series and derived flags of a group."
    )
    analyze.add_argument("group")
    analyze.set_defaults(handler=cmd_analyze)

    witness = commands.add_parser(
        "witness",
        help="Build (a, b, f) or search short words for nilpotent groups.",
    )
    witness.add_argument("group")
    witness.add_argument(
        "--max-length",
        type=parse_positive_int,
        help="Word length bound for nilpotent groups.",
    )
    witness.add_argument(
        "--verify",
        metavar="JSON",
        help=(
            'Check a given witness instead, e.g. {"a": 1, "b": 2, '
            '"monomial": {"arity": 2, "word": [{"var": 1, "exp": 1}]}}.'
        ),
    )
    witness.set_defaults(handler=cmd_witness)

    diameter = commands.add_parser(
        "diameter", help="Cayley diameter of G^n by breadth-first search."
    )
    diameter.add_argument("group")
    diameter.add_argument("--n", type=parse_positive_int, default=1)
    diameter.add_argument(
        "--generators",
        metavar="JSON",
        help=(
            'Generators as JSON, e.g. [{"x": 1, "J": [0]}] or [[1, 0]]; '
            "defaults to the union of the factors."
        ),
    )
    diameter.add_argument(
        "--require-generates",
        action="store_true",
        help="Fail when the generators do not generate G^n.",
    )
    diameter.set_defaults(handler=cmd_diameter)

    suite = commands.add_parser("suite", help="Run a property suite.")
    suite.add_argument("name", choices=sorted(SUITES))
    suite.add_argument("--seed", type=int, default=0)
    suite.add_argument("--trials", type=parse_positive_int, default=200)
    suite.set_defaults(handler=cmd_suite)

    relations = commands.add_parser(
        "relations",
        help="Check the a_J / b_K relations of a group's witness in G^n.",
    )
    relations.add_argument("group")
    relations.add_argument("--n", type=parse_positive_int, default=3)
    relations.set_defaults(handler=cmd_relations)

    exhaust = commands.add_parser(
        "exhaust",
        help="Closure steps from the witness seed, for n = 1..max-n.",
    )
    exhaust.add_argument("group")
    exhaust.add_argument("--max-n", type=parse_positive_int, default=4)
    exhaust.add_argument(
        "--profile",
        action="store_true",
        help="Also report a_J / b_J supports of every closure layer.",
    )
    exhaust.set_defaults(handler=cmd_exhaust)
    return parser


def run(args: argparse.Namespace) -> RunReport:
    limits = DEFAULT_LIMITS
    if args.config:
        limits = LabLimits.load(Path(args.config))
    catalog = Catalog(limits=limits)
    if args.catalog:
        catalog.load(Path(args.catalog))
    with stopwatch() as watch:
        report: RunReport = args.handler(args, catalog, limits)
    return replace(report, elapsed=watch.seconds)


@log_exceptions()
def main(argv: Sequence[str] | None = None) -> int:
    args = create_parser().parse_args(argv)
    configure_logging(args)
    try:
        report = run(args)
    except LabError as error:
        logger.error(str(error))  # noqa: TRY400
        return int(error.exit_code)
    report.emit(sys.stdout, as_json=args.json, timing=args.timing)
    if not report.passed:
        return int(ExitCode.PROPERTY_FAILURE)
    return int(ExitCode.SUCCESS)


if __name__ == "__main__":
    sys.exit(main())
