from __future__ import annotations

import json
import logging
from typing import TYPE_CHECKING, Any

import pytest

from bounded_powers import __version__
from bounded_powers.__main__ import main

if TYPE_CHECKING:
    from collections.abc import Iterator
    from pathlib import Path


@pytest.fixture(autouse=True)
def restore_root_logger() -> Iterator[None]:
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers = handlers
    root.setLevel(level)


def run_json(
    capsys: pytest.CaptureFixture[str], *argv: str
) -> tuple[int, dict[str, Any]]:
    code = main(["-q", "--json", *argv])
    out = capsys.readouterr().out
    return code, json.loads(out) if out else {}


def test_analyze(capsys: pytest.CaptureFixture[str]) -> None:
    code, report = run_json(capsys, "analyze", "S3")
    assert code == 0
    assert report["command"] == "analyze"
    assert report["passed"] is True
    assert report["version"] == __version__
    results = report["results"]
    assert results["last_term"] == [0, 2, 5]
    assert results["nilpotent"] is False
    assert results["abelianization_primes"] == [2]
    assert results["expected"] == {"perfect": False, "nilpotent": False}
    assert results["central_quotient_order"] == 6
    assert results["exponent"] == 6


def test_analyze_central_quotient(
    capsys: pytest.CaptureFixture[str],
) -> None:
    _, report = run_json(capsys, "analyze", "Q8")
    assert report["results"]["central_quotient_order"] == 4
    assert report["results"]["exponent"] == 4


def test_analyze_perfect_group(capsys: pytest.CaptureFixture[str]) -> None:
    code, report = run_json(capsys, "analyze", "A5")
    assert code == 0
    assert report["results"]["perfect"] is True
    assert report["results"]["last_term_order"] == 60


def test_analyze_text(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["-q", "analyze", "Q8"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "analyze (pass)"
    assert "  nilpotent: yes" in out


def test_witness(capsys: pytest.CaptureFixture[str]) -> None:
    code, report = run_json(capsys, "witness", "S3")
    assert code == 0
    results = report["results"]
    assert results["verified"] is True
    assert results["nilpotent"] is False
    assert results["b"] != 0


def test_witness_reports_conjugate_width(
    capsys: pytest.CaptureFixture[str],
) -> None:
    _, report = run_json(capsys, "witness", "S3")
    # b is a 3-cycle, which generates its normal closure A3
    assert report["results"]["conjugate_width"] == 1


def test_witness_verify_accepts_a_reported_witness(
    capsys: pytest.CaptureFixture[str],
) -> None:
    _, report = run_json(capsys, "witness", "S3")
    claim = json.dumps(report["results"])
    code, checked = run_json(capsys, "witness", "S3", "--verify", claim)
    assert code == 0
    assert checked["results"]["checks"] == {
        "b_nontrivial": True,
        "returns_b": True,
        "homogeneous": True,
    }
    assert checked["results"]["monomial"] == report["results"]["monomial"]


def test_witness_verify_rejects_a_projection(
    capsys: pytest.CaptureFixture[str],
) -> None:
    claim = json.dumps(
        {
            "a": 1,
            "b": 2,
            "monomial": {"arity": 2, "word": [{"var": 1, "exp": 1}]},
        }
    )
    code, report = run_json(capsys, "witness", "S3", "--verify", claim)
    assert code == 1
    assert report["passed"] is False
    assert report["results"]["checks"] == {
        "b_nontrivial": True,
        "returns_b": True,
        "homogeneous": False,
    }


@pytest.mark.parametrize(
    "claim",
    [
        '{"a": 1, "b": 6, "monomial": {"arity": 2, "word": []}}',
        '{"a": 1, "monomial": {"arity": 2, "word": []}}',
        '{"a": 1, "b": 2, "monomial": {"arity": 1, "word": []}}',
        '{"a": 1, "b": 2, "monomial": {"arity": 2, "word": [{"const": 9}]}}',
    ],
)
def test_witness_verify_input_errors(
    capsys: pytest.CaptureFixture[str], claim: str
) -> None:
    code, report = run_json(capsys, "witness", "S3", "--verify", claim)
    assert code == 2
    assert report == {}


def test_witness_for_nilpotent_group(
    capsys: pytest.CaptureFixture[str],
) -> None:
    code, report = run_json(capsys, "witness", "Q8")
    assert code == 0
    assert report["inputs"]["max_length"] == 4
    assert report["results"]["no_witness_up_to_length"] == 4
    assert report["results"]["no_witness"] is True

    code, report = run_json(capsys, "witness", "D4", "--max-length", "2")
    assert code == 0
    assert report["results"]["no_witness_up_to_length"] == 2


def test_diameter(capsys: pytest.CaptureFixture[str]) -> None:
    code, report = run_json(capsys, "diameter", "S3", "--n", "3")
    assert code == 0
    assert report["results"]["diameter"] == 3
    assert report["results"]["generates"] is True
    assert report["inputs"]["generators"] == "union-of-factors"


def test_diameter_of_non_generating_set(
    capsys: pytest.CaptureFixture[str],
) -> None:
    generators = ("--generators", "[[2]]")
    code, report = run_json(capsys, "diameter", "S3", *generators)
    assert code == 0
    assert report["results"]["generates"] is False
    assert report["results"]["diameter"] == 1

    code, report = run_json(
        capsys, "diameter", "S3", *generators, "--require-generates"
    )
    assert code == 1
    assert report["passed"] is False


def test_suite(capsys: pytest.CaptureFixture[str]) -> None:
    code, report = run_json(
        capsys, "suite", "rnd2n", "--trials", "5", "--seed", "11"
    )
    assert code == 0
    assert report["seed"] == 11
    assert report["results"]["suite"] == "rnd2n"


def test_unknown_suite_is_a_usage_error() -> None:
    with pytest.raises(SystemExit) as info:
        main(["-q", "suite", "nope"])
    assert info.value.code == 2


def test_version(capsys: pytest.CaptureFixture[str]) -> None:
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_relations(capsys: pytest.CaptureFixture[str]) -> None:
    code, report = run_json(capsys, "relations", "S3", "--n", "3")
    assert code == 0
    equations = report["results"]["equations"]
    assert len(equations) == 4
    assert all(equation["passed"] for equation in equations)


def test_relations_need_a_non_nilpotent_group(
    capsys: pytest.CaptureFixture[str],
) -> None:
    code, report = run_json(capsys, "relations", "Q8")
    assert code == 2
    assert report == {}


def test_exhaust(capsys: pytest.CaptureFixture[str]) -> None:
    code, report = run_json(
        capsys, "exhaust", "S3", "--max-n", "2", "--profile"
    )
    assert code == 0
    results = report["results"]
    assert results["target_order"] == 3
    assert [row["n"] for row in results["rows"]] == [1, 2]
    assert all(row["reachable"] for row in results["rows"])
    assert len(results["profiles"]) == 2


@pytest.mark.parametrize("label", ["D5", "A4"])
def test_exhaust_defaults(
    capsys: pytest.CaptureFixture[str], label: str
) -> None:
    code, report = run_json(capsys, "exhaust", label)
    assert code == 0
    rows = report["results"]["rows"]
    assert [row["n"] for row in rows] == [1, 2, 3, 4]
    assert all(row["reachable"] for row in rows)


def test_unknown_group(capsys: pytest.CaptureFixture[str]) -> None:
    code, report = run_json(capsys, "analyze", "G7")
    assert code == 2
    assert report == {}


def test_catalog_option(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    path = tmp_path / "catalog.json5"
    path.write_text(
        '{"groups": [{"label": "C3", "permutations": [[1, 2, 0]],'
        ' "expected": {"nilpotent": true}},]}',
        encoding="utf-8",
    )
    code, report = run_json(capsys, "--catalog", str(path), "analyze", "C3")
    assert code == 0
    assert report["results"]["order"] == 3


def test_catalog_option_with_degree_and_generators(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    path = tmp_path / "catalog.json5"
    path.write_text(
        '{"groups": [{"label": "D3", "degree": 3,'
        ' "generators": [[1, 0, 2], [1, 2, 0]]}]}',
        encoding="utf-8",
    )
    code, report = run_json(capsys, "--catalog", str(path), "analyze", "D3")
    assert code == 0
    assert report["results"]["order"] == 6
    assert report["results"]["nilpotent"] is False


def test_catalog_degree_mismatch_is_an_input_error(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    path = tmp_path / "catalog.json5"
    path.write_text(
        '[{"label": "D3", "degree": 4, "generators": [[1, 0, 2]]}]',
        encoding="utf-8",
    )
    code, report = run_json(capsys, "--catalog", str(path), "analyze", "D3")
    assert code == 2
    assert report == {}


def test_relations_power_must_be_positive(
    capsys: pytest.CaptureFixture[str],
) -> None:
    with pytest.raises(SystemExit) as info:
        main(["-q", "relations", "S3", "--n", "0"])
    assert info.value.code == 2
    assert "'0'" in capsys.readouterr().err


def test_failed_expectation_exit_code(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    path = tmp_path / "catalog.json5"
    path.write_text(
        '[{"label": "C3", "permutations": [[1, 2, 0]],'
        ' "expected": {"perfect": true}}]',
        encoding="utf-8",
    )
    code, _ = run_json(capsys, "--catalog", str(path), "analyze", "C3")
    assert code == 1


def test_config_limits(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    path = tmp_path / "limits.json5"
    path.write_text('{"max_states": 1000, // small\n}', encoding="utf-8")
    args = ("--config", str(path), "diameter", "A5")
    code, report = run_json(capsys, *args, "--n", "3")
    assert code == 3
    assert report == {}
    code, report = run_json(capsys, *args, "--n", "1")
    assert code == 0
    assert report["results"]["states_visited"] == 60


def test_unknown_limit_in_config(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    path = tmp_path / "limits.json5"
    path.write_text('{"max_order": 10}', encoding="utf-8")
    code, _ = run_json(capsys, "--config", str(path), "analyze", "S3")
    assert code == 2


def test_output_is_deterministic(capsys: pytest.CaptureFixture[str]) -> None:
    main(["-q", "--json", "analyze", "S4"])
    first = capsys.readouterr().out
    main(["-q", "--json", "analyze", "S4"])
    assert capsys.readouterr().out == first


def test_timing_flag(capsys: pytest.CaptureFixture[str]) -> None:
    _, report = run_json(capsys, "--timing", "analyze", "S3")
    assert report["timing"]["seconds"] >= 0
    _, report = run_json(capsys, "analyze", "S3")
    assert "timing" not in report
