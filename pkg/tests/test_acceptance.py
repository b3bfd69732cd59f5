"""Acceptance criteria, one test per criterion.

The experiment suite runs once (module scope) with the reference seed and
every criterion asserts its stated bound exactly; the determinism check
runs the suite a second time and compares the JSONL artifacts byte for
byte.  Each test prints its own pass line so a verbose run reads as a
checklist.
"""

import pytest

from embedlab.experiments import run_suite, write_suite

SEED = 7


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    result = run_suite(SEED)
    out_dir = tmp_path_factory.mktemp("suite_a")
    write_suite(result, out_dir)
    return result, out_dir


def _result(suite, name):
    result, _ = suite
    return next(r for r in result.results if r.name == name)


def _report(number, title, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    print(f"[{status}] criterion {number}: {title} {detail}".rstrip())
    assert passed, f"criterion {number} ({title}): {detail}"


def test_criterion_1_monotonicity(suite):
    r = _result(suite, "monotonicity")
    checked = r.evidence["pairs_checked"]
    _report(
        1, "monotonicity suite", r.passed and checked > 4000,
        f"({checked} covering pairs, {len(r.evidence['violations'])} violations)",
    )


def test_criterion_2_forcing_trichotomy(suite):
    r = _result(suite, "trichotomy")
    qs = {rec["q"] for rec in r.records if "q" in rec}
    _report(
        2, "forcing trichotomy + extension stability",
        r.passed and qs == {1, 2, 3},
        f"(q in {sorted(qs)}, {len(r.evidence['violations'])} violations)",
    )


def test_criterion_3_eq2ord_oracle(suite):
    r = _result(suite, "eq2ord_oracle")
    checked = r.evidence["diagrams_checked"]
    worked = r.records[0]["worked_ok"]
    _report(
        3, "tuple-order oracle equivalence",
        r.passed and checked >= 1400 and worked,
        f"({checked} diagrams, worked example bit-exact: {worked})",
    )


def test_criterion_4_ord2eq_limits(suite):
    r = _result(suite, "ord2eq_limits")
    runs = r.evidence["runs"]
    _report(
        4, "order-to-equivalence limit censuses",
        r.passed and runs == 40,
        f"({runs - len(r.evidence['failures'])}/{runs} correct)",
    )


def test_criterion_5_phi_pair(suite):
    r = _result(suite, "phi_pair")
    runs = r.evidence["runs"]
    _report(
        5, "guess construction stabilization",
        r.passed and runs == 42,
        f"({runs - len(r.evidence['failures'])}/{runs} runs conforming)",
    )


def test_criterion_6_phi_sigma2(suite):
    r = _result(suite, "phi_sigma2")
    runs = r.evidence["runs"]
    _report(
        6, "witness-comparison placement suffixes",
        r.passed and runs == 40,
        f"({runs - len(r.evidence['failures'])}/{runs} with suffix >= 50)",
    )


def test_criterion_7_divisibility(suite):
    r = _result(suite, "divisibility")
    _report(
        7, "replication block counts (k,q cases)",
        r.passed and r.evidence["cases"] == 8,
        f"({r.evidence['cases']} fingerprints exact)",
    )


def test_criterion_8_top_pair(suite):
    r = _result(suite, "top_pair")
    parts = {rec["part"] for rec in r.records}
    _report(
        8, "top-pair pipeline censuses and endpoints",
        r.passed and parts == {"censuses", "concatenation"},
        f"({len(r.records)} cases)",
    )


def test_criterion_9_determinism(suite, tmp_path):
    _, dir_a = suite
    second = run_suite(SEED)
    dir_b = tmp_path / "suite_b"
    write_suite(second, dir_b)
    names_a = sorted(p.name for p in dir_a.glob("*.jsonl"))
    names_b = sorted(p.name for p in dir_b.glob("*.jsonl"))
    same_names = names_a == names_b and len(names_a) == 8
    identical = same_names and all(
        (dir_a / n).read_bytes() == (dir_b / n).read_bytes() for n in names_a
    )
    _report(
        9, "suite determinism (byte-identical JSONL)",
        identical, f"({len(names_a)} artifact files)",
    )
