"""End-to-end acceptance gate.

One test per numbered criterion, so a verbose run prints one pass/fail line
for each.  The shared fixture runs every campaign once at the default gate
settings (seed 12345, 2000 trials) and each test reports its criterion's
detail string before asserting.
"""

import pytest

from xband.acceptance import evaluate_all

SEED = 12345
TRIALS = 2000


@pytest.fixture(scope="module")
def gate():
    results, _reports = evaluate_all(seed=SEED, trials=TRIALS)
    return {r.number: r for r in results}


def _check(gate, number):
    r = gate[number]
    status = "PASS" if r.passed else "FAIL"
    print(f"criterion {r.number} [{status}] {r.name}: {r.detail}")
    assert r.passed, f"criterion {r.number} ({r.name}): {r.detail}"


def test_criterion_01_reference_interference_values(gate):
    _check(gate, 1)


def test_criterion_02_simulation_matches_closed_forms(gate):
    _check(gate, 2)


def test_criterion_03_mismatch_case_gap(gate):
    _check(gate, 3)


def test_criterion_04_parameter_sweep_trends(gate):
    _check(gate, 4)


def test_criterion_05_worked_example_values(gate):
    _check(gate, 5)


def test_criterion_06_guardband_table(gate):
    _check(gate, 6)


def test_criterion_07_mitigation_spectra(gate):
    _check(gate, 7)


def test_criterion_08_throughput_and_offset_sensitivity(gate):
    _check(gate, 8)


def test_criterion_09_closed_forms_vs_numeric_oracles(gate):
    _check(gate, 9)


def test_criterion_10_byte_identical_reruns(gate):
    _check(gate, 10)
