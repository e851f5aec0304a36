"""Acceptance gate: every built-in verification criterion must pass.

The whole battery runs once per session; each criterion then gets its
own test so `pytest -v` shows one pass/fail line per criterion.  The
printed summary lines carry the measured numbers and tolerances.
"""

import pytest

from evanskit import verification


@pytest.fixture(scope="module")
def battery():
    results = verification.run_checks()
    return {r.name: r for r in results}


@pytest.mark.parametrize("name", list(verification.CHECKS))
def test_criterion(battery, name, capsys):
    result = battery[name]
    with capsys.disabled():
        print(result.summary())
    assert result.passed, result.summary()


def test_battery_is_complete(battery):
    # every advertised check ran and every budgeted check has a budget
    assert set(battery) == set(verification.CHECKS)
    for name, budget in verification.BUDGETS.items():
        assert battery[name].budget == budget
