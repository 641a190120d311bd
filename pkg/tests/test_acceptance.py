"""Acceptance gate: every criterion must pass at its stated tolerance.

Each test invokes the same criterion implementation the CLI's verify
subcommand runs, asserts it passed, and prints its one-line summary so a
plain `pytest -s tests/test_acceptance.py` doubles as the acceptance report.
"""

import json

import pytest

from critwave.acceptance import CRITERIA

RUNTIME_BUDGETS = {
    "ground-constants": 5.0,
    "stationarity": 5.0,
    "linear-exactness": 5.0,
    "free-decay": 30.0,
    "energy-conservation": 30.0,
    "morawetz": 60.0,
    "virial-identities": 60.0,
    "threshold-sweep": 600.0,
    "constant-coefficient": 60.0,
    "hyperbolic-bridge": 120.0,
    "condition-checkers": 10.0,
}


@pytest.mark.parametrize("name,fn", CRITERIA, ids=[name for name, _ in CRITERIA])
def test_acceptance_criterion(name, fn):
    result = fn()
    print(result.line())
    assert result.passed, json.dumps(result.details, indent=1, default=str)
    assert result.runtime <= RUNTIME_BUDGETS[name]
