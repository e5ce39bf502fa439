"""Acceptance criteria at full scale (about three minutes on one core).

Each criterion prints one pass/fail line; the lines are also repeated in the pytest
terminal summary.
"""

import pytest

from qfuncest.acceptance import CRITERIA, run_acceptance

LINES = []


@pytest.fixture(scope="module")
def results():
    out = {r.number: r for r in run_acceptance(quick=False, log=None)}
    for n in sorted(out):
        print(out[n].line())
        LINES.append(out[n].line())
    return out


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(results, number):
    res = results[number]
    print(res.line())
    assert res.passed, res.line()
