"""Acceptance gate: one line per criterion, each at its stated tolerance and time budget."""

import pytest

from isoprofile.acceptance import CRITERIA, run_criterion

pytestmark = pytest.mark.acceptance


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print("\n" + result.line)
    assert result.runtime < result.budget, result.line
    assert result.passed, result.line
