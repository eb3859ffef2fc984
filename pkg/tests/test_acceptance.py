"""The thirteen acceptance criteria, each at its stated time limit.

Every test prints one PASS/FAIL line for its criterion, followed by the
individual claimed/computed rows when the criterion fails.
"""

import pytest

from picdescent import verify


@pytest.mark.parametrize("number", [n for n, *_ in verify.CRITERIA])
def test_criterion(number, capsys):
    res = verify.run_criterion(number)
    with capsys.disabled():
        print()
        print(verify.format_result(res, verbose=not res.passed))
    assert res.passed, "; ".join(res.failures())
