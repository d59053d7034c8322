"""One PASS/FAIL line per acceptance criterion, at the stated tolerances."""

import pytest

from flatbergman.acceptance import run_suite


@pytest.fixture(scope="module")
def results():
    out = run_suite(seed=0, jobs=1)
    print()
    for r in out:
        print(r.line())
    return {r.number: r for r in out}


@pytest.mark.parametrize("number", range(1, 10))
def test_criterion(results, number):
    r = results[number]
    print(r.line())
    assert r.passed, r.detail
