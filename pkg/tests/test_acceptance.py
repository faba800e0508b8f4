"""One test per acceptance criterion; each prints a PASS/FAIL summary line."""

from __future__ import annotations

import pytest

from twophase import selftest


@pytest.mark.parametrize("number", sorted(selftest.CRITERIA))
def test_criterion(number):
    res = selftest.run_criterion(number)
    print(res.summary())
    assert res.passed, res.summary()
