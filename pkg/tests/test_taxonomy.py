"""Claim category codes and their leakage shortcuts."""
from __future__ import annotations

import pytest

from timeaudit.claims.taxonomy import ClaimCategory
from timeaudit.leakage.rules import categorical_leakage

ALL_CODES = ["A1", "A2", "A3", "A4", "A5", "B1", "B2"]


def test_seven_categories():
    assert sorted(c.value for c in ClaimCategory) == ALL_CODES


@pytest.mark.parametrize("code", ALL_CODES)
def test_parse_round_trip(code):
    assert ClaimCategory.parse(code).value == code
    assert ClaimCategory.parse(code.lower()).value == code


def test_parse_rejects_unknown():
    with pytest.raises(ValueError):
        ClaimCategory.parse("C9")


def test_group_predicates_partition():
    for cat in ClaimCategory:
        roles = [cat.needs_search, cat.is_always_leaked, cat.is_never_leaked]
        assert sum(roles) == 1, f"{cat} must fall in exactly one group"


def test_search_set_is_a1_a2_a3():
    searchers = {c.value for c in ClaimCategory if c.needs_search}
    assert searchers == {"A1", "A2", "A3"}


@pytest.mark.parametrize(
    "code, expected",
    [("A4", True), ("A5", True), ("B1", False), ("B2", False),
     ("A1", None), ("A2", None), ("A3", None)],
)
def test_categorical_leakage_shortcuts(code, expected):
    assert categorical_leakage(ClaimCategory.parse(code)) is expected
