"""Strict period-end date resolution."""
from __future__ import annotations

import calendar
from datetime import date

import pytest
from hypothesis import given, strategies as st

from timeaudit.claims.temporal import (
    TIMELESS_DATE,
    TemporalReference,
    month_end,
    parse_temporal_reference,
)
from timeaudit.errors import UnparseableTemporalReference

CANONICAL_TABLE = [
    ("2023", date(2023, 12, 31), "year"),
    ("Q3 2023", date(2023, 9, 30), "quarter"),
    ("March 2023", date(2023, 3, 31), "month"),
]


@pytest.mark.parametrize("raw, expected, granularity", CANONICAL_TABLE)
def test_canonical_table(raw, expected, granularity):
    ref = parse_temporal_reference(raw)
    assert ref.resolved_date == expected
    assert ref.granularity == granularity


def test_iso_day_passthrough():
    ref = parse_temporal_reference("2019-04-15")
    assert ref.resolved_date == date(2019, 4, 15)
    assert ref.granularity == "day"


def test_iso_month_resolves_to_month_end():
    assert parse_temporal_reference("2020-02").resolved_date == date(2020, 2, 29)


def test_month_day_year():
    ref = parse_temporal_reference("September 20, 2019")
    assert ref.resolved_date == date(2019, 9, 20)
    assert ref.granularity == "day"


def test_month_abbreviation():
    assert parse_temporal_reference("Sep 2021").resolved_date == date(2021, 9, 30)


def test_quarter_variants():
    assert parse_temporal_reference("q1 2018").resolved_date == date(2018, 3, 31)
    assert parse_temporal_reference("Q4-2018").resolved_date == date(2018, 12, 31)


def test_timeless_sentinel():
    ref = parse_temporal_reference("timeless")
    assert ref.is_timeless
    assert ref.resolved_date == TIMELESS_DATE == date(1900, 1, 1)


@pytest.mark.parametrize(
    "raw",
    ["", "  ", "soonish", "2019-13-01", "2019-02-30", "Q5 2019", "13 2019", "Smarch 2020"],
)
def test_rejects_unparseable(raw):
    with pytest.raises(UnparseableTemporalReference):
        parse_temporal_reference(raw)


def test_json_round_trip():
    ref = parse_temporal_reference("Q2 2019")
    again = TemporalReference.from_json_dict(ref.to_json_dict())
    assert again == ref


@given(year=st.integers(min_value=1000, max_value=9999))
def test_year_resolves_to_december_31(year):
    assert parse_temporal_reference(str(year)).resolved_date == date(year, 12, 31)


@given(
    year=st.integers(min_value=1000, max_value=9999),
    quarter=st.integers(min_value=1, max_value=4),
)
def test_quarter_resolves_to_quarter_end(year, quarter):
    resolved = parse_temporal_reference(f"Q{quarter} {year}").resolved_date
    assert resolved.year == year
    assert resolved.month == quarter * 3
    assert resolved == month_end(year, quarter * 3)


@given(
    year=st.integers(min_value=1000, max_value=9999),
    month=st.integers(min_value=1, max_value=12),
)
def test_month_name_resolves_to_month_end(year, month):
    raw = f"{calendar.month_name[month]} {year}"
    resolved = parse_temporal_reference(raw).resolved_date
    assert resolved == month_end(year, month)
    next_day = resolved.toordinal() + 1
    assert date.fromordinal(next_day).month != month or date.fromordinal(next_day).year != year


@given(
    year=st.integers(min_value=1000, max_value=9999),
    month=st.integers(min_value=1, max_value=12),
)
def test_period_end_is_maximal_consistent_date(year, month):
    """No date inside the named period may exceed the resolved date."""
    resolved = parse_temporal_reference(f"{year}-{month:02d}").resolved_date
    last_dom = calendar.monthrange(year, month)[1]
    assert resolved == date(year, month, last_dom)
