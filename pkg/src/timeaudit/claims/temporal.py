"""Strict resolution of textual temporal references to calendar dates.

A period reference always resolves to the *last* day of the period it
names, because a fact "about 2023" can only be fully determined once
2023 has ended:

    "2023"       -> 2023-12-31   (year)
    "Q3 2023"    -> 2023-09-30   (quarter)
    "March 2023" -> 2023-03-31   (month)
    "2019-04-15" -> 2019-04-15   (day, ISO pass-through)

Timeless facts use the sentinel date 1900-01-01 so they sort before any
realistic cutoff. All arithmetic is proleptic Gregorian via
:mod:`datetime`.
"""
from __future__ import annotations

import calendar
import re
from dataclasses import dataclass
from datetime import date
from typing import Literal

from timeaudit.errors import UnparseableTemporalReference

TIMELESS_DATE = date(1900, 1, 1)

Granularity = Literal["day", "month", "quarter", "year", "timeless"]

# Last month of each quarter; day-of-month comes from the calendar.
_QUARTER_END_MONTH = {1: 3, 2: 6, 3: 9, 4: 12}

_MONTHS = {name.lower(): i for i, name in enumerate(calendar.month_name) if name}
_MONTHS.update({name.lower(): i for i, name in enumerate(calendar.month_abbr) if name})

_ISO_DAY = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
_ISO_MONTH = re.compile(r"^(\d{4})-(\d{2})$")
_YEAR = re.compile(r"^(\d{4})$")
_QUARTER = re.compile(r"^[Qq]([1-4])[\s-]+(\d{4})$")
_MONTH_YEAR = re.compile(r"^([A-Za-z]+)\.?\s+(\d{4})$")
_MONTH_DAY_YEAR = re.compile(r"^([A-Za-z]+)\.?\s+(\d{1,2}),?\s+(\d{4})$")


@dataclass(frozen=True)
class TemporalReference:
    """A raw temporal phrase plus its resolved calendar date."""

    raw_text: str
    resolved_date: date
    granularity: Granularity

    @classmethod
    def timeless(cls, raw_text: str = "timeless") -> "TemporalReference":
        return cls(raw_text=raw_text, resolved_date=TIMELESS_DATE, granularity="timeless")

    @property
    def is_timeless(self) -> bool:
        return self.granularity == "timeless"

    def to_json_dict(self) -> dict:
        return {
            "raw_text": self.raw_text,
            "resolved_date": self.resolved_date.isoformat(),
            "granularity": self.granularity,
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "TemporalReference":
        return cls(
            raw_text=payload["raw_text"],
            resolved_date=date.fromisoformat(payload["resolved_date"]),
            granularity=payload["granularity"],
        )


def month_end(year: int, month: int) -> date:
    return date(year, month, calendar.monthrange(year, month)[1])


def parse_temporal_reference(raw_text: str) -> TemporalReference:
    """Resolve a temporal phrase under the strict period-end rule.

    Raises UnparseableTemporalReference for anything outside the
    supported grammar; callers decide whether to fall back or mark the
    claim unverifiable.
    """
    text = raw_text.strip()
    if not text:
        raise UnparseableTemporalReference(raw_text)

    if text.lower() in ("timeless", "none"):
        return TemporalReference.timeless(raw_text=text)

    m = _ISO_DAY.match(text)
    if m:
        year, month, day = (int(g) for g in m.groups())
        try:
            resolved = date(year, month, day)
        except ValueError:
            raise UnparseableTemporalReference(raw_text) from None
        return TemporalReference(text, resolved, "day")

    m = _ISO_MONTH.match(text)
    if m:
        year, month = int(m.group(1)), int(m.group(2))
        if not (1 <= month <= 12 and year >= 1):
            raise UnparseableTemporalReference(raw_text)
        return TemporalReference(text, month_end(year, month), "month")

    m = _YEAR.match(text)
    if m:
        year = int(m.group(1))
        if year < 1:
            raise UnparseableTemporalReference(raw_text)
        return TemporalReference(text, date(year, 12, 31), "year")

    m = _QUARTER.match(text)
    if m:
        quarter, year = int(m.group(1)), int(m.group(2))
        if year < 1:
            raise UnparseableTemporalReference(raw_text)
        return TemporalReference(text, month_end(year, _QUARTER_END_MONTH[quarter]), "quarter")

    m = _MONTH_DAY_YEAR.match(text)
    if m and m.group(1).lower() in _MONTHS:
        month = _MONTHS[m.group(1).lower()]
        try:
            resolved = date(int(m.group(3)), month, int(m.group(2)))
        except ValueError:
            raise UnparseableTemporalReference(raw_text) from None
        return TemporalReference(text, resolved, "day")

    m = _MONTH_YEAR.match(text)
    if m and m.group(1).lower() in _MONTHS:
        month = _MONTHS[m.group(1).lower()]
        year = int(m.group(2))
        if year < 1:
            raise UnparseableTemporalReference(raw_text)
        return TemporalReference(text, month_end(year, month), "month")

    raise UnparseableTemporalReference(raw_text)
