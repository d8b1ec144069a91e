"""Verdict and determination-date types for leakage detection."""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import Literal, Optional

from timeaudit.backends.search import SearchResult


class Confidence(str, Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"
    NONE = "none"

    @classmethod
    def parse(cls, value: str) -> "Confidence":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown confidence level: {value!r}") from None


@dataclass(frozen=True)
class DeterminationDate:
    """When a claim's content became publicly determinable."""

    date: Optional[date]
    confidence: Confidence
    reasoning: str = ""
    source_query: str = ""
    evidence: tuple[SearchResult, ...] = ()

    def __post_init__(self) -> None:
        if self.confidence is Confidence.NONE and self.date is not None:
            raise ValueError("confidence 'none' cannot carry a date")
        if self.confidence is not Confidence.NONE and self.date is None:
            raise ValueError(f"confidence {self.confidence.value!r} requires a date")

    def to_json_dict(self) -> dict:
        return {
            "date": self.date.isoformat() if self.date else None,
            "confidence": self.confidence.value,
            "reasoning": self.reasoning,
            "source_query": self.source_query,
            "evidence": [r.to_json_dict() for r in self.evidence],
        }


Basis = Literal["category_rule", "date_comparison", "unverifiable"]


@dataclass(frozen=True)
class LeakageVerdict:
    """Per-claim leakage call with its justification."""

    claim_id: int
    leaked: bool
    basis: Basis
    determination: Optional[DeterminationDate] = None

    def __post_init__(self) -> None:
        if self.basis == "category_rule" and self.determination is not None:
            raise ValueError("category-rule verdicts carry no determination date")
        if self.basis == "date_comparison":
            if self.determination is None or self.determination.confidence is Confidence.NONE:
                raise ValueError("date-comparison verdicts need a dated determination")
        if self.basis == "unverifiable" and not self.leaked:
            raise ValueError("unverifiable claims are treated as leaked")

    def to_json_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "leaked": self.leaked,
            "basis": self.basis,
            "determination": (
                self.determination.to_json_dict() if self.determination else None
            ),
        }
