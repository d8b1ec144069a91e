"""Domain types for decomposed rationales and their task context."""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Any, Mapping, Optional

from timeaudit.claims.taxonomy import ClaimCategory
from timeaudit.claims.temporal import TemporalReference


class TaskType(str, Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"
    RANKING = "ranking"

    @classmethod
    def parse(cls, value: str) -> "TaskType":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown task type: {value!r}") from None


@dataclass(frozen=True)
class ExtractedClaim:
    """One atomic, self-contained factual assertion from a rationale."""

    claim_id: int
    claim_text: str
    original_text: str
    category: ClaimCategory
    temporal_reference: Optional[TemporalReference] = None
    category_reasoning: str = ""

    def __post_init__(self) -> None:
        if self.claim_id < 1:
            raise ValueError(f"claim_id must be >= 1, got {self.claim_id}")
        if not self.claim_text.strip():
            raise ValueError("claim_text must be non-empty")

    def to_json_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "claim_text": self.claim_text,
            "original_text": self.original_text,
            "category": self.category.value,
            "temporal_reference": (
                self.temporal_reference.to_json_dict() if self.temporal_reference else None
            ),
            "category_reasoning": self.category_reasoning,
        }

    @classmethod
    def from_json_dict(cls, payload: Mapping[str, Any]) -> "ExtractedClaim":
        ref = payload.get("temporal_reference")
        return cls(
            claim_id=payload["claim_id"],
            claim_text=payload["claim_text"],
            original_text=payload.get("original_text", payload["claim_text"]),
            category=ClaimCategory.parse(payload["category"]),
            temporal_reference=TemporalReference.from_json_dict(ref) if ref else None,
            category_reasoning=payload.get("category_reasoning", ""),
        )


@dataclass(frozen=True)
class TaskContext:
    """Everything the audit needs to know about the prediction task.

    ``reference_date`` is the knowledge cutoff the prediction claims to
    respect. ``payload`` carries task-specific extras that some stages
    need (regression baseline, canonical ticker order) and is never fed
    to a model wholesale.
    """

    task_description: str
    event_description: str
    reference_date: date
    task_type: TaskType
    payload: Mapping[str, Any] = field(default_factory=dict)

    def header(self) -> str:
        """Compact context block used at the top of audit prompts."""
        return (
            f"TASK: {self.task_description}\n"
            f"TASK TYPE: {self.task_type.value}\n"
            f"TARGET EVENT: {self.event_description}\n"
            f"REFERENCE DATE: {self.reference_date.isoformat()}"
        )


def claims_to_json(claims: list[ExtractedClaim]) -> list[dict]:
    return [claim.to_json_dict() for claim in claims]


def claims_from_json(payload: list[Mapping[str, Any]]) -> list[ExtractedClaim]:
    return [ExtractedClaim.from_json_dict(entry) for entry in payload]
