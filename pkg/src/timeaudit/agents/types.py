"""Prediction-side domain types: instances, predictions, traces."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from typing import Any, Mapping, Optional

from timeaudit.backends.search import SearchResult
from timeaudit.claims.models import ExtractedClaim, TaskType
from timeaudit.leakage.types import LeakageVerdict


@dataclass(frozen=True)
class TaskInstance:
    """One prediction problem with its cutoff and quarantined answer.

    ``ground_truth`` and ``meta`` never reach a prompt; only
    ``input_payload`` is rendered for models.
    """

    instance_id: str
    task_type: TaskType
    input_payload: Mapping[str, Any]
    cutoff_date: date
    ground_truth: Mapping[str, Any]
    meta: Mapping[str, Any] = field(default_factory=dict)

    @property
    def input_json(self) -> str:
        return json.dumps(dict(self.input_payload), indent=2, sort_keys=True)


@dataclass(frozen=True)
class Prediction:
    """A submitted prediction: the value plus the rationale behind it."""

    task_type: TaskType
    value: Any
    rationale: str

    def to_json_dict(self) -> dict:
        value = self.value
        if isinstance(value, tuple):
            value = list(value)
        return {
            "task_type": self.task_type.value,
            "value": value,
            "rationale": self.rationale,
        }

    @classmethod
    def from_json_dict(cls, payload: Mapping[str, Any]) -> "Prediction":
        task_type = TaskType.parse(payload["task_type"])
        value = payload["value"]
        if task_type is TaskType.RANKING:
            value = tuple(value)
        return cls(task_type=task_type, value=value, rationale=payload["rationale"])


@dataclass(frozen=True)
class SearchQueryRecord:
    query: str
    purpose: str
    results: tuple[SearchResult, ...]

    def to_json_dict(self) -> dict:
        return {
            "query": self.query,
            "purpose": self.purpose,
            "results": [r.to_json_dict() for r in self.results],
        }


@dataclass
class SearchHistory:
    records: list[SearchQueryRecord] = field(default_factory=list)

    def add(self, record: SearchQueryRecord) -> None:
        self.records.append(record)

    @property
    def result_count(self) -> int:
        return sum(len(r.results) for r in self.records)

    @property
    def queries(self) -> list[str]:
        return [r.query for r in self.records]

    def all_results(self) -> list[SearchResult]:
        return [result for record in self.records for result in record.results]

    def to_json_dict(self) -> dict:
        return {"records": [r.to_json_dict() for r in self.records]}


@dataclass
class TimeSPECTrace:
    """Full state-machine record for one end-to-end run."""

    instance_id: str
    draft: Optional[Prediction] = None
    draft_claims: tuple[ExtractedClaim, ...] = ()
    verdicts_1: tuple[LeakageVerdict, ...] = ()
    valid_1: tuple[ExtractedClaim, ...] = ()
    violated_1: tuple[ExtractedClaim, ...] = ()
    regenerated: Optional[Prediction] = None
    regenerated_claims: tuple[ExtractedClaim, ...] = ()
    verdicts_2: tuple[LeakageVerdict, ...] = ()
    valid_2: tuple[ExtractedClaim, ...] = ()
    violated_2: tuple[ExtractedClaim, ...] = ()
    final: Optional[Prediction] = None
    persistent_violations: tuple[ExtractedClaim, ...] = ()
    generation_history: SearchHistory = field(default_factory=SearchHistory)
    regeneration_history: Optional[SearchHistory] = None
    aggregator_prompt: str = ""
    regenerations: int = 0

    def to_json_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "draft": self.draft.to_json_dict() if self.draft else None,
            "draft_claims": [c.to_json_dict() for c in self.draft_claims],
            "verdicts_1": [v.to_json_dict() for v in self.verdicts_1],
            "valid_1": [c.claim_id for c in self.valid_1],
            "violated_1": [c.claim_id for c in self.violated_1],
            "regenerated": self.regenerated.to_json_dict() if self.regenerated else None,
            "regenerated_claims": [c.to_json_dict() for c in self.regenerated_claims],
            "verdicts_2": [v.to_json_dict() for v in self.verdicts_2],
            "valid_2": [c.claim_id for c in self.valid_2],
            "violated_2": [c.claim_id for c in self.violated_2],
            "final": self.final.to_json_dict() if self.final else None,
            "persistent_violations": [c.to_json_dict() for c in self.persistent_violations],
            "generation_history": self.generation_history.to_json_dict(),
            "regeneration_history": (
                self.regeneration_history.to_json_dict() if self.regeneration_history else None
            ),
            "aggregator_prompt": self.aggregator_prompt,
            "regenerations": self.regenerations,
        }
