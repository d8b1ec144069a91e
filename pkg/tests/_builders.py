"""Small object factories shared across test modules."""
from __future__ import annotations

from datetime import date
from typing import Optional

from timeaudit.claims.models import ExtractedClaim, TaskContext, TaskType
from timeaudit.claims.taxonomy import ClaimCategory
from timeaudit.claims.temporal import parse_temporal_reference
from timeaudit.leakage.types import Confidence, DeterminationDate, LeakageVerdict
from timeaudit.shapley.coalition import ShapleyEstimate


def make_ctx(
    task_type: TaskType = TaskType.CLASSIFICATION,
    reference_date: date = date(2019, 1, 15),
    **payload,
) -> TaskContext:
    return TaskContext(
        task_description="Audit fixture task",
        event_description="Audit fixture event",
        reference_date=reference_date,
        task_type=task_type,
        payload=payload,
    )


def make_claim(
    claim_id: int,
    category: str = "B1",
    text: Optional[str] = None,
    temporal: Optional[str] = None,
) -> ExtractedClaim:
    body = text if text is not None else f"Fixture claim number {claim_id} body."
    return ExtractedClaim(
        claim_id=claim_id,
        claim_text=body,
        original_text=body,
        category=ClaimCategory.parse(category),
        temporal_reference=parse_temporal_reference(temporal) if temporal else None,
    )


def make_estimate(claim_id: int, phi: float) -> ShapleyEstimate:
    return ShapleyEstimate(
        claim_id=claim_id, phi=phi, std_error=0.0, num_samples=0, method="exact"
    )


def make_instance(task_type: TaskType = TaskType.CLASSIFICATION, **overrides):
    from timeaudit.agents.types import TaskInstance

    if task_type is TaskType.CLASSIFICATION:
        payload = {"instance_id": "legal-t1", "case_name": "Alpha v. Beta",
                   "argument_date": "2018-11-01"}
        truth = {"petitioner_wins": 1}
        instance_id = "legal-t1"
    elif task_type is TaskType.REGRESSION:
        payload = {"instance_id": "salary-t1", "player": "Devin Tran",
                   "season": "2019-20", "position_median": 8_000_000.0}
        truth = {"salary": 10_500_000.0}
        instance_id = "salary-t1"
    else:
        payload = {"instance_id": "stock-t1",
                   "tickers": ["ARDN", "BLCP", "CRDT", "DLTM"],
                   "horizon": "next quarter"}
        truth = {"ranking": ["BLCP", "DLTM", "ARDN", "CRDT"]}
        instance_id = "stock-t1"
    kwargs = dict(
        instance_id=instance_id,
        task_type=task_type,
        input_payload=payload,
        cutoff_date=date(2019, 1, 15),
        ground_truth=truth,
    )
    kwargs.update(overrides)
    return TaskInstance(**kwargs)


def make_verdict(claim_id: int, leaked: bool) -> LeakageVerdict:
    if leaked:
        return LeakageVerdict(claim_id=claim_id, leaked=True, basis="unverifiable")
    return LeakageVerdict(
        claim_id=claim_id,
        leaked=False,
        basis="date_comparison",
        determination=DeterminationDate(
            date=date(2018, 1, 1), confidence=Confidence.HIGH
        ),
    )
