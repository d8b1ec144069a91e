"""Rationale decomposition into categorized atomic claims."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from timeaudit.backends.audit_log import AuditLog
from timeaudit.backends.llm import LMClient, LMRequest, lm_call
from timeaudit.claims.models import ExtractedClaim, TaskContext
from timeaudit.claims.taxonomy import ClaimCategory
from timeaudit.claims.temporal import parse_temporal_reference
from timeaudit.errors import (
    EmptyRationale,
    LLMProtocolError,
    UnparseableTemporalReference,
)
from timeaudit.prompts import render_template

log = logging.getLogger(__name__)

# Wire format of the decomposition response. claim_id is advisory; ids
# are reassigned 1..n in document order after validation.
EXTRACTION_RESPONSE_SCHEMA = {
    "type": "object",
    "required": ["claims"],
    "properties": {
        "claims": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["claim_text", "claim_category"],
                "properties": {
                    "claim_id": {"type": "integer"},
                    "claim_text": {"type": "string", "minLength": 1},
                    "original_text": {"type": "string"},
                    "temporal_reference": {"type": ["string", "null"]},
                    "claim_category": {
                        "type": "string",
                        "enum": ["A1", "A2", "A3", "A4", "A5", "B1", "B2"],
                    },
                    "category_reasoning": {"type": "string"},
                },
            },
        }
    },
}


def build_extraction_request(rationale: str, ctx: TaskContext) -> LMRequest:
    return LMRequest(
        system=render_template("extraction_system"),
        user=render_template(
            "extraction_user",
            task_description=ctx.task_description,
            event_description=ctx.event_description,
            reference_date=ctx.reference_date.isoformat(),
            rationale_text=rationale,
        ),
        response_schema=EXTRACTION_RESPONSE_SCHEMA,
        max_tokens=8000,
    )


def extract_claims(
    rationale: str,
    ctx: TaskContext,
    llm: LMClient,
    *,
    retries: int = 2,
    audit: Optional[AuditLog] = None,
) -> list[ExtractedClaim]:
    """Decompose a rationale into atomic claims via one structured call.

    Malformed model output is re-requested up to ``retries`` times. A
    temporal reference string the strict grammar cannot resolve does not
    fail the claim; the claim is kept without a reference and the gap
    shows up later as a validation warning.
    """
    if not rationale.strip():
        raise EmptyRationale("rationale is empty")
    request = build_extraction_request(rationale, ctx)
    response = lm_call(
        llm, request, schema_retries=retries, audit=audit, role="extraction"
    )
    entries = response.structured["claims"]
    claims = []
    for position, entry in enumerate(entries, start=1):
        reference = None
        raw_ref = entry.get("temporal_reference")
        if raw_ref:
            try:
                reference = parse_temporal_reference(raw_ref)
            except UnparseableTemporalReference:
                log.warning(
                    "dropping unparseable temporal reference %r on claim %d",
                    raw_ref,
                    position,
                )
        claims.append(
            ExtractedClaim(
                claim_id=position,
                claim_text=entry["claim_text"],
                original_text=entry.get("original_text", entry["claim_text"]),
                category=ClaimCategory.parse(entry["claim_category"]),
                temporal_reference=reference,
                category_reasoning=entry.get("category_reasoning", ""),
            )
        )
    return claims


@dataclass
class ClaimSetReport:
    """Outcome of validating a decomposed claim set."""

    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_claim_set(claims: list[ExtractedClaim]) -> ClaimSetReport:
    """Check structural invariants; missing A1-A3 dates are warnings."""
    report = ClaimSetReport()
    seen: set[int] = set()
    for claim in claims:
        if claim.claim_id in seen:
            report.errors.append(f"duplicate claim_id {claim.claim_id}")
        seen.add(claim.claim_id)
        if not claim.claim_text.strip():
            report.errors.append(f"claim {claim.claim_id} has empty text")
        if claim.category.needs_search and claim.temporal_reference is None:
            report.warnings.append(
                f"claim {claim.claim_id} ({claim.category}) lacks a temporal reference"
            )
    return report


def ensure_claims_usable(claims: list[ExtractedClaim]) -> None:
    report = validate_claim_set(claims)
    if not report.ok:
        raise LLMProtocolError("; ".join(report.errors))
