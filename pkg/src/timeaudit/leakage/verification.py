"""Three-step determination-date lookup for searchable claims.

Step 1 turns all claims into search queries in one model call, step 2
executes the queries in parallel (unbounded by the cutoff, since a
determination date may lie after it), and step 3 extracts each claim's
event date from the pooled results in one more model call. The date we
want is when the claimed content became publicly knowable, never the
publication date of whichever article mentions it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from typing import Literal, Optional, Sequence

from timeaudit.backends.audit_log import AuditLog
from timeaudit.backends.caching import NamespacedCache
from timeaudit.backends.concurrency import gather_bounded
from timeaudit.backends.llm import LMClient, LMRequest, lm_call
from timeaudit.backends.search import SearchClient, SearchRequest, SearchResult, run_search
from timeaudit.claims.models import ExtractedClaim, TaskContext
from timeaudit.claims.taxonomy import ClaimCategory
from timeaudit.errors import LLMProtocolError
from timeaudit.leakage.types import Confidence, DeterminationDate
from timeaudit.prompts import render_template

QUERY_RESPONSE_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["index", "query"],
        "properties": {
            "index": {"type": "integer", "minimum": 0},
            "query": {"type": "string", "minLength": 1},
        },
    },
}

DATE_RESPONSE_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["index", "confidence"],
        "properties": {
            "index": {"type": "integer", "minimum": 0},
            "event_date": {"type": ["string", "null"]},
            "confidence": {"type": "string", "enum": ["high", "medium", "low", "none"]},
            "reasoning": {"type": "string"},
        },
    },
}


@dataclass(frozen=True)
class VerificationPolicy:
    """Knobs for the verification pass.

    ``state_date_policy`` controls search-extracted dates for state
    claims (A2): "prompt" keeps the extractor's period-start convention;
    "strict" overrides them to the claim's own period end whenever the
    claim carries a period reference.
    """

    state_date_policy: Literal["prompt", "strict"] = "prompt"
    search_concurrency: int = 10
    results_per_query: int = 5
    retries: int = 1


def _claims_payload(claims: Sequence[ExtractedClaim]) -> list[dict]:
    return [
        {
            "index": index,
            "claim_id": claim.claim_id,
            "claim_text": claim.claim_text,
            "category": claim.category.value,
            "temporal_reference": (
                claim.temporal_reference.raw_text if claim.temporal_reference else None
            ),
        }
        for index, claim in enumerate(claims)
    ]


def _indexed_exactly(entries: list[dict], count: int) -> Optional[dict[int, dict]]:
    """Map index -> entry iff indices are exactly 0..count-1, else None."""
    if len(entries) != count:
        return None
    by_index = {}
    for entry in entries:
        index = entry["index"]
        if index in by_index or not 0 <= index < count:
            return None
        by_index[index] = entry
    return by_index


def _call_indexed(
    llm: LMClient,
    request: LMRequest,
    count: int,
    retries: int,
    audit: Optional[AuditLog],
    role: str,
) -> dict[int, dict]:
    failure = "no attempt"
    for _ in range(retries + 1):
        try:
            response = lm_call(llm, request, schema_retries=0, audit=audit, role=role)
        except LLMProtocolError as exc:
            failure = str(exc)
            continue
        by_index = _indexed_exactly(response.structured, count)
        if by_index is not None:
            return by_index
        failure = "index coverage mismatch"
    raise LLMProtocolError(f"{role} failed after {retries + 1} attempts: {failure}")


def generate_queries(
    claims: Sequence[ExtractedClaim],
    llm: LMClient,
    *,
    retries: int = 1,
    audit: Optional[AuditLog] = None,
) -> list[str]:
    """One model call mapping every claim to a dating query."""
    request = LMRequest(
        system=render_template("query_generation_system"),
        user=render_template(
            "query_generation_user",
            claims_json=json.dumps(_claims_payload(claims), indent=2),
        ),
        response_schema=QUERY_RESPONSE_SCHEMA,
        max_tokens=8000,
    )
    by_index = _call_indexed(llm, request, len(claims), retries, audit, "query_generation")
    return [by_index[i]["query"] for i in range(len(claims))]


def extract_event_dates(
    claims: Sequence[ExtractedClaim],
    results_per_claim: Sequence[Sequence[SearchResult]],
    llm: LMClient,
    *,
    retries: int = 1,
    audit: Optional[AuditLog] = None,
) -> list[tuple[Optional[date], Confidence, str]]:
    """One model call dating every claim from its pooled results."""
    payload = []
    for index, (claim, results) in enumerate(zip(claims, results_per_claim)):
        payload.append(
            {
                "index": index,
                "claim_text": claim.claim_text,
                "category": claim.category.value,
                "results": [r.to_json_dict() for r in results],
            }
        )
    request = LMRequest(
        system=render_template("date_extraction_system"),
        user=render_template(
            "date_extraction_user", extraction_data_json=json.dumps(payload, indent=2)
        ),
        response_schema=DATE_RESPONSE_SCHEMA,
        max_tokens=8000,
    )
    by_index = _call_indexed(llm, request, len(claims), retries, audit, "date_extraction")

    extracted = []
    for i in range(len(claims)):
        entry = by_index[i]
        confidence = Confidence.parse(entry["confidence"])
        raw_date = entry.get("event_date")
        parsed: Optional[date] = None
        if raw_date:
            try:
                parsed = date.fromisoformat(raw_date)
            except ValueError:
                parsed = None
        if parsed is None:
            confidence = Confidence.NONE
        extracted.append((parsed, confidence, entry.get("reasoning", "")))
    return extracted


def _apply_state_policy(
    claim: ExtractedClaim,
    extracted: Optional[date],
    confidence: Confidence,
    reasoning: str,
    policy: VerificationPolicy,
) -> tuple[Optional[date], Confidence, str]:
    if (
        policy.state_date_policy != "strict"
        or claim.category is not ClaimCategory.STATE_MEASUREMENT
        or confidence is Confidence.NONE
        or claim.temporal_reference is None
        or claim.temporal_reference.granularity not in ("month", "quarter", "year")
    ):
        return extracted, confidence, reasoning
    # Strict parsing already resolved the reference to its period end.
    return (
        claim.temporal_reference.resolved_date,
        confidence,
        reasoning + " [strict policy: state claim resolved to period end]",
    )


def verify_determination_dates(
    claims: Sequence[ExtractedClaim],
    ctx: TaskContext,
    search_client: SearchClient,
    llm: LMClient,
    *,
    policy: VerificationPolicy = VerificationPolicy(),
    cache: Optional[NamespacedCache] = None,
    audit: Optional[AuditLog] = None,
) -> dict[int, DeterminationDate]:
    """Date every given claim; search failures degrade per claim.

    Searches run unrestricted (no before_date): the whole point is
    discovering determination dates that may postdate the cutoff.
    """
    if not claims:
        return {}
    queries = generate_queries(claims, llm, retries=policy.retries, audit=audit)

    def _searcher(query: str):
        def _run() -> list[SearchResult]:
            return run_search(
                search_client,
                SearchRequest(query=query, before_date=None, max_results=policy.results_per_query),
                cache=cache,
                role="supervisor",
                audit=audit,
            )

        return _run

    outcomes = gather_bounded(
        [_searcher(q) for q in queries], limit=policy.search_concurrency
    )
    results_per_claim: list[list[SearchResult]] = []
    search_failed: list[bool] = []
    for outcome in outcomes:
        if isinstance(outcome, BaseException):
            results_per_claim.append([])
            search_failed.append(True)
        else:
            results_per_claim.append(list(outcome))
            search_failed.append(False)

    extracted = extract_event_dates(
        claims, results_per_claim, llm, retries=policy.retries, audit=audit
    )

    determinations: dict[int, DeterminationDate] = {}
    for claim, query, results, failed, (event_date, confidence, reasoning) in zip(
        claims, queries, results_per_claim, search_failed, extracted
    ):
        if failed:
            event_date, confidence = None, Confidence.NONE
            reasoning = "search backend failed for this claim"
        event_date, confidence, reasoning = _apply_state_policy(
            claim, event_date, confidence, reasoning, policy
        )
        determinations[claim.claim_id] = DeterminationDate(
            date=event_date,
            confidence=confidence,
            reasoning=reasoning,
            source_query=query,
            evidence=tuple(results),
        )
    return determinations
