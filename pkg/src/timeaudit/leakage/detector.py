"""Per-claim leakage verdicts against a knowledge cutoff.

A claim leaks iff its determination date lands strictly after the
reference date; content determined on the cutoff day itself was
knowable at prediction time. Category shortcuts (A4/A5 always, B1/B2
never) are applied first so only A1-A3 claims cost any search traffic.
A claim that cannot be dated at all is treated as leaked: an
unverifiable claim gets no benefit of the doubt.
"""
from __future__ import annotations

from typing import Optional, Sequence

from timeaudit.backends.audit_log import AuditLog
from timeaudit.backends.caching import NamespacedCache
from timeaudit.backends.llm import LMClient
from timeaudit.backends.search import SearchClient
from timeaudit.claims.models import ExtractedClaim, TaskContext
from timeaudit.leakage.rules import categorical_leakage
from timeaudit.leakage.types import Confidence, DeterminationDate, LeakageVerdict
from timeaudit.leakage.verification import VerificationPolicy, verify_determination_dates


def _internal_fallback(
    claim: ExtractedClaim, det: DeterminationDate
) -> Optional[DeterminationDate]:
    """Low-trust fallback: the claim's own reference at strict period end."""
    if claim.temporal_reference is None:
        return None
    return DeterminationDate(
        date=claim.temporal_reference.resolved_date,
        confidence=Confidence.LOW,
        reasoning=(
            "claim-internal temporal reference "
            f"{claim.temporal_reference.raw_text!r} resolved at strict period end"
        ),
        source_query=det.source_query,
        evidence=det.evidence,
    )


def resolve_verdict(
    claim: ExtractedClaim, det: DeterminationDate, reference_date
) -> LeakageVerdict:
    """Turn one determination into a verdict for a searchable claim.

    Search-extracted dates win at medium or better confidence; below
    that the claim's own temporal reference (strict period end) takes
    over when present; with neither, the claim is unverifiable and
    leaked.
    """
    if det.confidence in (Confidence.HIGH, Confidence.MEDIUM):
        chosen = det
    else:
        chosen = _internal_fallback(claim, det)
        if chosen is None and det.confidence is Confidence.LOW:
            chosen = det
    if chosen is None:
        return LeakageVerdict(
            claim_id=claim.claim_id, leaked=True, basis="unverifiable", determination=det
        )
    return LeakageVerdict(
        claim_id=claim.claim_id,
        leaked=chosen.date > reference_date,
        basis="date_comparison",
        determination=chosen,
    )


def detect_leakage(
    claims: Sequence[ExtractedClaim],
    ctx: TaskContext,
    search_client: SearchClient,
    llm: LMClient,
    *,
    policy: VerificationPolicy = VerificationPolicy(),
    cache: Optional[NamespacedCache] = None,
    audit: Optional[AuditLog] = None,
) -> list[LeakageVerdict]:
    """One verdict per claim, in input order."""
    searchable = [c for c in claims if categorical_leakage(c.category) is None]
    determinations = verify_determination_dates(
        searchable, ctx, search_client, llm, policy=policy, cache=cache, audit=audit
    )

    verdicts = []
    for claim in claims:
        shortcut = categorical_leakage(claim.category)
        if shortcut is not None:
            verdicts.append(
                LeakageVerdict(claim_id=claim.claim_id, leaked=shortcut, basis="category_rule")
            )
            continue
        verdicts.append(
            resolve_verdict(claim, determinations[claim.claim_id], ctx.reference_date)
        )
    return verdicts


def count_unverifiable(verdicts: Sequence[LeakageVerdict]) -> int:
    return sum(1 for v in verdicts if v.basis == "unverifiable")
