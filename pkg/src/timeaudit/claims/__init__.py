"""Claim taxonomy, strict temporal resolution, and rationale decomposition."""
from timeaudit.claims.extraction import (
    ClaimSetReport,
    build_extraction_request,
    ensure_claims_usable,
    extract_claims,
    validate_claim_set,
)
from timeaudit.claims.models import (
    ExtractedClaim,
    TaskContext,
    TaskType,
    claims_from_json,
    claims_to_json,
)
from timeaudit.claims.taxonomy import ClaimCategory
from timeaudit.claims.temporal import (
    TIMELESS_DATE,
    TemporalReference,
    month_end,
    parse_temporal_reference,
)

__all__ = [
    "TIMELESS_DATE",
    "ClaimCategory",
    "ClaimSetReport",
    "ExtractedClaim",
    "TaskContext",
    "TaskType",
    "TemporalReference",
    "build_extraction_request",
    "claims_from_json",
    "claims_to_json",
    "ensure_claims_usable",
    "extract_claims",
    "month_end",
    "parse_temporal_reference",
    "validate_claim_set",
]
