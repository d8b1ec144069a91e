"""Leakage detection: category shortcuts plus determination-date checks."""
from timeaudit.leakage.detector import count_unverifiable, detect_leakage, resolve_verdict
from timeaudit.leakage.rules import categorical_leakage
from timeaudit.leakage.types import Confidence, DeterminationDate, LeakageVerdict
from timeaudit.leakage.verification import (
    VerificationPolicy,
    extract_event_dates,
    generate_queries,
    verify_determination_dates,
)

__all__ = [
    "Confidence",
    "DeterminationDate",
    "LeakageVerdict",
    "VerificationPolicy",
    "categorical_leakage",
    "count_unverifiable",
    "detect_leakage",
    "extract_event_dates",
    "generate_queries",
    "resolve_verdict",
    "verify_determination_dates",
]
