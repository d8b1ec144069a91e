"""Temporal leakage auditing for model prediction rationales.

The package decomposes a prediction's rationale into atomic claims,
attributes the prediction to those claims with Shapley values, dates
every checkable claim against the task's knowledge cutoff, and reports
leakage both unweighted and influence-weighted. It also ships the
forecasting agents the audit is designed to compare: two single-shot
baselines and a multi-phase generate/verify/regenerate/synthesize
pipeline.
"""
from timeaudit.agents import (
    Prediction,
    TaskInstance,
    TimeSPECConfig,
    TimeSPECTrace,
    run_agent,
    run_superforecasting,
    run_temporal_hint,
    run_timespec,
)
from timeaudit.claims import (
    ClaimCategory,
    ExtractedClaim,
    TaskContext,
    TaskType,
    TemporalReference,
    extract_claims,
    parse_temporal_reference,
)
from timeaudit.errors import AuditError
from timeaudit.leakage import (
    Confidence,
    DeterminationDate,
    LeakageVerdict,
    VerificationPolicy,
    detect_leakage,
)
from timeaudit.metrics import (
    InstanceAudit,
    audit_instance,
    olr,
    shapley_dclr,
    topk_leakage,
)
from timeaudit.shapley import (
    Coalition,
    SamplerConfig,
    ShapleyEstimate,
    compute_shapley,
    exact_shapley,
    make_characteristic,
    mc_shapley,
)

__version__ = "0.1.0"

__all__ = [
    "AuditError",
    "ClaimCategory",
    "Coalition",
    "Confidence",
    "DeterminationDate",
    "ExtractedClaim",
    "InstanceAudit",
    "LeakageVerdict",
    "Prediction",
    "SamplerConfig",
    "ShapleyEstimate",
    "TaskContext",
    "TaskInstance",
    "TaskType",
    "TemporalReference",
    "TimeSPECConfig",
    "TimeSPECTrace",
    "VerificationPolicy",
    "audit_instance",
    "compute_shapley",
    "detect_leakage",
    "exact_shapley",
    "extract_claims",
    "make_characteristic",
    "mc_shapley",
    "olr",
    "parse_temporal_reference",
    "run_agent",
    "run_superforecasting",
    "run_temporal_hint",
    "run_timespec",
    "shapley_dclr",
    "topk_leakage",
    "__version__",
]
