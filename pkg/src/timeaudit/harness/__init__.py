"""Run harness: datasets, scripted backends, the runner, and the CLI."""
from timeaudit.harness.dataset import load_dataset, load_datasets, parse_instance
from timeaudit.harness.faithfulness import (
    FaithfulnessResult,
    audit_faithfulness,
    clean_rationale,
    faithfulness_gap,
    repredict,
    summarize_gaps,
)
from timeaudit.harness.mocks import (
    DeskLM,
    MockAgentScript,
    MockClaimSpec,
    MockPlaybook,
    MockSearchSpec,
    build_mock_backends,
    synthesize_corpus,
)
from timeaudit.harness.runner import (
    AuditRunner,
    PairOutcome,
    RunConfig,
    audit_prediction,
    load_outcomes,
    raw_performance,
)

__all__ = [
    "AuditRunner",
    "DeskLM",
    "FaithfulnessResult",
    "MockAgentScript",
    "MockClaimSpec",
    "MockPlaybook",
    "MockSearchSpec",
    "PairOutcome",
    "RunConfig",
    "audit_faithfulness",
    "audit_prediction",
    "build_mock_backends",
    "clean_rationale",
    "faithfulness_gap",
    "load_dataset",
    "load_datasets",
    "load_outcomes",
    "parse_instance",
    "raw_performance",
    "repredict",
    "summarize_gaps",
    "synthesize_corpus",
]
