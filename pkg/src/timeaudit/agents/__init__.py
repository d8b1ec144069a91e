"""Forecasting agents: single-shot baselines and the multi-phase pipeline."""
from __future__ import annotations

from typing import Optional

from timeaudit.agents.baselines import run_superforecasting, run_temporal_hint
from timeaudit.agents.tasks import (
    PROFILES,
    SEARCH_TOOL,
    TaskProfile,
    build_task_context,
    prediction_from_args,
    profile_for,
)
from timeaudit.agents.timespec import (
    SupervisionResult,
    TimeSPECConfig,
    render_claim_line,
    run_timespec,
    timespec_aggregate,
    timespec_generate,
    timespec_regenerate,
    timespec_supervise,
)
from timeaudit.agents.toolloop import (
    Handler,
    HandlerResult,
    LoopState,
    ToolLoopOutcome,
    run_tool_loop,
)
from timeaudit.agents.types import (
    Prediction,
    SearchHistory,
    SearchQueryRecord,
    TaskInstance,
    TimeSPECTrace,
)
from timeaudit.backends.audit_log import AuditLog
from timeaudit.backends.caching import NamespacedCache
from timeaudit.backends.llm import LMClient
from timeaudit.backends.search import SearchClient
from timeaudit.leakage.verification import VerificationPolicy

AGENT_KINDS = ("superforecast", "temporal-hint", "timespec")


def run_agent(
    kind: str,
    instance: TaskInstance,
    llm: LMClient,
    search_client: Optional[SearchClient] = None,
    *,
    cfg: TimeSPECConfig = TimeSPECConfig(),
    policy: VerificationPolicy = VerificationPolicy(),
    cache: Optional[NamespacedCache] = None,
    audit: Optional[AuditLog] = None,
) -> tuple[Prediction, Optional[TimeSPECTrace]]:
    """Run one agent on one instance; trace is None for the baselines."""
    if kind == "superforecast":
        return run_superforecasting(instance, llm, audit=audit), None
    if kind == "temporal-hint":
        return run_temporal_hint(instance, llm, audit=audit), None
    if kind == "timespec":
        if search_client is None:
            raise ValueError("timespec requires a search client")
        return run_timespec(
            instance,
            llm,
            search_client,
            cfg=cfg,
            policy=policy,
            cache=cache,
            audit=audit,
        )
    raise ValueError(f"unknown agent kind {kind!r}; expected one of {AGENT_KINDS}")


__all__ = [
    "AGENT_KINDS",
    "Handler",
    "HandlerResult",
    "LoopState",
    "PROFILES",
    "Prediction",
    "SEARCH_TOOL",
    "SearchHistory",
    "SearchQueryRecord",
    "SupervisionResult",
    "TaskInstance",
    "TaskProfile",
    "TimeSPECConfig",
    "TimeSPECTrace",
    "ToolLoopOutcome",
    "build_task_context",
    "prediction_from_args",
    "profile_for",
    "render_claim_line",
    "run_agent",
    "run_superforecasting",
    "run_temporal_hint",
    "run_timespec",
    "run_tool_loop",
    "timespec_aggregate",
    "timespec_generate",
    "timespec_regenerate",
    "timespec_supervise",
]
