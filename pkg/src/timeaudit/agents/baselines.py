"""Single-shot baseline forecasters.

``run_superforecasting`` issues the prediction prompt with no mention of
any knowledge cutoff. ``run_temporal_hint`` prepends an explicit cutoff
constraint block to the system prompt but adds no enforcement mechanism;
whether the model honors it is exactly what the leakage audit measures.
"""
from __future__ import annotations

from typing import Optional

from timeaudit.agents.tasks import prediction_from_args, profile_for
from timeaudit.agents.types import Prediction, TaskInstance
from timeaudit.backends.audit_log import AuditLog
from timeaudit.backends.llm import LMClient, LMRequest, LMResponse, lm_call
from timeaudit.prompts import render_template


def _run_single_shot(
    instance: TaskInstance,
    llm: LMClient,
    *,
    temporal_hint: bool,
    audit: Optional[AuditLog] = None,
    schema_retries: int = 2,
) -> Prediction:
    profile = profile_for(instance.task_type)
    system = render_template(
        "baseline_system",
        domain_role=profile.domain_role,
        domain_metrics=profile.domain_metrics,
        comparable_data=profile.comparable_data,
        min_chars=profile.min_chars,
    )
    if temporal_hint:
        constraint = render_template(
            "temporal_constraint", cutoff_date=instance.cutoff_date.isoformat()
        )
        system = f"{constraint}\n\n{system}"
    user = render_template(
        "baseline_user",
        task_instruction=profile.task_instruction,
        input_json=instance.input_json,
    )
    tool = profile.baseline_tool()

    def check(response: LMResponse) -> None:
        # Re-validate beyond JSON Schema: range and ranking-closure rules.
        call = response.tool_call
        if call is None:
            return
        prediction_from_args(
            profile,
            instance,
            call.arguments,
            value_key=profile.value_field,
            rationale_key=profile.rationale_field,
        )

    role = "baseline_temporal_hint" if temporal_hint else "baseline_superforecast"
    response = lm_call(
        llm,
        LMRequest(system=system, user=user, tools=(tool,), max_tokens=4000),
        schema_retries=schema_retries,
        audit=audit,
        role=role,
        extra_check=check,
    )
    assert response.tool_call is not None
    return prediction_from_args(
        profile,
        instance,
        response.tool_call.arguments,
        value_key=profile.value_field,
        rationale_key=profile.rationale_field,
    )


def run_superforecasting(
    instance: TaskInstance,
    llm: LMClient,
    *,
    audit: Optional[AuditLog] = None,
    schema_retries: int = 2,
) -> Prediction:
    """Baseline with no temporal guidance whatsoever."""
    return _run_single_shot(
        instance, llm, temporal_hint=False, audit=audit, schema_retries=schema_retries
    )


def run_temporal_hint(
    instance: TaskInstance,
    llm: LMClient,
    *,
    audit: Optional[AuditLog] = None,
    schema_retries: int = 2,
) -> Prediction:
    """Baseline whose system prompt states the cutoff as a hard instruction."""
    return _run_single_shot(
        instance, llm, temporal_hint=True, audit=audit, schema_retries=schema_retries
    )
