"""Rationale faithfulness check: does the stated reasoning imply the answer?

The prediction-statement lines are stripped from a rationale and the
model re-predicts from the cleaned text alone. A faithful rationale
reproduces the original value; the gap is the mean relative deviation
for scalar tasks and the relative pair-disagreement for rankings, so 0
always means "the reasoning carries the prediction".
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Optional, Sequence

from timeaudit.agents.tasks import build_task_context, profile_for
from timeaudit.agents.types import Prediction, TaskInstance
from timeaudit.backends.audit_log import AuditLog
from timeaudit.backends.llm import LMClient, LMRequest, lm_call
from timeaudit.claims.models import TaskType
from timeaudit.metrics.performance import kendall_relative, mre
from timeaudit.prompts import render_template
from timeaudit.shapley.characteristic import ranking_to_ranks

# A line is a prediction statement when it names the act of predicting or
# carries the task's value formatting. Claims of fact stay untouched.
PREDICTION_CUE_RE = re.compile(
    r"\b(predict|prediction|predicted|estimate|estimated|forecast|therefore|"
    r"conclusion|final answer)\b",
    re.IGNORECASE,
)
TASK_VALUE_RES: dict[TaskType, re.Pattern] = {
    TaskType.CLASSIFICATION: re.compile(r"\bprobability\b|\b\d{1,3}\s*%", re.IGNORECASE),
    TaskType.REGRESSION: re.compile(r"\$\s*[\d,]"),
    TaskType.RANKING: re.compile(r"\branking\b|\s>\s", re.IGNORECASE),
}


def clean_rationale(rationale: str, task_type: TaskType) -> str:
    """Strip prediction-statement lines, keeping the evidential content."""
    value_re = TASK_VALUE_RES[task_type]
    kept = [
        line
        for line in rationale.splitlines()
        if not (PREDICTION_CUE_RE.search(line) or value_re.search(line))
    ]
    return "\n".join(kept)


def repredict(
    instance: TaskInstance,
    cleaned_rationale: str,
    llm: LMClient,
    *,
    schema_retries: int = 2,
    audit: Optional[AuditLog] = None,
) -> Any:
    """One structured call turning a cleaned rationale back into a value."""
    profile = profile_for(instance.task_type)
    ctx = build_task_context(instance)
    request = LMRequest(
        system=render_template("reprediction_system"),
        user=render_template(
            "reprediction_user",
            task_context=ctx.header(),
            input_json=instance.input_json,
            cleaned_rationale=cleaned_rationale,
        ),
        tools=(profile.reprediction_tool(),),
        max_tokens=2000,
    )
    response = lm_call(
        llm, request, schema_retries=schema_retries, audit=audit, role="reprediction"
    )
    assert response.tool_call is not None
    value = profile.coerce_value(response.tool_call.arguments["prediction"])
    profile.validate_value(value, instance)
    return value


def faithfulness_gap(original: Any, reprediction: Any, task_type: TaskType) -> float:
    """0 when the cleaned rationale reproduces the prediction exactly."""
    if task_type is TaskType.RANKING:
        canonical = tuple(original)
        return kendall_relative(
            ranking_to_ranks(reprediction, canonical),
            ranking_to_ranks(original, canonical),
        )
    return mre([float(original)], [float(reprediction)])


@dataclass(frozen=True)
class FaithfulnessResult:
    instance_id: str
    agent: str
    original: Any
    reprediction: Any
    gap: float

    def to_json_dict(self) -> dict:
        original = list(self.original) if isinstance(self.original, tuple) else self.original
        repred = (
            list(self.reprediction)
            if isinstance(self.reprediction, tuple)
            else self.reprediction
        )
        return {
            "instance_id": self.instance_id,
            "agent": self.agent,
            "original": original,
            "reprediction": repred,
            "gap": self.gap,
        }


def audit_faithfulness(
    instance: TaskInstance,
    prediction: Prediction,
    llm: LMClient,
    *,
    agent: str = "",
    audit: Optional[AuditLog] = None,
) -> FaithfulnessResult:
    cleaned = clean_rationale(prediction.rationale, instance.task_type)
    reprediction = repredict(instance, cleaned, llm, audit=audit)
    gap = faithfulness_gap(prediction.value, reprediction, instance.task_type)
    return FaithfulnessResult(
        instance_id=instance.instance_id,
        agent=agent,
        original=prediction.value,
        reprediction=reprediction,
        gap=gap,
    )


def summarize_gaps(results: Sequence[FaithfulnessResult]) -> dict:
    """Per-agent mean gap plus the overall mean."""
    by_agent: dict[str, list[float]] = {}
    for result in results:
        by_agent.setdefault(result.agent, []).append(result.gap)
    summary = {
        agent: sum(gaps) / len(gaps) for agent, gaps in sorted(by_agent.items())
    }
    all_gaps = [r.gap for r in results]
    return {
        "by_agent": summary,
        "overall": sum(all_gaps) / len(all_gaps) if all_gaps else 0.0,
        "count": len(all_gaps),
    }
