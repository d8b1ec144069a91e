"""Per-domain task profiles: prompt vocabulary, tool schemas, validation.

Three forecasting domains are supported out of the box:

* legal       -- binary classification, P(petitioner wins)
* salary      -- regression, player salary in USD
* stock       -- ranking, tickers ordered best to worst
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from timeaudit.agents.types import TaskInstance
from timeaudit.backends.llm import ToolSchema
from timeaudit.claims.models import TaskContext, TaskType
from timeaudit.errors import DatasetSchemaError, SchemaViolation

SEARCH_TOOL = ToolSchema(
    name="search_information",
    description=(
        "Search for background information. Returns a list of results with "
        "title, snippet, and publication date."
    ),
    parameters={
        "type": "object",
        "properties": {
            "query": {"type": "string", "minLength": 1},
            "purpose": {"type": "string"},
        },
        "required": ["query", "purpose"],
        "additionalProperties": False,
    },
)


@dataclass(frozen=True)
class TaskProfile:
    """Static prompt and tool configuration for one task family."""

    task_type: TaskType
    domain_label: str
    domain_role: str
    task_instruction: str
    domain_metrics: str
    comparable_data: str
    domain_data: str
    min_chars: int
    value_field: str
    rationale_field: str

    def value_schema(self) -> dict:
        if self.task_type is TaskType.CLASSIFICATION:
            return {"type": "number", "minimum": 0.0, "maximum": 1.0}
        if self.task_type is TaskType.REGRESSION:
            return {"type": "number", "minimum": 0}
        return {
            "type": "array",
            "items": {"type": "string"},
            "minItems": 2,
            "maxItems": 10,
        }

    def _rationale_schema(self) -> dict:
        return {"type": "string", "minLength": self.min_chars}

    def baseline_tool(self) -> ToolSchema:
        return ToolSchema(
            name="submit_prediction",
            description="Submit the final prediction together with its full rationale.",
            parameters={
                "type": "object",
                "properties": {
                    self.value_field: self.value_schema(),
                    self.rationale_field: self._rationale_schema(),
                },
                "required": [self.value_field, self.rationale_field],
                "additionalProperties": False,
            },
        )

    def _generic_tool(self, name: str, description: str) -> ToolSchema:
        return ToolSchema(
            name=name,
            description=description,
            parameters={
                "type": "object",
                "properties": {
                    "prediction": self.value_schema(),
                    "rationale": self._rationale_schema(),
                },
                "required": ["prediction", "rationale"],
                "additionalProperties": False,
            },
        )

    def draft_tool(self) -> ToolSchema:
        return self._generic_tool(
            "submit_draft_prediction",
            "Submit a draft prediction with its supporting rationale.",
        )

    def final_tool(self) -> ToolSchema:
        return self._generic_tool(
            "submit_final_prediction",
            "Submit the final prediction with its supporting rationale.",
        )

    def reprediction_tool(self) -> ToolSchema:
        return ToolSchema(
            name="submit_reprediction",
            description="Submit the prediction implied by the rationale exactly as given.",
            parameters={
                "type": "object",
                "properties": {"prediction": self.value_schema()},
                "required": ["prediction"],
                "additionalProperties": False,
            },
        )

    def coerce_value(self, raw: Any) -> Any:
        if self.task_type is TaskType.RANKING:
            return tuple(str(item) for item in raw)
        return float(raw)

    def validate_value(self, value: Any, instance: TaskInstance) -> None:
        """Enforce constraints JSON Schema cannot express (set closure)."""
        if self.task_type is TaskType.CLASSIFICATION:
            if not 0.0 <= value <= 1.0:
                raise SchemaViolation(f"probability {value} outside [0, 1]")
        elif self.task_type is TaskType.REGRESSION:
            if value < 0:
                raise SchemaViolation(f"salary {value} is negative")
        else:
            tickers = tuple(instance.input_payload["tickers"])
            if sorted(value) != sorted(tickers):
                raise SchemaViolation(
                    f"ranking {list(value)} is not a permutation of {list(tickers)}"
                )


PROFILES: dict[TaskType, TaskProfile] = {
    TaskType.CLASSIFICATION: TaskProfile(
        task_type=TaskType.CLASSIFICATION,
        domain_label="legal",
        domain_role="an expert Supreme Court analyst",
        task_instruction=(
            "Predict the probability that the PETITIONER wins the case below, "
            "as a number between 0.0 and 1.0."
        ),
        domain_metrics="precedent holdings, circuit splits, oral argument signals",
        comparable_data="outcomes of comparable cases with their decision dates",
        domain_data="precedents, lower-court rulings, and argument records",
        min_chars=400,
        value_field="probability_petitioner",
        rationale_field="prediction_rationale",
    ),
    TaskType.REGRESSION: TaskProfile(
        task_type=TaskType.REGRESSION,
        domain_label="salary",
        domain_role="an expert NBA salary analyst",
        task_instruction=(
            "Predict the player's salary for the target season, in US dollars."
        ),
        domain_metrics="per-game statistics, age curves, team cap space",
        comparable_data="comparable contracts with their signing dates and amounts",
        domain_data="player statistics, team cap situations, and comparable contracts",
        min_chars=400,
        value_field="predicted_salary",
        rationale_field="prediction_rationale",
    ),
    TaskType.RANKING: TaskProfile(
        task_type=TaskType.RANKING,
        domain_label="stock",
        domain_role="an expert equity analyst",
        task_instruction=(
            "Rank the tickers below from BEST to WORST expected performance "
            "over the stated horizon. Return the full list of tickers."
        ),
        domain_metrics="quarterly financials, guidance revisions, sector momentum",
        comparable_data="sector and peer performance with reporting dates",
        domain_data="quarterly financials, guidance, and sector trends",
        min_chars=1000,
        value_field="ranking",
        rationale_field="ranking_rationale",
    ),
}


def profile_for(task_type: TaskType) -> TaskProfile:
    return PROFILES[task_type]


def _event_description(instance: TaskInstance) -> str:
    payload = instance.input_payload
    if instance.task_type is TaskType.CLASSIFICATION:
        return f"Outcome of {payload['case_name']}"
    if instance.task_type is TaskType.REGRESSION:
        return f"{payload['player']} salary for the {payload['season']} season"
    tickers = ", ".join(payload["tickers"])
    return f"Relative performance ranking of {tickers} over {payload['horizon']}"


def build_task_context(instance: TaskInstance) -> TaskContext:
    """Derive the attribution/verification context from a task instance."""
    profile = profile_for(instance.task_type)
    payload: dict[str, Any] = {}
    if instance.task_type is TaskType.REGRESSION:
        if "position_median" not in instance.input_payload:
            raise DatasetSchemaError(
                f"instance {instance.instance_id}: regression input requires position_median"
            )
        payload["position_median"] = float(instance.input_payload["position_median"])
    elif instance.task_type is TaskType.RANKING:
        payload["tickers"] = tuple(instance.input_payload["tickers"])
    return TaskContext(
        task_description=profile.task_instruction,
        event_description=_event_description(instance),
        reference_date=instance.cutoff_date,
        task_type=instance.task_type,
        payload=payload,
    )


def prediction_from_args(
    profile: TaskProfile,
    instance: TaskInstance,
    args: Mapping[str, Any],
    *,
    value_key: str,
    rationale_key: str,
) -> "Prediction":
    from timeaudit.agents.types import Prediction

    value = profile.coerce_value(args[value_key])
    profile.validate_value(value, instance)
    return Prediction(
        task_type=profile.task_type,
        value=value,
        rationale=str(args[rationale_key]),
    )
