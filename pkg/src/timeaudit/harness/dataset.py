"""JSONL dataset loading with ground-truth quarantine.

Each line is one instance:

    {"instance_id": "...", "task": "legal|salary|stock",
     "cutoff_date": "YYYY-MM-DD", "input": {...}, "ground_truth": {...},
     "mock": {...}}

``input`` is the only block ever rendered into a prompt. ``ground_truth``
is kept aside for scoring and ``mock`` (optional scripted-backend data)
is stowed in instance metadata.
"""
from __future__ import annotations

import json
from datetime import date
from pathlib import Path
from typing import Any, Iterable, Mapping

from timeaudit.agents.types import TaskInstance
from timeaudit.claims.models import TaskType
from timeaudit.errors import DatasetSchemaError

_TASK_LABELS = {
    "legal": TaskType.CLASSIFICATION,
    "salary": TaskType.REGRESSION,
    "stock": TaskType.RANKING,
    "classification": TaskType.CLASSIFICATION,
    "regression": TaskType.REGRESSION,
    "ranking": TaskType.RANKING,
}

_DETECTION_FIELDS = (
    ("case_name", TaskType.CLASSIFICATION),
    ("player", TaskType.REGRESSION),
    ("tickers", TaskType.RANKING),
)


def _err(message: str, line_number: int) -> DatasetSchemaError:
    return DatasetSchemaError(message, line_number=line_number)


def _detect_task(record: Mapping[str, Any], line_number: int) -> TaskType:
    label = record.get("task")
    if label is not None:
        try:
            return _TASK_LABELS[str(label).lower()]
        except KeyError:
            raise _err(f"unknown task label {label!r}", line_number) from None
    payload = record.get("input", {})
    for field, task_type in _DETECTION_FIELDS:
        if field in payload:
            return task_type
    raise _err(
        "cannot detect task: need a 'task' label or one of "
        "case_name/player/tickers in the input",
        line_number,
    )


def _parse_cutoff(record: Mapping[str, Any], line_number: int) -> date:
    raw = record.get("cutoff_date")
    if not isinstance(raw, str):
        raise _err("cutoff_date must be an ISO date string", line_number)
    try:
        return date.fromisoformat(raw)
    except ValueError:
        raise _err(f"cutoff_date {raw!r} is not a valid ISO date", line_number) from None


def _require(payload: Mapping[str, Any], keys: Iterable[str], where: str, line_number: int) -> None:
    missing = [k for k in keys if k not in payload]
    if missing:
        raise _err(f"{where} missing required fields: {', '.join(missing)}", line_number)


def _validate_input(task_type: TaskType, payload: Mapping[str, Any], line_number: int) -> None:
    if task_type is TaskType.CLASSIFICATION:
        _require(payload, ("case_name", "question"), "legal input", line_number)
    elif task_type is TaskType.REGRESSION:
        _require(payload, ("player", "season", "position_median"), "salary input", line_number)
        if not isinstance(payload["position_median"], (int, float)) or payload["position_median"] <= 0:
            raise _err("position_median must be a positive number", line_number)
    else:
        _require(payload, ("tickers", "horizon"), "stock input", line_number)
        tickers = payload["tickers"]
        if (
            not isinstance(tickers, list)
            or not 2 <= len(tickers) <= 10
            or len(set(tickers)) != len(tickers)
            or not all(isinstance(t, str) and t for t in tickers)
        ):
            raise _err("tickers must be 2-10 distinct non-empty strings", line_number)


def _validate_ground_truth(
    task_type: TaskType,
    truth: Mapping[str, Any],
    payload: Mapping[str, Any],
    line_number: int,
) -> None:
    if task_type is TaskType.CLASSIFICATION:
        if truth.get("winner") not in ("petitioner", "respondent"):
            raise _err("ground_truth.winner must be petitioner or respondent", line_number)
    elif task_type is TaskType.REGRESSION:
        salary = truth.get("salary")
        if not isinstance(salary, (int, float)) or salary <= 0:
            raise _err("ground_truth.salary must be a positive number", line_number)
    else:
        ranking = truth.get("ranking")
        if not isinstance(ranking, list) or sorted(ranking) != sorted(payload["tickers"]):
            raise _err(
                "ground_truth.ranking must be a permutation of the input tickers",
                line_number,
            )


def parse_instance(record: Mapping[str, Any], line_number: int = 0) -> TaskInstance:
    if not isinstance(record, Mapping):
        raise _err("each line must be a JSON object", line_number)
    instance_id = record.get("instance_id")
    if not isinstance(instance_id, str) or not instance_id:
        raise _err("instance_id must be a non-empty string", line_number)
    task_type = _detect_task(record, line_number)
    cutoff = _parse_cutoff(record, line_number)
    payload = record.get("input")
    if not isinstance(payload, Mapping):
        raise _err("input must be a JSON object", line_number)
    truth = record.get("ground_truth")
    if not isinstance(truth, Mapping):
        raise _err("ground_truth must be a JSON object", line_number)
    _validate_input(task_type, payload, line_number)
    _validate_ground_truth(task_type, truth, payload, line_number)
    meta: dict[str, Any] = {}
    if "mock" in record:
        if not isinstance(record["mock"], Mapping):
            raise _err("mock must be a JSON object when present", line_number)
        meta["mock"] = dict(record["mock"])
    return TaskInstance(
        instance_id=instance_id,
        task_type=task_type,
        input_payload=dict(payload),
        cutoff_date=cutoff,
        ground_truth=dict(truth),
        meta=meta,
    )


def load_dataset(path: str | Path) -> list[TaskInstance]:
    """Parse one JSONL file, enforcing uniqueness of instance ids."""
    instances: list[TaskInstance] = []
    seen: set[str] = set()
    text = Path(path).read_text(encoding="utf-8")
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise _err(f"invalid JSON: {exc.msg}", line_number) from None
        instance = parse_instance(record, line_number)
        if instance.instance_id in seen:
            raise _err(f"duplicate instance_id {instance.instance_id!r}", line_number)
        seen.add(instance.instance_id)
        instances.append(instance)
    if not instances:
        raise DatasetSchemaError(f"dataset {path} contains no instances")
    return instances


def load_datasets(paths: Iterable[str | Path]) -> list[TaskInstance]:
    """Concatenate several files; ids must stay globally unique."""
    instances: list[TaskInstance] = []
    seen: set[str] = set()
    for path in paths:
        for instance in load_dataset(path):
            if instance.instance_id in seen:
                raise DatasetSchemaError(
                    f"instance_id {instance.instance_id!r} appears in more than one file"
                )
            seen.add(instance.instance_id)
            instances.append(instance)
    return instances
