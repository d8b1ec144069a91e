"""Task-specific characteristic functions over claim coalitions.

The value of a coalition is what the predictor would output given only
those claims:

* classification: probability of the class the full-rationale
  prediction favored; no claims means an uninformed 0.5
* regression: the predicted value; no claims falls back to the
  baseline carried in the task context (for salaries, the position
  median)
* ranking: one minus the rank correlation between the coalition's
  ranking and the full-information ranking; no claims means the
  order-preserving default ranking
"""
from __future__ import annotations

from typing import Any, Callable, Mapping, Optional, Sequence

from timeaudit.claims.models import TaskContext, TaskType
from timeaudit.errors import MissingBaseline
from timeaudit.metrics.performance import spearman
from timeaudit.shapley.coalition import CharacteristicFunction, Coalition

PayloadBackend = Callable[[Coalition], Any]
BulkBackend = Callable[..., Mapping[Coalition, float]]


def ranking_to_ranks(ordered: Sequence[str], canonical: Sequence[str]) -> list[int]:
    """Rank vector over the canonical item order; 1 = ranked best.

    Raises ValueError unless ``ordered`` is a permutation of
    ``canonical``, so incomplete model rankings surface as protocol
    errors upstream.
    """
    position = {item: index + 1 for index, item in enumerate(ordered)}
    if len(position) != len(ordered) or set(position) != set(canonical):
        raise ValueError(
            f"ranking {list(ordered)!r} is not a permutation of {list(canonical)!r}"
        )
    return [position[item] for item in canonical]


def make_characteristic(
    task_type: TaskType,
    ctx: TaskContext,
    full_prediction: Any,
    payload_backend: Optional[PayloadBackend] = None,
    *,
    bulk_backend: Optional[BulkBackend] = None,
    offline: bool = False,
) -> CharacteristicFunction:
    """Build the coalition game for one audited prediction.

    ``payload_backend`` maps a coalition to the raw predicted payload
    (probability, value, or ranking); ``bulk_backend`` does the same for
    many coalitions per call and is what the batched model path plugs
    in. At least one must be given.
    """
    if payload_backend is None and bulk_backend is None:
        raise ValueError("need a payload backend or a bulk backend")

    payload_to_value, empty_default = _task_transform(task_type, ctx, full_prediction)

    evaluator = None
    if payload_backend is not None:
        def evaluator(coalition: Coalition) -> float:  # noqa: F811
            return payload_to_value(payload_backend(coalition))

    bulk_evaluator = None
    if bulk_backend is not None:
        def bulk_evaluator(coalitions: Sequence[Coalition]) -> Mapping[Coalition, float]:  # noqa: F811
            return bulk_backend(
                coalitions,
                payload_to_value=payload_to_value,
                empty_default=empty_default,
            )
        if evaluator is None:
            def evaluator(coalition: Coalition) -> float:  # noqa: F811
                return bulk_evaluator([coalition])[coalition]

    return CharacteristicFunction(
        task_type,
        evaluator,
        empty_default,
        bulk_evaluator=bulk_evaluator,
        offline=offline,
    )


def _task_transform(
    task_type: TaskType, ctx: TaskContext, full_prediction: Any
) -> tuple[Callable[[Any], float], float]:
    if task_type is TaskType.CLASSIFICATION:
        favored_positive = float(full_prediction) >= 0.5

        def to_value(payload: Any) -> float:
            p = float(payload)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
            return p if favored_positive else 1.0 - p

        return to_value, 0.5

    if task_type is TaskType.REGRESSION:
        baseline = ctx.payload.get("position_median")
        if baseline is None:
            raise MissingBaseline(
                "regression game needs a position_median baseline in the task context"
            )
        return float, float(baseline)

    if task_type is TaskType.RANKING:
        canonical = ctx.payload.get("tickers")
        if not canonical:
            raise MissingBaseline("ranking game needs the canonical ticker order")
        canonical = list(canonical)
        full_ranks = ranking_to_ranks(list(full_prediction), canonical)

        def to_value(payload: Any) -> float:
            ranks = ranking_to_ranks(list(payload), canonical)
            return 1.0 - spearman(ranks, full_ranks)

        default_ranks = list(range(1, len(canonical) + 1))
        empty_default = 1.0 - spearman(default_ranks, full_ranks)
        return to_value, empty_default

    raise ValueError(f"unsupported task type: {task_type}")
