"""Shapley-value attribution of prediction influence to claims."""
from timeaudit.shapley.batched import (
    BATCHED_RESPONSE_SCHEMA,
    batched_coalition_eval,
    build_batched_request,
)
from timeaudit.shapley.characteristic import make_characteristic, ranking_to_ranks
from timeaudit.shapley.coalition import (
    CharacteristicFunction,
    Coalition,
    SamplerConfig,
    ShapleyEstimate,
    table_game,
)
from timeaudit.shapley.engine import compute_shapley, exact_shapley, mc_shapley

__all__ = [
    "BATCHED_RESPONSE_SCHEMA",
    "CharacteristicFunction",
    "Coalition",
    "SamplerConfig",
    "ShapleyEstimate",
    "batched_coalition_eval",
    "build_batched_request",
    "compute_shapley",
    "exact_shapley",
    "make_characteristic",
    "mc_shapley",
    "ranking_to_ranks",
    "table_game",
]
