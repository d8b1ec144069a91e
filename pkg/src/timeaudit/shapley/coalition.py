"""Coalition game primitives for claim-level attribution."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, ClassVar, Iterable, Iterator, Literal, Mapping, Optional, Sequence

from timeaudit.claims.models import TaskType
from timeaudit.errors import EvaluatorError


@dataclass(frozen=True, order=True)
class Coalition:
    """Canonical subset of claim ids: sorted, deduplicated, hashable."""

    members: tuple[int, ...] = ()

    EMPTY: ClassVar["Coalition"]

    @classmethod
    def of(cls, ids: Iterable[int]) -> "Coalition":
        return cls(tuple(sorted(set(ids))))

    def with_member(self, claim_id: int) -> "Coalition":
        if claim_id in self.members:
            return self
        return Coalition(tuple(sorted(self.members + (claim_id,))))

    @property
    def is_empty(self) -> bool:
        return not self.members

    def __contains__(self, claim_id: int) -> bool:
        return claim_id in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)


Coalition.EMPTY = Coalition(())


@dataclass(frozen=True)
class SamplerConfig:
    """Attribution sampling knobs; defaults mirror the audit pipeline."""

    max_samples: int = 100
    random_seed: int = 42
    batch_size: int = 256
    max_concurrency: int = 10
    exact_threshold: int = 10

    def __post_init__(self) -> None:
        for name in ("max_samples", "batch_size", "max_concurrency", "exact_threshold"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class ShapleyEstimate:
    claim_id: int
    phi: float
    std_error: float
    num_samples: int
    method: Literal["exact", "monte_carlo"]

    def __post_init__(self) -> None:
        if self.std_error < 0:
            raise ValueError("std_error must be >= 0")
        if self.method == "exact" and self.std_error != 0.0:
            raise ValueError("exact estimates carry zero std_error")
        if self.method == "monte_carlo" and self.num_samples < 1:
            raise ValueError("monte_carlo estimates need num_samples >= 1")

    def to_json_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "phi": self.phi,
            "std_error": self.std_error,
            "num_samples": self.num_samples,
            "method": self.method,
        }


class CharacteristicFunction:
    """Caching wrapper around a coalition value oracle.

    The empty coalition always resolves to ``empty_coalition_default``
    without touching the evaluator. Every distinct non-empty coalition
    is evaluated exactly once; repeats are cache hits. A bulk evaluator,
    when provided, resolves many coalitions per upstream call (used for
    batched model-backed games).
    """

    def __init__(
        self,
        task_type: TaskType,
        evaluator: Callable[[Coalition], float],
        empty_coalition_default: float,
        *,
        bulk_evaluator: Optional[
            Callable[[Sequence[Coalition]], Mapping[Coalition, float]]
        ] = None,
        offline: bool = False,
    ):
        self.task_type = task_type
        self._evaluator = evaluator
        self._bulk_evaluator = bulk_evaluator
        self.empty_coalition_default = _checked(empty_coalition_default, Coalition.EMPTY)
        self.offline = offline
        self._lock = threading.Lock()
        self._cache: dict[Coalition, float] = {Coalition.EMPTY: self.empty_coalition_default}
        self.num_evaluations = 0

    def evaluate(self, coalition: Coalition) -> float:
        with self._lock:
            if coalition in self._cache:
                return self._cache[coalition]
        value = _checked(self._evaluator(coalition), coalition)
        with self._lock:
            if coalition not in self._cache:
                self._cache[coalition] = value
                self.num_evaluations += 1
            return self._cache[coalition]

    def evaluate_many(self, coalitions: Sequence[Coalition]) -> dict[Coalition, float]:
        """Resolve coalitions, batching the cache misses when possible."""
        with self._lock:
            missing = [c for c in dict.fromkeys(coalitions) if c not in self._cache]
        if missing:
            if self._bulk_evaluator is not None:
                fresh = self._bulk_evaluator(missing)
                with self._lock:
                    for coalition in missing:
                        if coalition not in fresh:
                            raise EvaluatorError(f"bulk evaluator skipped {coalition}")
                        if coalition not in self._cache:
                            self._cache[coalition] = _checked(fresh[coalition], coalition)
                            self.num_evaluations += 1
            else:
                for coalition in missing:
                    self.evaluate(coalition)
        with self._lock:
            return {c: self._cache[c] for c in coalitions}

    @property
    def cache_size(self) -> int:
        with self._lock:
            return len(self._cache)


def _checked(value: float, coalition: Coalition) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise EvaluatorError(f"non-finite value {value!r} for coalition {coalition}")
    return value


def table_game(
    task_type: TaskType,
    values: Mapping[Coalition, float],
    empty_default: Optional[float] = None,
) -> CharacteristicFunction:
    """Offline game defined by an explicit coalition-value table."""
    default = values.get(Coalition.EMPTY, 0.0) if empty_default is None else empty_default

    def _lookup(coalition: Coalition) -> float:
        try:
            return values[coalition]
        except KeyError:
            raise EvaluatorError(f"no table entry for {coalition}") from None

    return CharacteristicFunction(task_type, _lookup, default, offline=True)
