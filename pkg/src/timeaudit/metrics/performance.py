"""Task performance measures and faithfulness distances.

All of these are tiny closed-form expressions; they are written out
directly so each one can be checked against an independent
re-implementation to machine precision.
"""
from __future__ import annotations

from typing import Sequence

from timeaudit.errors import (
    InvalidPermutation,
    LengthMismatch,
    NonpositiveGroundTruth,
    OutOfRangeProbability,
    ZeroOriginal,
)


def brier(p_hat: float, outcome: int) -> float:
    """Squared error of a probability against a binary outcome."""
    if not 0.0 <= p_hat <= 1.0:
        raise OutOfRangeProbability(f"probability {p_hat} outside [0, 1]")
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    return (p_hat - outcome) ** 2


def relative_error(y_hat: float, y: float) -> float:
    """|y_hat - y| / y for a positive ground truth."""
    if y <= 0:
        raise NonpositiveGroundTruth(f"ground truth must be > 0, got {y}")
    if y_hat < 0:
        raise ValueError(f"prediction must be >= 0, got {y_hat}")
    return abs(y_hat - y) / y


def _check_permutation(ranks: Sequence[int], name: str) -> None:
    n = len(ranks)
    if n < 2:
        raise InvalidPermutation(f"{name} needs at least 2 ranks, got {n}")
    if sorted(ranks) != list(range(1, n + 1)):
        raise InvalidPermutation(f"{name} is not a tie-free permutation of 1..{n}")


def spearman(pred_rank: Sequence[int], true_rank: Sequence[int]) -> float:
    """Rank correlation: 1 - 6 * sum(d^2) / (n (n^2 - 1)).

    Both inputs must be tie-free permutations of 1..n; tied ranks are a
    validation error, not a tie-corrected value.
    """
    if len(pred_rank) != len(true_rank):
        raise LengthMismatch(
            f"rank vectors differ in length: {len(pred_rank)} vs {len(true_rank)}"
        )
    _check_permutation(pred_rank, "pred_rank")
    _check_permutation(true_rank, "true_rank")
    n = len(pred_rank)
    d_squared = sum((p - t) ** 2 for p, t in zip(pred_rank, true_rank))
    return 1.0 - 6.0 * d_squared / (n * (n * n - 1))


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def kendall_relative(pred_rank: Sequence[int], orig_rank: Sequence[int]) -> float:
    """Fraction of item pairs ordered differently by the two rankings."""
    if len(pred_rank) != len(orig_rank):
        raise LengthMismatch(
            f"rank vectors differ in length: {len(pred_rank)} vs {len(orig_rank)}"
        )
    n = len(pred_rank)
    if n < 2:
        raise LengthMismatch(f"need at least 2 ranks, got {n}")
    discordant = 0
    for j in range(n):
        for k in range(j + 1, n):
            if _sign(pred_rank[j] - pred_rank[k]) != _sign(orig_rank[j] - orig_rank[k]):
                discordant += 1
    return discordant / (n * (n - 1) // 2)


def mre(originals: Sequence[float], repredictions: Sequence[float]) -> float:
    """Mean relative deviation of repredictions from original values."""
    if len(originals) != len(repredictions):
        raise LengthMismatch(
            f"sequences differ in length: {len(originals)} vs {len(repredictions)}"
        )
    if not originals:
        raise LengthMismatch("need at least one prediction pair")
    total = 0.0
    for original, repredicted in zip(originals, repredictions):
        if original == 0:
            raise ZeroOriginal("original prediction of 0 makes relative error undefined")
        total += abs(original - repredicted) / abs(original)
    return total / len(originals)
