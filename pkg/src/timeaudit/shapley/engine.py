"""Exact and Monte-Carlo Shapley attribution over claim coalitions.

Exact enumeration uses the subset-weight form

    phi_i = sum over S not containing i of
            |S|! (n - |S| - 1)! / n! * (v(S + i) - v(S))

and is reserved for small offline games. The Monte-Carlo path samples
whole permutations with replacement from one seeded generator and
harvests every claim's marginal contribution from each permutation, so
m permutations yield m samples per claim. Prefix coalitions flow
through the game's cache: one evaluation per distinct coalition no
matter how many permutations revisit it.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from timeaudit.shapley.coalition import (
    CharacteristicFunction,
    Coalition,
    SamplerConfig,
    ShapleyEstimate,
)
from timeaudit.errors import TooManyClaims


def _claim_ids(claims: Iterable[int]) -> list[int]:
    ids = sorted(set(int(c) for c in claims))
    return ids


def exact_shapley(
    game: CharacteristicFunction,
    claims: Iterable[int],
    *,
    limit: int = 10,
) -> list[ShapleyEstimate]:
    """Exact Shapley values by full subset enumeration.

    Raises TooManyClaims above ``limit`` players; cost is O(n * 2^n).
    """
    ids = _claim_ids(claims)
    n = len(ids)
    if n > limit:
        raise TooManyClaims(f"{n} claims exceeds the exact-enumeration limit of {limit}")
    if n == 0:
        return []

    subsets = [Coalition.of(combo) for combo in _all_subsets(ids)]
    values = game.evaluate_many(subsets)

    fact = [math.factorial(k) for k in range(n + 1)]
    n_fact = fact[n]
    estimates = []
    for claim_id in ids:
        phi = 0.0
        for subset in subsets:
            if claim_id in subset:
                continue
            weight = fact[len(subset)] * fact[n - len(subset) - 1] / n_fact
            phi += weight * (values[subset.with_member(claim_id)] - values[subset])
        estimates.append(
            ShapleyEstimate(
                claim_id=claim_id, phi=phi, std_error=0.0, num_samples=0, method="exact"
            )
        )
    return estimates


def _all_subsets(ids: Sequence[int]) -> Iterable[tuple[int, ...]]:
    n = len(ids)
    for mask in range(1 << n):
        yield tuple(ids[i] for i in range(n) if mask >> i & 1)


def mc_shapley(
    game: CharacteristicFunction,
    claims: Iterable[int],
    cfg: SamplerConfig = SamplerConfig(),
) -> list[ShapleyEstimate]:
    """Permutation-sampling Shapley estimates.

    Deterministic for a fixed seed: the permutation stream, evaluation
    order and float accumulation order are all fixed.
    """
    ids = _claim_ids(claims)
    n = len(ids)
    m = cfg.max_samples
    if n == 0:
        return []

    rng = np.random.default_rng(cfg.random_seed)
    id_array = np.array(ids, dtype=np.int64)
    permutations = [tuple(int(x) for x in rng.permutation(id_array)) for _ in range(m)]

    # Resolve every distinct prefix coalition first so model-backed
    # games can batch them; repeats are cache hits.
    prefix_sets: dict[Coalition, None] = {}
    for perm in permutations:
        running = Coalition.EMPTY
        for claim_id in perm:
            running = running.with_member(claim_id)
            prefix_sets.setdefault(running, None)
    values = game.evaluate_many(list(prefix_sets))
    values[Coalition.EMPTY] = game.empty_coalition_default

    marginals: dict[int, list[float]] = {claim_id: [] for claim_id in ids}
    for perm in permutations:
        running = Coalition.EMPTY
        previous = game.empty_coalition_default
        for claim_id in perm:
            running = running.with_member(claim_id)
            current = values[running]
            marginals[claim_id].append(current - previous)
            previous = current

    estimates = []
    for claim_id in ids:
        samples = marginals[claim_id]
        phi = sum(samples) / m
        if m > 1:
            variance = sum((s - phi) ** 2 for s in samples) / (m - 1)
            std_error = math.sqrt(variance / m)
        else:
            std_error = 0.0
        estimates.append(
            ShapleyEstimate(
                claim_id=claim_id,
                phi=phi,
                std_error=std_error,
                num_samples=m,
                method="monte_carlo",
            )
        )
    return estimates


def compute_shapley(
    game: CharacteristicFunction,
    claims: Iterable[int],
    cfg: SamplerConfig = SamplerConfig(),
) -> list[ShapleyEstimate]:
    """Dispatch: exact for small offline games, Monte-Carlo otherwise.

    Model-backed games always sample, whatever their size; exact
    enumeration would cost 2^n upstream calls.
    """
    ids = _claim_ids(claims)
    if game.offline and len(ids) <= cfg.exact_threshold:
        return exact_shapley(game, ids, limit=cfg.exact_threshold)
    return mc_shapley(game, ids, cfg)
