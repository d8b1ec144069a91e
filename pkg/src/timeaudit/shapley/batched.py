"""Batched coalition evaluation over the claim-id reference format.

One model call evaluates up to ``batch_size`` coalitions: the claims
are listed once by id, each coalition becomes one ``SET k: [ids]``
line, and the model answers with a JSON array of ``{"set": k, "p":
...}`` objects, one per set. Chunks run concurrently up to the
configured in-flight limit. The empty coalition never reaches the
model; it resolves to the game default locally.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, MutableMapping, Optional, Sequence

from timeaudit.backends.audit_log import AuditLog
from timeaudit.backends.llm import LMClient, LMRequest, lm_call
from timeaudit.claims.models import ExtractedClaim, TaskContext
from timeaudit.errors import LLMProtocolError
from timeaudit.prompts import render_template
from timeaudit.shapley.coalition import Coalition, SamplerConfig

BATCHED_RESPONSE_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["set", "p"],
        "properties": {"set": {"type": "integer", "minimum": 1}},
    },
}


def build_batched_request(
    claims: Sequence[ExtractedClaim],
    chunk: Sequence[Coalition],
    ctx: TaskContext,
) -> LMRequest:
    claims_block = "\n".join(f"[{c.claim_id}] {c.claim_text}" for c in claims)
    sets_block = "\n".join(
        f"SET {k}: [{', '.join(str(i) for i in coalition)}]"
        for k, coalition in enumerate(chunk, start=1)
    )
    return LMRequest(
        system=render_template("shapley_batched_system"),
        user=render_template(
            "shapley_batched_user",
            task_context=ctx.header(),
            claims_block=claims_block,
            sets_block=sets_block,
            num_sets=len(chunk),
        ),
        response_schema=BATCHED_RESPONSE_SCHEMA,
        max_tokens=8000,
    )


def batched_coalition_eval(
    claims: Sequence[ExtractedClaim],
    coalitions: Sequence[Coalition],
    ctx: TaskContext,
    llm: LMClient,
    cfg: SamplerConfig = SamplerConfig(),
    *,
    empty_default: float = 0.0,
    payload_to_value: Callable[[Any], float] = float,
    cache: Optional[MutableMapping[Coalition, float]] = None,
    retries: int = 2,
    audit: Optional[AuditLog] = None,
) -> dict[Coalition, float]:
    """Evaluate many coalitions with as few model calls as possible.

    Duplicates collapse to one evaluation; previously cached coalitions
    are never re-sent. A chunk whose response stays malformed after
    ``retries`` re-requests raises LLMProtocolError naming the input
    positions left unresolved.
    """
    known_ids = {c.claim_id for c in claims}
    for coalition in coalitions:
        stray = [i for i in coalition if i not in known_ids]
        if stray:
            raise ValueError(f"coalition references unknown claim ids: {stray}")

    resolved: dict[Coalition, float] = {} if cache is None else cache
    ordered_unique = list(dict.fromkeys(coalitions))
    pending = []
    for coalition in ordered_unique:
        if coalition in resolved:
            continue
        if coalition.is_empty:
            resolved[coalition] = float(empty_default)
        else:
            pending.append(coalition)

    chunks = [
        pending[start : start + cfg.batch_size]
        for start in range(0, len(pending), cfg.batch_size)
    ]

    def _evaluate_chunk(chunk: Sequence[Coalition]) -> dict[Coalition, float]:
        request = build_batched_request(claims, chunk, ctx)
        failure = "no attempt"
        for _ in range(retries + 1):
            try:
                response = lm_call(
                    llm, request, schema_retries=0, audit=audit, role="shapley_batch"
                )
            except LLMProtocolError as exc:
                failure = str(exc)
                continue
            values, failure = _parse_chunk(response.structured, chunk, payload_to_value)
            if failure is None:
                return values
        positions = tuple(
            index
            for index, coalition in enumerate(coalitions)
            if coalition in set(chunk)
        )
        raise LLMProtocolError(
            f"batched evaluation failed after {retries + 1} attempts: {failure}",
            missing_indices=positions,
        )

    if chunks:
        workers = max(1, min(cfg.max_concurrency, len(chunks)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for chunk, values in zip(chunks, pool.map(_evaluate_chunk, chunks)):
                resolved.update(values)

    return {coalition: resolved[coalition] for coalition in coalitions}


def _parse_chunk(
    entries: list,
    chunk: Sequence[Coalition],
    payload_to_value: Callable[[Any], float],
) -> tuple[dict[Coalition, float], Optional[str]]:
    if len(entries) != len(chunk):
        return {}, f"expected {len(chunk)} entries, got {len(entries)}"
    seen: dict[int, Any] = {}
    for entry in entries:
        index = entry["set"]
        if index in seen:
            return {}, f"duplicate set index {index}"
        if not 1 <= index <= len(chunk):
            return {}, f"set index {index} out of range"
        seen[index] = entry["p"]
    values = {}
    for k, coalition in enumerate(chunk, start=1):
        try:
            value = float(payload_to_value(seen[k]))
        except (TypeError, ValueError) as exc:
            return {}, f"set {k}: bad payload ({exc})"
        if not math.isfinite(value):
            return {}, f"set {k}: non-finite value"
        values[coalition] = value
    return values, None
