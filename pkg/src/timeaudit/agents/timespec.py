"""Multi-phase cutoff-compliant forecaster.

Pipeline: generate a searched draft, audit its rationale claim by claim,
regenerate once from the validated remainder if violations were found,
re-audit, then synthesize a final prediction under a closed-world prompt
that contains only validated material. The aggregator prompt is checked
mechanically: text of any violated claim appearing in it is a hard error.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from timeaudit.agents.tasks import (
    SEARCH_TOOL,
    build_task_context,
    prediction_from_args,
    profile_for,
)
from timeaudit.agents.toolloop import HandlerResult, LoopState, run_tool_loop
from timeaudit.agents.types import (
    Prediction,
    SearchHistory,
    SearchQueryRecord,
    TaskInstance,
    TimeSPECTrace,
)
from timeaudit.backends.audit_log import AuditLog
from timeaudit.backends.caching import NamespacedCache
from timeaudit.backends.llm import LMClient, LMRequest, lm_call
from timeaudit.backends.search import SearchClient, SearchRequest, SearchResult, run_search
from timeaudit.claims.extraction import extract_claims
from timeaudit.claims.models import ExtractedClaim
from timeaudit.errors import ClosedWorldViolation, SchemaViolation
from timeaudit.leakage.detector import detect_leakage
from timeaudit.leakage.types import LeakageVerdict
from timeaudit.leakage.verification import VerificationPolicy
from timeaudit.prompts import render_template


@dataclass(frozen=True)
class TimeSPECConfig:
    min_search_results: int = 10
    max_tool_iterations: int = 15
    results_per_query: int = 5
    schema_retries: int = 2

    def __post_init__(self) -> None:
        if self.min_search_results < 0 or self.max_tool_iterations < 1:
            raise ValueError("search budget out of range")


@dataclass(frozen=True)
class SupervisionResult:
    """Claim-level audit of one rationale."""

    claims: tuple[ExtractedClaim, ...]
    verdicts: tuple[LeakageVerdict, ...]

    def __post_init__(self) -> None:
        if len(self.claims) != len(self.verdicts):
            raise ValueError("one verdict per claim required")

    @property
    def valid(self) -> tuple[ExtractedClaim, ...]:
        return tuple(c for c, v in zip(self.claims, self.verdicts) if not v.leaked)

    @property
    def violated(self) -> tuple[ExtractedClaim, ...]:
        return tuple(c for c, v in zip(self.claims, self.verdicts) if v.leaked)

    def verdict_for(self, claim: ExtractedClaim) -> LeakageVerdict:
        for c, v in zip(self.claims, self.verdicts):
            if c.claim_id == claim.claim_id:
                return v
        raise KeyError(claim.claim_id)


def render_claim_line(claim: ExtractedClaim, verdict: Optional[LeakageVerdict]) -> str:
    """Canonical single-line claim rendering used by downstream prompts."""
    line = f"[{claim.category}] {claim.claim_text}"
    if (
        verdict is not None
        and verdict.basis == "date_comparison"
        and verdict.determination is not None
        and verdict.determination.date is not None
    ):
        line += f" (verified: {verdict.determination.date.isoformat()})"
    return line


def _render_results(results: Sequence[SearchResult]) -> str:
    if not results:
        return "(none)"
    lines = []
    for r in results:
        pub = r.publication_date.isoformat() if r.publication_date else "undated"
        lines.append(f"- {r.title} ({pub}): {r.snippet}")
    return "\n".join(lines)


def _search_handler(
    instance: TaskInstance,
    search_client: SearchClient,
    cfg: TimeSPECConfig,
    history: SearchHistory,
    *,
    rejected_queries: frozenset[str] = frozenset(),
    cache: Optional[NamespacedCache] = None,
    audit: Optional[AuditLog] = None,
):
    def handle(args, state: LoopState) -> HandlerResult:
        query = str(args["query"])
        if query in rejected_queries:
            return HandlerResult(
                kind="error",
                payload=f"query {query!r} was already issued earlier; try a new angle",
            )
        results = run_search(
            search_client,
            SearchRequest(
                query=query,
                before_date=instance.cutoff_date,
                max_results=cfg.results_per_query,
            ),
            cache=cache,
            role="generator",
            audit=audit,
        )
        history.add(
            SearchQueryRecord(
                query=query, purpose=str(args.get("purpose", "")), results=tuple(results)
            )
        )
        return HandlerResult(
            kind="result",
            payload={
                "results": [r.to_json_dict() for r in results],
                "dated_results_so_far": history.result_count,
            },
        )

    return handle


def _draft_handler(instance: TaskInstance, cfg: TimeSPECConfig, history: SearchHistory):
    profile = profile_for(instance.task_type)

    def handle(args, state: LoopState) -> HandlerResult:
        # Enforce the evidence floor, but never strand the loop: the last
        # iteration accepts whatever is on the table.
        if history.result_count < cfg.min_search_results and not state.is_last:
            return HandlerResult(
                kind="error",
                payload=(
                    f"need at least {cfg.min_search_results} dated pre-cutoff results "
                    f"before drafting; currently have {history.result_count}. Keep searching."
                ),
            )
        try:
            prediction_from_args(
                profile, instance, args, value_key="prediction", rationale_key="rationale"
            )
        except SchemaViolation as exc:
            return HandlerResult(kind="error", payload=str(exc))
        return HandlerResult(kind="accept")

    return handle


def timespec_generate(
    instance: TaskInstance,
    llm: LMClient,
    search_client: SearchClient,
    cfg: TimeSPECConfig,
    *,
    cache: Optional[NamespacedCache] = None,
    audit: Optional[AuditLog] = None,
) -> tuple[Prediction, SearchHistory]:
    """Search-grounded draft under a hard result floor."""
    profile = profile_for(instance.task_type)
    cutoff = instance.cutoff_date.isoformat()
    system = render_template(
        "generator_system",
        domain_role=profile.domain_role,
        cutoff_date=cutoff,
        domain_data=profile.domain_data,
    )
    user = render_template(
        "generator_user",
        task_instruction=profile.task_instruction,
        cutoff_date=cutoff,
        input_json=instance.input_json,
    )
    history = SearchHistory()
    outcome = run_tool_loop(
        llm,
        system=system,
        user=user,
        tools=(SEARCH_TOOL, profile.draft_tool()),
        handlers={
            "search_information": _search_handler(
                instance, search_client, cfg, history, cache=cache, audit=audit
            ),
            "submit_draft_prediction": _draft_handler(instance, cfg, history),
        },
        max_iterations=cfg.max_tool_iterations,
        schema_retries=cfg.schema_retries,
        audit=audit,
        role="generator",
    )
    prediction = prediction_from_args(
        profile, instance, outcome.submission, value_key="prediction", rationale_key="rationale"
    )
    return prediction, history


def timespec_supervise(
    prediction: Prediction,
    instance: TaskInstance,
    llm: LMClient,
    search_client: SearchClient,
    *,
    policy: VerificationPolicy = VerificationPolicy(),
    cache: Optional[NamespacedCache] = None,
    audit: Optional[AuditLog] = None,
) -> SupervisionResult:
    """Decompose the rationale and date every checkable claim."""
    ctx = build_task_context(instance)
    claims = extract_claims(prediction.rationale, ctx, llm, audit=audit)
    verdicts = detect_leakage(
        claims, ctx, search_client, llm, policy=policy, cache=cache, audit=audit
    )
    return SupervisionResult(claims=tuple(claims), verdicts=tuple(verdicts))


def timespec_regenerate(
    instance: TaskInstance,
    supervision: SupervisionResult,
    generation_history: SearchHistory,
    llm: LMClient,
    search_client: SearchClient,
    cfg: TimeSPECConfig,
    *,
    cache: Optional[NamespacedCache] = None,
    audit: Optional[AuditLog] = None,
) -> tuple[Prediction, SearchHistory]:
    """One repair pass: rebuild the prediction from validated material only.

    Previously issued queries are rejected so the repair explores new
    angles; fresh searches stay cutoff-bounded.
    """
    profile = profile_for(instance.task_type)
    cutoff = instance.cutoff_date.isoformat()
    valid_lines = [
        render_claim_line(c, supervision.verdict_for(c)) for c in supervision.valid
    ]
    previous_queries = generation_history.queries
    system = render_template("regenerator_system", cutoff_date=cutoff)
    user = render_template(
        "regenerator_user",
        case_input=instance.input_json,
        cutoff_date=cutoff,
        valid_claims="\n".join(valid_lines) if valid_lines else "(none)",
        valid_searches=_render_results(generation_history.all_results()),
        previous_queries="\n".join(f"- {q}" for q in previous_queries) or "(none)",
    )
    history = SearchHistory()
    outcome = run_tool_loop(
        llm,
        system=system,
        user=user,
        tools=(SEARCH_TOOL, profile.draft_tool()),
        handlers={
            "search_information": _search_handler(
                instance,
                search_client,
                cfg,
                history,
                rejected_queries=frozenset(previous_queries),
                cache=cache,
                audit=audit,
            ),
            # No evidence floor here: Layer 1/2 context already carries
            # the validated material, so an immediate draft is legal.
            "submit_draft_prediction": _draft_handler(
                instance, TimeSPECConfig(min_search_results=0), history
            ),
        },
        max_iterations=cfg.max_tool_iterations,
        schema_retries=cfg.schema_retries,
        audit=audit,
        role="regenerator",
    )
    prediction = prediction_from_args(
        profile, instance, outcome.submission, value_key="prediction", rationale_key="rationale"
    )
    return prediction, history


def timespec_aggregate(
    instance: TaskInstance,
    validated: Sequence[tuple[ExtractedClaim, Optional[LeakageVerdict]]],
    llm: LMClient,
    cfg: TimeSPECConfig,
    *,
    audit: Optional[AuditLog] = None,
) -> tuple[Prediction, str]:
    """Closed-world synthesis over validated claims only.

    Returns the final prediction and the exact user prompt that produced
    it, so callers can assert the closed world mechanically.
    """
    profile = profile_for(instance.task_type)
    claim_lines = [render_claim_line(c, v) for c, v in validated]
    user = render_template(
        "aggregator_user",
        case_input=instance.input_json,
        cutoff_date=instance.cutoff_date.isoformat(),
        valid_claims="\n".join(claim_lines) if claim_lines else "(none)",
    )
    system = render_template("aggregator_system")
    tool = profile.final_tool()

    def check(response) -> None:
        call = response.tool_call
        if call is None:
            return
        prediction_from_args(
            profile, instance, call.arguments, value_key="prediction", rationale_key="rationale"
        )

    response = lm_call(
        llm,
        LMRequest(system=system, user=user, tools=(tool,), max_tokens=4000),
        schema_retries=cfg.schema_retries,
        audit=audit,
        role="aggregator",
        extra_check=check,
    )
    assert response.tool_call is not None
    prediction = prediction_from_args(
        profile,
        instance,
        response.tool_call.arguments,
        value_key="prediction",
        rationale_key="rationale",
    )
    return prediction, user


def _assert_closed_world(
    prompt: str, violated: Sequence[ExtractedClaim]
) -> None:
    for claim in violated:
        if claim.claim_text and claim.claim_text in prompt:
            raise ClosedWorldViolation(
                f"violated claim {claim.claim_id} leaked into the synthesis prompt: "
                f"{claim.claim_text!r}"
            )


def run_timespec(
    instance: TaskInstance,
    llm: LMClient,
    search_client: SearchClient,
    *,
    cfg: TimeSPECConfig = TimeSPECConfig(),
    policy: VerificationPolicy = VerificationPolicy(),
    cache: Optional[NamespacedCache] = None,
    audit: Optional[AuditLog] = None,
) -> tuple[Prediction, TimeSPECTrace]:
    """End-to-end run; at most one regeneration pass."""
    trace = TimeSPECTrace(instance_id=instance.instance_id)

    draft, gen_history = timespec_generate(
        instance, llm, search_client, cfg, cache=cache, audit=audit
    )
    trace.draft = draft
    trace.generation_history = gen_history

    sup1 = timespec_supervise(
        draft, instance, llm, search_client, policy=policy, cache=cache, audit=audit
    )
    trace.draft_claims = sup1.claims
    trace.verdicts_1 = sup1.verdicts
    trace.valid_1 = sup1.valid
    trace.violated_1 = sup1.violated

    validated: list[tuple[ExtractedClaim, Optional[LeakageVerdict]]] = [
        (c, sup1.verdict_for(c)) for c in sup1.valid
    ]
    violated_texts = {c.claim_text for c in sup1.violated}

    if sup1.violated:
        regenerated, regen_history = timespec_regenerate(
            instance, sup1, gen_history, llm, search_client, cfg, cache=cache, audit=audit
        )
        trace.regenerated = regenerated
        trace.regeneration_history = regen_history
        trace.regenerations = 1

        sup2 = timespec_supervise(
            regenerated, instance, llm, search_client, policy=policy, cache=cache, audit=audit
        )
        trace.regenerated_claims = sup2.claims
        trace.verdicts_2 = sup2.verdicts
        trace.valid_2 = sup2.valid
        trace.violated_2 = sup2.violated
        trace.persistent_violations = sup2.violated

        seen = {c.claim_text for c in sup1.valid}
        violated_texts |= {c.claim_text for c in sup2.violated}
        for claim in sup2.valid:
            if claim.claim_text not in seen:
                validated.append((claim, sup2.verdict_for(claim)))
                seen.add(claim.claim_text)

    # Text violated in either pass never reaches the synthesis prompt,
    # even if the other pass considered an identical sentence valid.
    validated = [(c, v) for c, v in validated if c.claim_text not in violated_texts]

    final, aggregator_prompt = timespec_aggregate(
        instance, validated, llm, cfg, audit=audit
    )
    _assert_closed_world(aggregator_prompt, trace.violated_1 + trace.persistent_violations)
    trace.final = final
    trace.aggregator_prompt = aggregator_prompt
    return final, trace
