"""Generic transcript-based tool loop for agent phases.

The model sees the base prompt plus a growing transcript of tool results.
Each iteration issues exactly one tool call; handlers decide whether the
call yields a result, an error message, or terminates the loop.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Mapping, Optional

from timeaudit.backends.audit_log import AuditLog
from timeaudit.backends.llm import LMClient, LMRequest, ToolSchema, lm_call
from timeaudit.errors import ToolLoopExhausted


@dataclass(frozen=True)
class LoopState:
    """Loop position handed to handlers; lets them grant last-chance passes."""

    iteration: int
    max_iterations: int

    @property
    def is_last(self) -> bool:
        return self.iteration >= self.max_iterations


@dataclass(frozen=True)
class HandlerResult:
    kind: Literal["result", "error", "accept"]
    payload: Any = None


Handler = Callable[[Mapping[str, Any], LoopState], HandlerResult]


@dataclass
class ToolLoopOutcome:
    submission: Mapping[str, Any]
    submitted_tool: str
    iterations: int
    transcript: str
    events: list[str] = field(default_factory=list)


def run_tool_loop(
    llm: LMClient,
    *,
    system: str,
    user: str,
    tools: tuple[ToolSchema, ...],
    handlers: Mapping[str, Handler],
    max_iterations: int,
    schema_retries: int = 2,
    max_tokens: int = 4000,
    audit: Optional[AuditLog] = None,
    role: str = "toolloop",
) -> ToolLoopOutcome:
    """Drive the model until a handler accepts a submission.

    Raises ToolLoopExhausted when the budget runs out without acceptance.
    """
    transcript = user
    events: list[str] = []
    for iteration in range(1, max_iterations + 1):
        state = LoopState(iteration=iteration, max_iterations=max_iterations)
        request = LMRequest(system=system, user=transcript, tools=tools, max_tokens=max_tokens)
        response = lm_call(
            llm, request, schema_retries=schema_retries, audit=audit, role=role
        )
        call = response.tool_call
        assert call is not None  # lm_call enforces a valid tool call when tools are set
        outcome = handlers[call.name](call.arguments, state)
        if outcome.kind == "accept":
            return ToolLoopOutcome(
                submission=call.arguments,
                submitted_tool=call.name,
                iterations=iteration,
                transcript=transcript,
                events=events,
            )
        tag = "tool_result" if outcome.kind == "result" else "tool_error"
        rendered = (
            outcome.payload
            if isinstance(outcome.payload, str)
            else json.dumps(outcome.payload, default=str)
        )
        event = f"[{tag} {call.name}] {rendered}"
        events.append(event)
        transcript = f"{transcript}\n\n{event}"
        if audit is not None:
            audit.record("tool_event", role=role, tool=call.name, outcome=outcome.kind)
    raise ToolLoopExhausted(
        f"no accepted submission within {max_iterations} iterations", history=tuple(events)
    )
