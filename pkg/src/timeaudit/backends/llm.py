"""Provider-agnostic language-model call contract.

A request either expects a structured JSON response (validated against
``response_schema``) or offers tool schemas and expects exactly one tool
call back. :func:`lm_call` is the single entry point: it validates,
retries malformed responses a bounded number of times, applies bounded
backoff on rate limits, and writes every attempt to the audit log.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional, Protocol, runtime_checkable

import jsonschema

from timeaudit.backends.audit_log import AuditLog
from timeaudit.errors import LLMProtocolError, RateLimit, SchemaViolation


@dataclass(frozen=True)
class ToolSchema:
    name: str
    description: str
    parameters: Mapping[str, Any]


@dataclass(frozen=True)
class ToolCall:
    name: str
    arguments: Mapping[str, Any]


@dataclass(frozen=True)
class LMRequest:
    system: str
    user: str
    tools: tuple[ToolSchema, ...] = ()
    response_schema: Optional[Mapping[str, Any]] = None
    temperature: float = 0.0
    max_tokens: int = 8000


@dataclass(frozen=True)
class LMResponse:
    text: Optional[str] = None
    tool_call: Optional[ToolCall] = None
    structured: Any = None

    @property
    def kind(self) -> str:
        if self.tool_call is not None:
            return "tool_call"
        if self.structured is not None:
            return "structured"
        return "text"


@runtime_checkable
class LMClient(Protocol):
    def complete(self, request: LMRequest) -> LMResponse: ...


def validate_payload(payload: Any, schema: Mapping[str, Any]) -> None:
    """Raise SchemaViolation if the payload does not match the schema."""
    try:
        jsonschema.validate(payload, dict(schema))
    except jsonschema.ValidationError as exc:
        raise SchemaViolation(exc.message) from exc


def _coerce_structured(response: LMResponse, schema: Mapping[str, Any]) -> Any:
    candidate = response.structured
    if candidate is None and response.text is not None:
        try:
            candidate = json.loads(response.text)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"response is not JSON: {exc}") from exc
    if candidate is None:
        raise SchemaViolation("response carried no structured payload")
    validate_payload(candidate, schema)
    return candidate


def lm_call(
    client: LMClient,
    request: LMRequest,
    *,
    schema_retries: int = 2,
    rate_limit_retries: int = 3,
    backoff_base: float = 0.2,
    backoff_cap: float = 4.0,
    audit: Optional[AuditLog] = None,
    role: str = "lm",
    sleeper: Callable[[float], None] = time.sleep,
    extra_check: Optional[Callable[[LMResponse], None]] = None,
) -> LMResponse:
    """Issue one validated model call.

    ``schema_retries`` bounds re-requests after malformed output;
    ``extra_check`` lets callers add semantic validation (for example
    rationale length) that participates in the same retry budget.
    """
    last_error: Exception | None = None
    for attempt in range(schema_retries + 1):
        response = _complete_with_backoff(
            client, request, rate_limit_retries, backoff_base, backoff_cap, sleeper
        )
        if audit is not None:
            audit.record(
                "lm_call",
                role=role,
                attempt=attempt,
                system=request.system,
                user=request.user,
                response=_response_payload(response),
            )
        try:
            response = _validated(response, request)
            if extra_check is not None:
                extra_check(response)
            return response
        except SchemaViolation as exc:
            last_error = exc
    raise LLMProtocolError(
        f"model output failed validation after {schema_retries + 1} attempts: {last_error}"
    )


def _validated(response: LMResponse, request: LMRequest) -> LMResponse:
    if request.response_schema is not None:
        structured = _coerce_structured(response, request.response_schema)
        return LMResponse(text=response.text, tool_call=response.tool_call, structured=structured)
    if request.tools:
        call = response.tool_call
        if call is None:
            raise SchemaViolation("expected a tool call, got plain text")
        by_name = {tool.name: tool for tool in request.tools}
        if call.name not in by_name:
            raise SchemaViolation(f"unknown tool: {call.name}")
        validate_payload(dict(call.arguments), by_name[call.name].parameters)
    return response


def _complete_with_backoff(
    client: LMClient,
    request: LMRequest,
    rate_limit_retries: int,
    backoff_base: float,
    backoff_cap: float,
    sleeper: Callable[[float], None],
) -> LMResponse:
    for attempt in range(rate_limit_retries + 1):
        try:
            return client.complete(request)
        except RateLimit:
            if attempt == rate_limit_retries:
                raise
            sleeper(min(backoff_base * (2**attempt), backoff_cap))
    raise AssertionError("unreachable")


def _response_payload(response: LMResponse) -> dict:
    payload: dict[str, Any] = {"kind": response.kind}
    if response.text is not None:
        payload["text"] = response.text
    if response.tool_call is not None:
        payload["tool_call"] = {
            "name": response.tool_call.name,
            "arguments": dict(response.tool_call.arguments),
        }
    if response.structured is not None:
        payload["structured"] = response.structured
    return payload
