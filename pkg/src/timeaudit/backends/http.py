"""Thin HTTP adapters for live model and search providers.

Which provider sits behind an endpoint is pure configuration; nothing
here or elsewhere in the library names one. Credentials come from the
environment variable the config points at, never from config values.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Any, Mapping, Optional

import httpx

from timeaudit.backends.llm import LMRequest, LMResponse, ToolCall
from timeaudit.backends.search import SearchRequest, SearchResult
from timeaudit.errors import ConfigError, RateLimit, TransportError


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str
    model: str = ""
    api_key_env: str = ""
    timeout_s: float = 60.0
    headers: Mapping[str, str] = field(default_factory=dict)

    def resolved_headers(self, env: Mapping[str, str] | None = None) -> dict[str, str]:
        env = os.environ if env is None else env
        headers = {"content-type": "application/json", **self.headers}
        if self.api_key_env:
            key = env.get(self.api_key_env)
            if not key:
                raise ConfigError(
                    f"credential env var {self.api_key_env} is not set"
                )
            headers["authorization"] = f"Bearer {key}"
        return headers


def load_provider_config(
    path: Path, section: str, env: Mapping[str, str] | None = None
) -> ProviderConfig:
    """Read one provider section from a JSON config file.

    Environment overrides use the pattern TIMEAUDIT_<SECTION>_<FIELD>,
    for example TIMEAUDIT_LM_ENDPOINT.
    """
    env = os.environ if env is None else env
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read provider config {path}: {exc}") from exc
    block = raw.get(section)
    if not isinstance(block, dict):
        raise ConfigError(f"provider config has no {section!r} section")
    merged = dict(block)
    for fieldname in ("endpoint", "model", "api_key_env"):
        override = env.get(f"TIMEAUDIT_{section.upper()}_{fieldname.upper()}")
        if override:
            merged[fieldname] = override
    try:
        return ProviderConfig(
            endpoint=merged["endpoint"],
            model=merged.get("model", ""),
            api_key_env=merged.get("api_key_env", ""),
            timeout_s=float(merged.get("timeout_s", 60.0)),
            headers=dict(merged.get("headers", {})),
        )
    except KeyError as exc:
        raise ConfigError(f"provider config missing field: {exc}") from exc


class ChatCompletionsLM:
    """LMClient over a chat-completions style HTTP endpoint."""

    def __init__(self, config: ProviderConfig, transport: Optional[httpx.BaseTransport] = None):
        self.config = config
        self._client = httpx.Client(
            transport=transport, timeout=config.timeout_s
        )

    def complete(self, request: LMRequest) -> LMResponse:
        payload: dict[str, Any] = {
            "model": self.config.model,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
        }
        if request.tools:
            payload["tools"] = [
                {
                    "type": "function",
                    "function": {
                        "name": tool.name,
                        "description": tool.description,
                        "parameters": dict(tool.parameters),
                    },
                }
                for tool in request.tools
            ]
        if request.response_schema is not None:
            payload["response_format"] = {"type": "json_object"}
        body = self._post(payload)
        return _parse_chat_response(body)

    def _post(self, payload: dict) -> dict:
        try:
            response = self._client.post(
                self.config.endpoint,
                json=payload,
                headers=self.config.resolved_headers(),
            )
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        if response.status_code == 429:
            raise RateLimit("429 from model endpoint")
        if response.status_code >= 400:
            raise TransportError(
                f"model endpoint returned {response.status_code}: {response.text[:300]}"
            )
        return response.json()


def _parse_chat_response(body: Mapping[str, Any]) -> LMResponse:
    try:
        message = body["choices"][0]["message"]
    except (KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"malformed completion body: {exc}") from exc
    tool_calls = message.get("tool_calls") or []
    if tool_calls:
        call = tool_calls[0]["function"]
        try:
            arguments = json.loads(call.get("arguments") or "{}")
        except json.JSONDecodeError:
            arguments = {}
        return LMResponse(tool_call=ToolCall(name=call["name"], arguments=arguments))
    return LMResponse(text=message.get("content"))


class HTTPSearchClient:
    """SearchClient over a simple JSON search endpoint."""

    def __init__(self, config: ProviderConfig, transport: Optional[httpx.BaseTransport] = None):
        self.config = config
        self._client = httpx.Client(transport=transport, timeout=config.timeout_s)

    def search(self, request: SearchRequest) -> list[SearchResult]:
        params: dict[str, Any] = {"q": request.query, "limit": request.max_results}
        if request.before_date is not None:
            params["before"] = request.before_date.isoformat()
        try:
            response = self._client.get(
                self.config.endpoint, params=params, headers=self.config.resolved_headers()
            )
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        if response.status_code == 429:
            raise RateLimit("429 from search endpoint")
        if response.status_code >= 400:
            raise TransportError(f"search endpoint returned {response.status_code}")
        body = response.json()
        results = []
        for item in body.get("results", []):
            pub = item.get("publication_date")
            results.append(
                SearchResult(
                    url=item.get("url", ""),
                    title=item.get("title", ""),
                    snippet=item.get("snippet", ""),
                    publication_date=date.fromisoformat(pub) if pub else None,
                )
            )
        return results
