"""Deterministic scripted backends for offline tests."""
from __future__ import annotations

import threading
from typing import Callable, Mapping, Sequence, Union

from timeaudit.backends.llm import LMRequest, LMResponse, ToolCall
from timeaudit.backends.search import SearchClient, SearchRequest, SearchResult
from timeaudit.errors import ScriptError

Matcher = Union[str, Callable[[LMRequest], bool]]
Canned = Union[LMResponse, str, list, dict, tuple]


def _matches(matcher: Matcher, request: LMRequest) -> bool:
    if callable(matcher):
        return bool(matcher(request))
    return matcher in request.system or matcher in request.user


def _as_response(canned: Canned) -> LMResponse:
    if isinstance(canned, LMResponse):
        return canned
    if isinstance(canned, str):
        return LMResponse(text=canned)
    if isinstance(canned, tuple) and len(canned) == 2 and isinstance(canned[0], str):
        return LMResponse(tool_call=ToolCall(name=canned[0], arguments=dict(canned[1])))
    return LMResponse(structured=canned)


class ScriptedLM:
    """Model stub that replays an ordered script.

    Each entry pairs a request matcher (substring or predicate) with a
    canned response. In strict mode a request that does not match the
    next entry, or arrives after the script is exhausted, raises
    ScriptError naming the offending request.
    """

    def __init__(self, script: Sequence[tuple[Matcher, Canned]], strict: bool = True):
        self._script = list(script)
        self.strict = strict
        self._lock = threading.Lock()
        self.calls: list[LMRequest] = []
        self._cursor = 0

    @property
    def consumed(self) -> int:
        return self._cursor

    @property
    def num_calls(self) -> int:
        return len(self.calls)

    def complete(self, request: LMRequest) -> LMResponse:
        with self._lock:
            self.calls.append(request)
            if self._cursor >= len(self._script):
                if self.strict:
                    raise ScriptError(
                        f"script exhausted at call {len(self.calls)}: {request.user[:200]!r}"
                    )
                return LMResponse(text="")
            matcher, canned = self._script[self._cursor]
            if not _matches(matcher, request):
                if self.strict:
                    raise ScriptError(
                        f"call {len(self.calls)} did not match script entry "
                        f"{self._cursor}: {request.user[:200]!r}"
                    )
                return LMResponse(text="")
            self._cursor += 1
            return _as_response(canned)


class StaticSearchClient:
    """Search stub returning a fixed result list per exact query."""

    def __init__(self, by_query: Mapping[str, Sequence[SearchResult]], default: Sequence[SearchResult] = ()):
        self._by_query = dict(by_query)
        self._default = list(default)
        self._lock = threading.Lock()
        self.queries: list[SearchRequest] = []

    @property
    def num_calls(self) -> int:
        return len(self.queries)

    def search(self, request: SearchRequest) -> list[SearchResult]:
        with self._lock:
            self.queries.append(request)
        return list(self._by_query.get(request.query, self._default))


class CountingSearchClient:
    """Wrapper that counts calls into any search client."""

    def __init__(self, inner: SearchClient):
        self._inner = inner
        self._lock = threading.Lock()
        self.num_calls = 0

    def search(self, request: SearchRequest) -> Sequence[SearchResult]:
        with self._lock:
            self.num_calls += 1
        return self._inner.search(request)
