"""Temporally filtered search contract.

The client-side filter is the load-bearing guarantee: whatever a
backend returns, a request with ``before_date`` set never yields a
result dated on or after that day, and undated results are dropped. A
request without ``before_date`` is unrestricted (used when hunting for
determination dates, which may lie after the cutoff).
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Optional, Protocol, Sequence, runtime_checkable

from timeaudit.backends.audit_log import AuditLog
from timeaudit.backends.caching import NamespacedCache


@dataclass(frozen=True)
class SearchRequest:
    query: str
    before_date: Optional[date] = None
    max_results: int = 5

    def cache_key(self) -> tuple:
        return (self.query, self.before_date, self.max_results)


@dataclass(frozen=True)
class SearchResult:
    url: str
    title: str
    snippet: str
    publication_date: Optional[date] = None

    def to_json_dict(self) -> dict:
        return {
            "url": self.url,
            "title": self.title,
            "snippet": self.snippet,
            "publication_date": (
                self.publication_date.isoformat() if self.publication_date else None
            ),
        }


@runtime_checkable
class SearchClient(Protocol):
    def search(self, request: SearchRequest) -> Sequence[SearchResult]: ...


def temporal_filter(
    results: Sequence[SearchResult], before_date: Optional[date]
) -> list[SearchResult]:
    if before_date is None:
        return list(results)
    return [
        r
        for r in results
        if r.publication_date is not None and r.publication_date < before_date
    ]


def run_search(
    client: SearchClient,
    request: SearchRequest,
    *,
    cache: Optional[NamespacedCache] = None,
    role: str = "search",
    audit: Optional[AuditLog] = None,
) -> list[SearchResult]:
    """Execute one search with caching, filtering and truncation.

    The cache key includes the temporal bound, so the same query asked
    under different cutoffs is two distinct entries.
    """
    if cache is not None:
        hit, cached = cache.lookup(role, request.cache_key())
        if hit:
            return list(cached)

    raw = client.search(request)
    filtered = temporal_filter(raw, request.before_date)[: request.max_results]

    if cache is not None:
        cache.store(role, request.cache_key(), tuple(filtered))
    if audit is not None:
        audit.record(
            "search",
            role=role,
            query=request.query,
            before_date=request.before_date,
            max_results=request.max_results,
            num_returned=len(filtered),
            results=[r.to_json_dict() for r in filtered],
        )
    return filtered
