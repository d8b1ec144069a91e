"""Pluggable model and search backends with caching and call auditing."""
from timeaudit.backends.audit_log import AuditLog
from timeaudit.backends.caching import NamespacedCache
from timeaudit.backends.concurrency import FairSemaphore, gather_bounded
from timeaudit.backends.fixture_corpus import (
    FixtureCorpus,
    FixtureDocument,
    FixtureSearchClient,
)
from timeaudit.backends.http import (
    ChatCompletionsLM,
    HTTPSearchClient,
    ProviderConfig,
    load_provider_config,
)
from timeaudit.backends.llm import (
    LMClient,
    LMRequest,
    LMResponse,
    ToolCall,
    ToolSchema,
    lm_call,
    validate_payload,
)
from timeaudit.backends.scripted import (
    CountingSearchClient,
    ScriptedLM,
    StaticSearchClient,
)
from timeaudit.backends.search import (
    SearchClient,
    SearchRequest,
    SearchResult,
    run_search,
    temporal_filter,
)

__all__ = [
    "AuditLog",
    "ChatCompletionsLM",
    "CountingSearchClient",
    "FairSemaphore",
    "FixtureCorpus",
    "FixtureDocument",
    "FixtureSearchClient",
    "HTTPSearchClient",
    "LMClient",
    "LMRequest",
    "LMResponse",
    "NamespacedCache",
    "ProviderConfig",
    "ScriptedLM",
    "SearchClient",
    "SearchRequest",
    "SearchResult",
    "StaticSearchClient",
    "ToolCall",
    "ToolSchema",
    "gather_bounded",
    "lm_call",
    "load_provider_config",
    "run_search",
    "temporal_filter",
    "validate_payload",
]
