"""Thread-safe namespaced cache for backend call results.

Search results are cached under a role namespace (for example
"generator" vs "supervisor") so that the two pipeline roles never read
each other's entries even when they issue identical queries.
"""
from __future__ import annotations

import threading
from typing import Any, Hashable

_MISS = object()


class NamespacedCache:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._store: dict[str, dict[Hashable, Any]] = {}

    def lookup(self, namespace: str, key: Hashable) -> tuple[bool, Any]:
        with self._lock:
            value = self._store.get(namespace, {}).get(key, _MISS)
        if value is _MISS:
            return False, None
        return True, value

    def store(self, namespace: str, key: Hashable, value: Any) -> None:
        with self._lock:
            self._store.setdefault(namespace, {})[key] = value

    def size(self, namespace: str | None = None) -> int:
        with self._lock:
            if namespace is not None:
                return len(self._store.get(namespace, {}))
            return sum(len(bucket) for bucket in self._store.values())

    def namespaces(self) -> list[str]:
        with self._lock:
            return sorted(self._store)
