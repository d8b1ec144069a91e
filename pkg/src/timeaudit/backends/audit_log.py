"""Append-only JSON-lines log of every external model and search call."""
from __future__ import annotations

import json
import threading
import time
from pathlib import Path
from typing import Any, Optional


class AuditLog:
    """Thread-safe call log.

    With a path, every record is appended to the file as one JSON line;
    records are always kept in memory as well so tests and reports can
    inspect a run without re-reading the file.
    """

    def __init__(self, path: Optional[Path] = None):
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._records: list[dict] = []
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def record(self, kind: str, **payload: Any) -> None:
        entry = {"ts": time.time(), "kind": kind, **payload}
        line = json.dumps(entry, default=str, sort_keys=True)
        with self._lock:
            self._records.append(entry)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as handle:
                    handle.write(line + "\n")

    @property
    def records(self) -> list[dict]:
        with self._lock:
            return list(self._records)

    def count(self, kind: Optional[str] = None) -> int:
        with self._lock:
            if kind is None:
                return len(self._records)
            return sum(1 for r in self._records if r["kind"] == kind)
