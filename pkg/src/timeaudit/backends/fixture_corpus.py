"""Offline document corpus that stands in for a live search index.

Corpus files are JSON lines with four fields per document::

    {"doc_id": "...", "text": "...", "publication_date": "YYYY-MM-DD",
     "keywords": ["...", ...]}

``publication_date`` may be null for undated documents. A query matches
a document when any of its keywords occurs in the query
(case-insensitive containment); matches rank by how many keywords hit,
then by doc_id for stability.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Optional

from timeaudit.backends.search import SearchRequest, SearchResult
from timeaudit.errors import DatasetSchemaError

_SNIPPET_CHARS = 240


@dataclass(frozen=True)
class FixtureDocument:
    doc_id: str
    text: str
    publication_date: Optional[date]
    keywords: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "text": self.text,
            "publication_date": (
                self.publication_date.isoformat() if self.publication_date else None
            ),
            "keywords": list(self.keywords),
        }


class FixtureCorpus:
    def __init__(self, documents: Iterable[FixtureDocument] = ()):
        self.documents: list[FixtureDocument] = list(documents)

    def add(self, document: FixtureDocument) -> None:
        self.documents.append(document)

    @classmethod
    def from_jsonl(cls, path: Path) -> "FixtureCorpus":
        corpus = cls()
        with Path(path).open(encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    raw = json.loads(line)
                    pub = raw.get("publication_date")
                    corpus.add(
                        FixtureDocument(
                            doc_id=raw["doc_id"],
                            text=raw["text"],
                            publication_date=date.fromisoformat(pub) if pub else None,
                            keywords=tuple(raw.get("keywords", ())),
                        )
                    )
                except (KeyError, ValueError, TypeError) as exc:
                    raise DatasetSchemaError(str(exc), line_number=line_number) from exc
        return corpus

    def to_jsonl(self, path: Path) -> None:
        with Path(path).open("w", encoding="utf-8") as handle:
            for doc in self.documents:
                handle.write(json.dumps(doc.to_json_dict(), sort_keys=True) + "\n")

    def lookup(self, query: str, limit: int) -> list[FixtureDocument]:
        folded = query.casefold()
        scored = []
        for doc in self.documents:
            score = sum(1 for kw in doc.keywords if kw.casefold() in folded)
            if score > 0:
                scored.append((-score, doc.doc_id, doc))
        scored.sort(key=lambda item: (item[0], item[1]))
        return [doc for _, _, doc in scored[:limit]]


class FixtureSearchClient:
    """SearchClient over a fixture corpus; compliant with before_date."""

    def __init__(self, corpus: FixtureCorpus):
        self.corpus = corpus
        self._lock = threading.Lock()
        self.num_calls = 0

    def search(self, request: SearchRequest) -> list[SearchResult]:
        with self._lock:
            self.num_calls += 1
        docs = self.corpus.lookup(request.query, limit=request.max_results * 4)
        results = [
            SearchResult(
                url=f"fixture://{doc.doc_id}",
                title=doc.doc_id.replace("-", " "),
                snippet=doc.text[:_SNIPPET_CHARS],
                publication_date=doc.publication_date,
            )
            for doc in docs
        ]
        if request.before_date is not None:
            results = [
                r
                for r in results
                if r.publication_date is not None
                and r.publication_date < request.before_date
            ]
        return results[: request.max_results]
