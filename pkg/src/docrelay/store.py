"""Versioned document corpus with chunk embeddings and exact cosine search.

One store is shared by all retrieval agents. Documents are identified by an
explicit doc_id; every ingest of a doc_id appends an immutable version with a
monotone version number. Versions are chunked on ingest, each chunk carries a
unit-norm embedding, and search is exact brute-force cosine over all chunks
passing the metadata filters.

Readers always see an atomic snapshot: writes build a new snapshot object and
swap a single reference, so a concurrent reader observes either the pre- or
the post-write corpus, never a partial one.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DocumentNotFoundError
from .gateway import hashed_embedding

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_BUDGET = 1000
MIN_CHUNK_BUDGET = 200
SNAP_WINDOW = 200

MANIFEST_NAME = "manifest.jsonl"


def chunk_document(body: str, budget: int = DEFAULT_CHUNK_BUDGET) -> list[tuple[int, int]]:
    """Split a body into spans that tile it in order without overlap.

    Every span is at most ``budget`` chars. A cut prefers the nearest
    preceding blank line or sentence end within SNAP_WINDOW chars of the
    budget boundary, so chunks tend to start on paragraph or sentence
    boundaries; with no snap point in range the cut is exactly at the budget.
    """
    if budget < MIN_CHUNK_BUDGET:
        raise ValueError(f"chunk budget must be >= {MIN_CHUNK_BUDGET}")
    if not body:
        return []
    spans: list[tuple[int, int]] = []
    pos = 0
    length = len(body)
    while length - pos > budget:
        cut = pos + budget
        snap = _nearest_snap(body, max(pos + 1, cut - SNAP_WINDOW), cut)
        if snap is not None:
            cut = snap
        spans.append((pos, cut))
        pos = cut
    spans.append((pos, length))
    return spans


def _nearest_snap(body: str, lo: int, hi: int) -> int | None:
    """Largest position in [lo, hi] right after a blank line or sentence end."""
    for p in range(hi, lo - 1, -1):
        if p < 2:
            break
        if body[p - 2] == "\n" and body[p - 1] == "\n":
            return p
        if body[p - 2] in ".!?" and body[p - 1] in " \n\t":
            return p
    return None


@dataclass(frozen=True)
class VersionRecord:
    doc_id: str
    version_no: int
    timestamp: datetime
    body: str
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class DocumentRecord:
    doc_id: str
    title: str
    versions: tuple[VersionRecord, ...]

    @property
    def latest(self) -> VersionRecord:
        return self.versions[-1]


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    version_no: int
    chunk_no: int
    span: tuple[int, int]
    text: str
    vector: np.ndarray


@dataclass
class QuerySpec:
    query_text: str
    top_k: int = 10
    filters: dict[str, str] = field(default_factory=dict)
    latest_only: bool = True

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass(frozen=True)
class ScoredChunk:
    chunk: Chunk
    score: float


@dataclass(frozen=True)
class _Snapshot:
    docs: dict[str, DocumentRecord]
    chunks: tuple[Chunk, ...]


class DocumentStore:
    """In-process corpus with vector similarity + metadata filter semantics."""

    def __init__(self, embedder: Callable[[str], np.ndarray] | None = None,
                 chunk_budget: int = DEFAULT_CHUNK_BUDGET):
        self._embedder = embedder or hashed_embedding
        self.chunk_budget = chunk_budget
        self._snapshot = _Snapshot(docs={}, chunks=())
        self._write_lock = threading.Lock()

    # ── ingestion ────────────────────────────────────────────────────────

    def ingest_version(self, doc_id: str, title: str, body: str,
                       metadata: dict[str, str] | None = None,
                       timestamp: datetime | None = None) -> VersionRecord:
        """Append a new immutable version; returns the created record.

        Re-ingesting a body identical to the document's latest version is a
        no-op: the existing record is returned and a notice is logged.
        """
        if not body:
            raise ValueError("document body must be non-empty")
        if timestamp is None:
            timestamp = datetime.now(timezone.utc)
        elif timestamp.tzinfo is None:
            timestamp = timestamp.replace(tzinfo=timezone.utc)

        with self._write_lock:
            snap = self._snapshot
            doc = snap.docs.get(doc_id)
            if doc is not None and doc.latest.body == body:
                logger.info("ingest no-op: %s latest version has identical body", doc_id)
                return doc.latest
            if doc is not None and timestamp < doc.latest.timestamp:
                raise ValueError(
                    f"timestamp of new version predates latest version of {doc_id}")

            version_no = doc.latest.version_no + 1 if doc is not None else 1
            record = VersionRecord(doc_id=doc_id, version_no=version_no,
                                   timestamp=timestamp, body=body,
                                   metadata=dict(metadata or {}))
            new_chunks = tuple(
                Chunk(doc_id=doc_id, version_no=version_no, chunk_no=i,
                      span=span, text=body[span[0]:span[1]],
                      vector=self._embedder(body[span[0]:span[1]]))
                for i, span in enumerate(chunk_document(body, self.chunk_budget))
            )
            if doc is None:
                doc = DocumentRecord(doc_id=doc_id, title=title, versions=(record,))
            else:
                doc = replace(doc, title=title, versions=doc.versions + (record,))
            docs = dict(snap.docs)
            docs[doc_id] = doc
            self._snapshot = _Snapshot(docs=docs, chunks=snap.chunks + new_chunks)
            return record

    # ── queries ──────────────────────────────────────────────────────────

    def search(self, spec: QuerySpec) -> list[ScoredChunk]:
        """Exact brute-force cosine top-k over chunks passing the filters.

        Result order: score desc, then doc_id asc, version_no desc,
        chunk_no asc. Scores are quantized to 1e-12 for ordering only, so
        mathematically tied chunks fall into the deterministic tie-break no
        matter how the dot product was summed. An empty result is a valid
        outcome.
        """
        snap = self._snapshot
        candidates = [c for c in snap.chunks if self._passes(snap, c, spec)]
        if not candidates:
            return []
        query_vec = self._embedder(spec.query_text)
        matrix = np.stack([c.vector for c in candidates])
        scores = matrix @ query_vec
        ranked = sorted(
            zip(candidates, scores.tolist()),
            key=lambda pair: (-round(pair[1], 12), pair[0].doc_id,
                              -pair[0].version_no, pair[0].chunk_no),
        )
        return [ScoredChunk(chunk=c, score=s) for c, s in ranked[: spec.top_k]]

    @staticmethod
    def _passes(snap: _Snapshot, chunk: Chunk, spec: QuerySpec) -> bool:
        doc = snap.docs[chunk.doc_id]
        if spec.latest_only and chunk.version_no != doc.latest.version_no:
            return False
        if spec.filters:
            version = doc.versions[chunk.version_no - 1]
            for key, value in spec.filters.items():
                if version.metadata.get(key) != value:
                    return False
        return True

    def list_versions(self, doc_id: str) -> list[VersionRecord]:
        doc = self._snapshot.docs.get(doc_id)
        if doc is None:
            raise DocumentNotFoundError(f"unknown document: {doc_id}")
        return list(doc.versions)

    def get_document(self, doc_id: str) -> DocumentRecord:
        doc = self._snapshot.docs.get(doc_id)
        if doc is None:
            raise DocumentNotFoundError(f"unknown document: {doc_id}")
        return doc

    def get_version(self, doc_id: str, version_no: int) -> VersionRecord:
        doc = self.get_document(doc_id)
        if not 1 <= version_no <= len(doc.versions):
            raise DocumentNotFoundError(
                f"unknown version {version_no} of document {doc_id}")
        return doc.versions[version_no - 1]

    def documents(self) -> list[DocumentRecord]:
        return sorted(self._snapshot.docs.values(), key=lambda d: d.doc_id)

    def resolve_reference(self, query: str) -> DocumentRecord:
        """Resolve a document named inside free text by doc_id or title.

        Matching is case-insensitive substring containment of the doc_id or
        title inside the query. Exactly one match is required: none raises
        not-found, several raise an ambiguity error listing candidates.
        """
        from .errors import AmbiguousDocumentError

        lowered = query.lower()
        matches = [
            doc for doc in self.documents()
            if doc.doc_id.lower() in lowered
            or (doc.title and doc.title.lower() in lowered)
        ]
        if not matches:
            raise DocumentNotFoundError(
                f"no document referenced in query: {query!r}")
        if len(matches) > 1:
            raise AmbiguousDocumentError(query, [doc.doc_id for doc in matches])
        return matches[0]

    def __len__(self) -> int:
        return len(self._snapshot.docs)

    @property
    def chunk_count(self) -> int:
        return len(self._snapshot.chunks)

    # ── persistence ──────────────────────────────────────────────────────

    def save_to_dir(self, path: str | Path) -> None:
        """Append-only export: one text file per version plus a JSONL manifest."""
        root = Path(path)
        (root / "docs").mkdir(parents=True, exist_ok=True)
        lines = []
        for doc in self.documents():
            for version in doc.versions:
                rel = f"docs/{_safe_name(doc.doc_id)}__v{version.version_no}.txt"
                target = root / rel
                if not target.exists():
                    target.write_text(version.body, encoding="utf-8")
                lines.append(json.dumps({
                    "doc_id": doc.doc_id,
                    "title": doc.title,
                    "version_no": version.version_no,
                    "timestamp": version.timestamp.isoformat(),
                    "metadata": version.metadata,
                    "path": rel,
                }, ensure_ascii=False))
        (root / MANIFEST_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load_from_dir(cls, path: str | Path,
                      embedder: Callable[[str], np.ndarray] | None = None,
                      chunk_budget: int = DEFAULT_CHUNK_BUDGET) -> "DocumentStore":
        """Rebuild a store from a manifest directory; vectors are recomputed."""
        root = Path(path)
        store = cls(embedder=embedder, chunk_budget=chunk_budget)
        manifest = root / MANIFEST_NAME
        if not manifest.exists():
            return store
        entries = [json.loads(line)
                   for line in manifest.read_text(encoding="utf-8").splitlines()
                   if line.strip()]
        entries.sort(key=lambda e: (e["doc_id"], e["version_no"]))
        for entry in entries:
            body = (root / entry["path"]).read_text(encoding="utf-8")
            record = store.ingest_version(
                doc_id=entry["doc_id"], title=entry["title"], body=body,
                metadata=entry.get("metadata") or {},
                timestamp=datetime.fromisoformat(entry["timestamp"]))
            if record.version_no != entry["version_no"]:
                raise ValueError(
                    f"manifest version gap for {entry['doc_id']}: expected "
                    f"{record.version_no}, manifest says {entry['version_no']}")
        return store


def _safe_name(doc_id: str) -> str:
    return re.sub(r"[^0-9A-Za-z._-]+", "_", doc_id)
