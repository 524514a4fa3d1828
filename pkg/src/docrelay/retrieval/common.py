"""Small helpers shared by the retrieval agents."""

from __future__ import annotations

from ..store import ScoredChunk
from .reports import DocReference


def best_chunk_per_doc(hits: list[ScoredChunk]) -> list[ScoredChunk]:
    """Deduplicate chunk hits to documents, keeping each document's best
    chunk and the overall cosine order (relevance judging happens at document
    granularity)."""
    seen: set[str] = set()
    out = []
    for hit in hits:
        if hit.chunk.doc_id not in seen:
            seen.add(hit.chunk.doc_id)
            out.append(hit)
    return out


def reference_for(hit: ScoredChunk) -> DocReference:
    return DocReference(doc_id=hit.chunk.doc_id, version_no=hit.chunk.version_no,
                        span=hit.chunk.span)
