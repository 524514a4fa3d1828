"""General document search: query, per-document relevance judgment,
summaries, and a two-section report (most relevant plus supplementary)."""

from __future__ import annotations

import logging
import re

from ..gateway import ModelGateway
from ..store import DocumentStore, QuerySpec
from .common import best_chunk_per_doc, reference_for
from .reports import SearchRecord, SearchReport

logger = logging.getLogger(__name__)

EMPTY_SEARCH_NOTICE = "No documents matched the query."

JUDGE_ROLE_PROMPT = (
    "You judge whether a retrieved document is relevant to a query. Reply "
    "with one line: 'JUDGMENT: PRIMARY' (highly relevant), 'JUDGMENT: "
    "SUPPLEMENTARY' (related background), or 'JUDGMENT: DROP' (irrelevant)."
)

SUMMARIZER_ROLE_PROMPT = (
    "Summarize the given document excerpt for a search result card in at "
    "most three sentences. Reply with the summary only."
)

_JUDGMENT_RE = re.compile(r"JUDGMENT:\s*(PRIMARY|SUPPLEMENTARY|DROP)", re.IGNORECASE)


def run_search(gateway: ModelGateway, store: DocumentStore, user_query: str,
               top_k: int = 8,
               filters: dict[str, str] | None = None) -> SearchReport:
    """Search pipeline: store query, keep/drop+section judgment per document,
    then a summary per kept document. Within each section, records keep the
    cosine order. Empty retrieval yields an empty report with a notice."""
    hits = store.search(QuerySpec(query_text=user_query, top_k=top_k,
                                  filters=dict(filters or {}), latest_only=True))
    if not hits:
        return SearchReport(notice=EMPTY_SEARCH_NOTICE)

    report = SearchReport()
    for hit in best_chunk_per_doc(hits):
        doc = store.get_document(hit.chunk.doc_id)
        judgment = _judge(gateway, user_query, doc.title, hit.chunk.text)
        if judgment == "DROP":
            continue
        summary = gateway.complete(
            "summarizer", SUMMARIZER_ROLE_PROMPT,
            f"Query: {user_query}\n\nDocument '{doc.title}' excerpt:\n{hit.chunk.text}")
        record = SearchRecord(
            excerpt=hit.chunk.text,
            reference=reference_for(hit),
            metadata=dict(store.get_version(hit.chunk.doc_id,
                                            hit.chunk.version_no).metadata),
            summary=summary.strip(),
        )
        (report.primary if judgment == "PRIMARY" else report.supplementary
         ).append(record)
    if not report.primary and not report.supplementary:
        report.notice = "All retrieved documents were judged irrelevant."
    return report


def _judge(gateway: ModelGateway, query: str, title: str, excerpt: str) -> str:
    reply = gateway.complete(
        "search-judge", JUDGE_ROLE_PROMPT,
        f"Query: {query}\n\nDocument '{title}' excerpt:\n{excerpt}")
    match = _JUDGMENT_RE.search(reply)
    if not match:
        logger.warning("unparseable relevance judgment; dropping document")
        return "DROP"
    return match.group(1).upper()
