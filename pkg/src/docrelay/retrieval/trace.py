"""Requirement change tracing across document versions.

Candidate documents come from a search over all versions; after a keep/drop
judgment, every version of every kept document is examined by an extractor
call, yielding one timeline entry per version (present or absent). Per-doc
timelines are merged into a history grouped by document and ordered by the
earliest version in which the requirement was found; a narrator call turns
the merged history into a textual description of the requirement's
evolution.
"""

from __future__ import annotations

import logging
import re

from ..gateway import ModelGateway
from ..store import DocumentStore, QuerySpec
from .common import best_chunk_per_doc
from .reports import RequirementHistory, TraceEntry, TraceGroup, TraceReport

logger = logging.getLogger(__name__)

EMPTY_TRACE_NOTICE = "The requirement was not found in any document version."

TRACE_JUDGE_ROLE_PROMPT = (
    "You judge whether a document is relevant to a requirement being traced. "
    "Reply with one line: 'JUDGMENT: KEEP' or 'JUDGMENT: DROP'."
)

TRACE_EXTRACTOR_ROLE_PROMPT = (
    "You look for one specific requirement in one document version. If "
    "present, reply 'FOUND: <the requirement text as stated in this "
    "version>'. If absent, reply 'NOT FOUND'."
)

TRACE_NARRATOR_ROLE_PROMPT = (
    "Describe the requirement's evolution over time from the given version "
    "history, in plain prose."
)

_KEEP_RE = re.compile(r"JUDGMENT:\s*(KEEP|DROP)", re.IGNORECASE)
_FOUND_RE = re.compile(r"^\s*FOUND:\s*(.+?)\s*$", re.IGNORECASE | re.DOTALL)
_NOT_FOUND_RE = re.compile(r"^\s*NOT\s+FOUND\b", re.IGNORECASE)

_VERSION_CLIP = 6000    # chars of a version body shown to the extractor


def run_trace(gateway: ModelGateway, store: DocumentStore,
              requirement_query: str, top_k: int = 16) -> TraceReport:
    hits = store.search(QuerySpec(query_text=requirement_query, top_k=top_k,
                                  latest_only=False))
    candidates = [hit.chunk.doc_id for hit in best_chunk_per_doc(hits)]
    kept = [doc_id for doc_id in candidates
            if _judge(gateway, requirement_query, store, doc_id)]

    groups: list[tuple[TraceGroup, object]] = []
    for doc_id in kept:
        entries = []
        previous: str | None = None
        earliest = None
        for version in store.list_versions(doc_id):
            found, excerpt = _extract(gateway, requirement_query, doc_id, version)
            entries.append(TraceEntry(
                version_no=version.version_no,
                timestamp=version.timestamp,
                extracted_text=excerpt if found else None,
                change_note=_change_note(found, excerpt, previous),
            ))
            if found:
                if earliest is None:
                    earliest = version.timestamp
                previous = excerpt
        if earliest is not None:
            groups.append((TraceGroup(doc_id=doc_id, entries=entries), earliest))

    groups.sort(key=lambda pair: pair[1])
    history = RequirementHistory(groups=[group for group, _ in groups])
    if not history.groups:
        return TraceReport(history=history, narrative="", notice=EMPTY_TRACE_NOTICE)

    narrative = gateway.complete(
        "trace-narrator", TRACE_NARRATOR_ROLE_PROMPT,
        f"Requirement: {requirement_query}\n\nHistory:\n{_render(history)}").strip()
    return TraceReport(history=history, narrative=narrative)


def _judge(gateway: ModelGateway, query: str, store: DocumentStore,
           doc_id: str) -> bool:
    doc = store.get_document(doc_id)
    reply = gateway.complete(
        "trace-judge", TRACE_JUDGE_ROLE_PROMPT,
        f"Requirement: {query}\n\nDocument '{doc.title}' ({doc_id}), latest "
        f"version excerpt:\n{doc.latest.body[:_VERSION_CLIP]}")
    match = _KEEP_RE.search(reply)
    return bool(match and match.group(1).upper() == "KEEP")


def _extract(gateway: ModelGateway, query: str, doc_id: str,
             version) -> tuple[bool, str | None]:
    reply = gateway.complete(
        "trace-extractor", TRACE_EXTRACTOR_ROLE_PROMPT,
        f"Requirement: {query}\n\nDocument {doc_id} version "
        f"{version.version_no}:\n{version.body[:_VERSION_CLIP]}")
    if _NOT_FOUND_RE.match(reply.strip()):
        return False, None
    match = _FOUND_RE.match(reply.strip())
    if match:
        return True, match.group(1)
    logger.warning("unparseable extractor reply for %s v%d; treating as absent",
                   doc_id, version.version_no)
    return False, None


def _change_note(found: bool, excerpt: str | None, previous: str | None) -> str:
    if not found:
        return "not present in this version"
    if previous is None:
        return "first occurrence"
    if excerpt == previous:
        return "unchanged"
    return "changed"


def _render(history: RequirementHistory) -> str:
    lines = []
    for group in history.groups:
        lines.append(f"Document {group.doc_id}:")
        for entry in group.entries:
            state = entry.extracted_text if entry.extracted_text else "(absent)"
            lines.append(f"  v{entry.version_no} [{entry.change_note}]: {state}")
    return "\n".join(lines)
