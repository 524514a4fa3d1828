"""Divide-and-conquer reading of one long document.

The query must name exactly one document (by id or title). Its latest body
is split into blocks; for each block the reader model sees only the running
notes, the current block and the query, and replies with the full updated
notes — prior blocks never re-enter the context. A final call turns the
notes into the response.
"""

from __future__ import annotations

import logging

from ..gateway import ModelGateway
from ..orchestration import clip_text
from ..store import DocumentStore, chunk_document
from .reports import ReadingNotes, ReadingReport

logger = logging.getLogger(__name__)

READER_ROLE_PROMPT = (
    "You are reading a long document block by block to serve a query. Update "
    "your running notes with what matters from the current block, in your own "
    "words. Reply with the full updated notes only."
)

READER_FINAL_ROLE_PROMPT = (
    "Answer the query using only your notes on the document. Reply with the "
    "answer only."
)

DEFAULT_BLOCK_BUDGET = 4000
DEFAULT_NOTES_BUDGET = 8000


def run_reading(gateway: ModelGateway, store: DocumentStore, user_query: str,
                block_budget: int = DEFAULT_BLOCK_BUDGET,
                notes_budget: int = DEFAULT_NOTES_BUDGET) -> ReadingReport:
    """Read the referenced document in blocks, then answer from the notes.

    Notes are hard-capped at ``notes_budget``: an oversized update gets one
    compression re-ask and is then truncated with a marker.
    """
    doc = store.resolve_reference(user_query)
    body = doc.latest.body
    blocks = [body[a:b] for a, b in chunk_document(body, block_budget)]

    notes = ""
    consumed = 0
    for i, block in enumerate(blocks, start=1):
        reply = gateway.complete(
            "reader", READER_ROLE_PROMPT,
            f"Query: {user_query}\n\nNotes so far:\n{notes or '(none)'}\n\n"
            f"Block {i} of {len(blocks)}:\n{block}")
        if len(reply) > notes_budget:
            logger.info("notes over budget after block %d; asking to compress", i)
            reply = gateway.complete(
                "reader", READER_ROLE_PROMPT,
                f"Query: {user_query}\n\nYour notes exceed the budget of "
                f"{notes_budget} characters. Reply with a compressed version "
                f"of these notes:\n{reply}")
            if len(reply) > notes_budget:
                reply = clip_text(reply, notes_budget)
        notes = reply
        consumed += 1

    response = gateway.complete(
        "reader-final", READER_FINAL_ROLE_PROMPT,
        f"Query: {user_query}\n\nNotes:\n{notes}").strip()
    return ReadingReport(response=response,
                         notes=ReadingNotes(text=notes, blocks_consumed=consumed),
                         doc_id=doc.doc_id)
