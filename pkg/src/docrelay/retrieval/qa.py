"""Question answering with quotations.

Retrieval and a keep/drop judgment narrow the corpus, each kept document
answers the question individually (map), and an aggregation call produces
the final answer (reduce). When nothing is retrieved, nothing is kept, or
the aggregator declares insufficiency, the user gets the fixed
cannot-answer notice; this is guaranteed structurally for empty retrieval.
"""

from __future__ import annotations

import logging
import re

from ..gateway import ModelGateway
from ..store import DocumentStore, QuerySpec
from .common import best_chunk_per_doc, reference_for
from .reports import QAAnswer, Quotation

logger = logging.getLogger(__name__)

CANNOT_ANSWER_NOTICE = "I cannot answer this from the available documents."

QA_JUDGE_ROLE_PROMPT = (
    "You judge whether a document can help answer a question. Reply with one "
    "line: 'JUDGMENT: KEEP' or 'JUDGMENT: DROP'."
)

QA_ANSWERER_ROLE_PROMPT = (
    "Answer the question from the given document excerpt only. Reply with "
    "'ANSWER: <answer>' and optionally lines 'QUOTE: <verbatim quote from the "
    "document>'. If the excerpt does not help, reply 'ANSWER: unknown'."
)

QA_AGGREGATOR_ROLE_PROMPT = (
    "Combine the per-document answers into one final answer to the question. "
    "If they are insufficient, reply with the single word 'INSUFFICIENT'."
)

_KEEP_RE = re.compile(r"JUDGMENT:\s*(KEEP|DROP)", re.IGNORECASE)
_ANSWER_RE = re.compile(r"^\s*ANSWER:\s*(.+?)\s*$", re.IGNORECASE | re.MULTILINE)
_QUOTE_RE = re.compile(r"^\s*QUOTE:\s*(.+?)\s*$", re.IGNORECASE | re.MULTILINE)


def run_qa(gateway: ModelGateway, store: DocumentStore, question: str,
           top_k: int = 8, filters: dict[str, str] | None = None) -> QAAnswer:
    hits = store.search(QuerySpec(query_text=question, top_k=top_k,
                                  filters=dict(filters or {}), latest_only=True))
    if not hits:
        return QAAnswer(answerable=False, answer=CANNOT_ANSWER_NOTICE)

    kept = []
    for hit in best_chunk_per_doc(hits):
        reply = gateway.complete(
            "qa-judge", QA_JUDGE_ROLE_PROMPT,
            f"Question: {question}\n\nDocument excerpt:\n{hit.chunk.text}")
        match = _KEEP_RE.search(reply)
        if match and match.group(1).upper() == "KEEP":
            kept.append(hit)
    if not kept:
        return QAAnswer(answerable=False, answer=CANNOT_ANSWER_NOTICE)

    individual: list[str] = []
    quotations: list[Quotation] = []
    for hit in kept:
        body = store.get_version(hit.chunk.doc_id, hit.chunk.version_no).body
        reply = gateway.complete(
            "qa-answerer", QA_ANSWERER_ROLE_PROMPT,
            f"Question: {question}\n\nDocument excerpt:\n{hit.chunk.text}")
        answer_match = _ANSWER_RE.search(reply)
        individual.append(answer_match.group(1) if answer_match else reply.strip())
        doc_quotes = 0
        for quote in _QUOTE_RE.findall(reply):
            if quote in body:
                quotations.append(Quotation(quote=quote, reference=reference_for(hit)))
                doc_quotes += 1
            else:
                logger.warning("dropping non-verbatim quote from %s",
                               hit.chunk.doc_id)
        if doc_quotes == 0:
            # the retrieved chunk itself is verbatim by construction
            quotations.append(Quotation(quote=hit.chunk.text,
                                        reference=reference_for(hit)))

    joined = "\n".join(f"- {a}" for a in individual)
    final = gateway.complete(
        "qa-aggregator", QA_AGGREGATOR_ROLE_PROMPT,
        f"Question: {question}\n\nPer-document answers:\n{joined}").strip()
    if final.upper().startswith("INSUFFICIENT"):
        return QAAnswer(answerable=False, answer=CANNOT_ANSWER_NOTICE)
    return QAAnswer(answerable=True, answer=final, quotations=quotations)
