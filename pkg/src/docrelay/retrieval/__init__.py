"""The delegator and the four document-retrieval use-case agents:
search, question answering, requirement change tracing, and long-document
reading."""

from .delegator import DelegationPlan, delegate
from .qa import CANNOT_ANSWER_NOTICE, run_qa
from .reading import run_reading
from .reports import (
    DocReference,
    QAAnswer,
    Quotation,
    ReadingNotes,
    ReadingReport,
    RequirementHistory,
    SearchRecord,
    SearchReport,
    TraceEntry,
    TraceGroup,
    TraceReport,
)
from .runner import QueryResponse, RetrievalConfig, answer_query
from .search import run_search
from .trace import run_trace

__all__ = [
    "DelegationPlan",
    "delegate",
    "CANNOT_ANSWER_NOTICE",
    "run_qa",
    "run_reading",
    "DocReference",
    "QAAnswer",
    "Quotation",
    "ReadingNotes",
    "ReadingReport",
    "RequirementHistory",
    "SearchRecord",
    "SearchReport",
    "TraceEntry",
    "TraceGroup",
    "TraceReport",
    "QueryResponse",
    "RetrievalConfig",
    "answer_query",
    "run_search",
    "run_trace",
]
