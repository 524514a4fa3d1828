"""Runs a user query end to end: delegation (or an explicit mode), then the
planned use cases in order, concatenating their outputs."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..gateway import ModelGateway
from ..store import DocumentStore
from .delegator import DelegationPlan, delegate
from .qa import run_qa
from .reading import DEFAULT_BLOCK_BUDGET, DEFAULT_NOTES_BUDGET, run_reading
from .search import run_search
from .trace import run_trace

MODES = ("auto", "search", "qa", "trace", "read")

_MODE_TO_USE_CASE = {"search": "search", "qa": "qa", "trace": "trace",
                     "read": "reading"}


@dataclass
class RetrievalConfig:
    top_k: int = 8
    trace_top_k: int = 16
    block_budget: int = DEFAULT_BLOCK_BUDGET
    notes_budget: int = DEFAULT_NOTES_BUDGET


@dataclass
class QueryResponse:
    mode: str
    plan: DelegationPlan
    results: list[dict] = field(default_factory=list)   # {"use_case", "report"}
    text: str = ""

    def to_json_dict(self) -> dict:
        return {"mode": self.mode, "plan": self.plan.to_json_dict(),
                "results": self.results, "text": self.text}


def answer_query(gateway: ModelGateway, store: DocumentStore, text: str,
                 mode: str = "auto",
                 config: RetrievalConfig | None = None) -> QueryResponse:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if not text.strip():
        raise ValueError("query text must be non-empty")
    config = config or RetrievalConfig()
    if mode == "auto":
        plan = delegate(gateway, text)
    else:
        plan = DelegationPlan(use_cases=[_MODE_TO_USE_CASE[mode]],
                              rationale=f"explicit mode: {mode}")

    results = []
    texts = []
    for use_case in plan.use_cases:
        if use_case == "search":
            report = run_search(gateway, store, text, top_k=config.top_k)
            texts.append(report.notice or
                         f"Found {len(report.primary)} primary and "
                         f"{len(report.supplementary)} supplementary documents.")
        elif use_case == "qa":
            report = run_qa(gateway, store, text, top_k=config.top_k)
            texts.append(report.answer)
        elif use_case == "trace":
            report = run_trace(gateway, store, text, top_k=config.trace_top_k)
            texts.append(report.notice or report.narrative)
        else:
            report = run_reading(gateway, store, text,
                                 block_budget=config.block_budget,
                                 notes_budget=config.notes_budget)
            texts.append(report.response)
        results.append({"use_case": use_case, "report": report.to_json_dict()})

    return QueryResponse(mode=mode, plan=plan, results=results,
                         text="\n\n".join(texts))
