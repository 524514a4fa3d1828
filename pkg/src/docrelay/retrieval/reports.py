"""Report types returned by the retrieval agents, all JSON-serializable with
stable field names."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime


@dataclass(frozen=True)
class DocReference:
    doc_id: str
    version_no: int
    span: tuple[int, int]

    def to_json_dict(self) -> dict:
        return {"doc_id": self.doc_id, "version_no": self.version_no,
                "span": list(self.span)}


@dataclass
class SearchRecord:
    excerpt: str
    reference: DocReference
    metadata: dict[str, str]
    summary: str

    def to_json_dict(self) -> dict:
        return {"excerpt": self.excerpt, "reference": self.reference.to_json_dict(),
                "metadata": dict(self.metadata), "summary": self.summary}


@dataclass
class SearchReport:
    primary: list[SearchRecord] = field(default_factory=list)
    supplementary: list[SearchRecord] = field(default_factory=list)
    notice: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "primary": [r.to_json_dict() for r in self.primary],
            "supplementary": [r.to_json_dict() for r in self.supplementary],
            "notice": self.notice,
        }


@dataclass
class Quotation:
    quote: str
    reference: DocReference

    def to_json_dict(self) -> dict:
        return {"quote": self.quote, "reference": self.reference.to_json_dict()}


@dataclass
class QAAnswer:
    answerable: bool
    answer: str
    quotations: list[Quotation] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {"answerable": self.answerable, "answer": self.answer,
                "quotations": [q.to_json_dict() for q in self.quotations]}


@dataclass
class TraceEntry:
    version_no: int
    timestamp: datetime
    extracted_text: str | None          # present iff the requirement was found
    change_note: str

    def to_json_dict(self) -> dict:
        return {"version_no": self.version_no,
                "timestamp": self.timestamp.isoformat(),
                "extracted_text": self.extracted_text,
                "change_note": self.change_note}


@dataclass
class TraceGroup:
    doc_id: str
    entries: list[TraceEntry]

    def to_json_dict(self) -> dict:
        return {"doc_id": self.doc_id,
                "entries": [e.to_json_dict() for e in self.entries]}


@dataclass
class RequirementHistory:
    groups: list[TraceGroup] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {"groups": [g.to_json_dict() for g in self.groups]}


@dataclass
class TraceReport:
    history: RequirementHistory
    narrative: str
    notice: str | None = None

    def to_json_dict(self) -> dict:
        return {"history": self.history.to_json_dict(),
                "narrative": self.narrative, "notice": self.notice}


@dataclass
class ReadingNotes:
    text: str
    blocks_consumed: int

    def to_json_dict(self) -> dict:
        return {"text": self.text, "blocks_consumed": self.blocks_consumed}


@dataclass
class ReadingReport:
    response: str
    notes: ReadingNotes
    doc_id: str

    def to_json_dict(self) -> dict:
        return {"response": self.response, "notes": self.notes.to_json_dict(),
                "doc_id": self.doc_id}
