"""Scenario job execution on a bounded worker pool.

Jobs are asynchronous because one scenario run involves many model calls.
Records move strictly forward (queued -> running -> done | aborted) and are
written through to a directory when persistence is configured, so they
survive a service restart.
"""

from __future__ import annotations

import json
import logging
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..scenario.pipeline import ScenarioJobResult

logger = logging.getLogger(__name__)

_TRANSITIONS = {
    "queued": {"running", "aborted"},
    "running": {"done", "aborted"},
    "done": set(),
    "aborted": set(),
}

CSV_NAME = "spreadsheet.csv"
XLSX_NAME = "spreadsheet.xlsx"


@dataclass
class JobRecord:
    job_id: str
    kind: str = "scenario"
    status: str = "queued"
    inputs: dict = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)    # downloadable file names
    diagnostics: str = ""
    final_text: str = ""
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)

    def to_json_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "status": self.status,
            "inputs": {k: v for k, v in self.inputs.items() if k != "fsd_text"},
            "outputs": list(self.outputs),
            "diagnostics": self.diagnostics,
            "final_text": self.final_text,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }


JobRunner = Callable[[dict], ScenarioJobResult]


class JobManager:
    """Submits scenario jobs to a thread pool and tracks their records."""

    def __init__(self, runner: JobRunner, max_workers: int = 2,
                 persist_dir: str | Path | None = None):
        self._runner = runner
        self._pool = ThreadPoolExecutor(max_workers=max_workers,
                                        thread_name_prefix="scenario-job")
        self._records: dict[str, JobRecord] = {}
        self._files: dict[str, dict[str, bytes]] = {}
        self._lock = threading.Lock()
        self._persist_dir = Path(persist_dir) if persist_dir else None
        if self._persist_dir:
            self._persist_dir.mkdir(parents=True, exist_ok=True)
            self._load_persisted()

    def submit(self, inputs: dict) -> JobRecord:
        record = JobRecord(job_id=uuid.uuid4().hex[:12], inputs=dict(inputs))
        with self._lock:
            self._records[record.job_id] = record
            self._files[record.job_id] = {}
        self._persist(record)
        self._pool.submit(self._run, record.job_id)
        return record

    def get(self, job_id: str) -> JobRecord | None:
        with self._lock:
            return self._records.get(job_id)

    def file(self, job_id: str, name: str) -> bytes | None:
        with self._lock:
            data = self._files.get(job_id, {}).get(name)
        if data is None and self._persist_dir:
            path = self._persist_dir / job_id / name
            if path.is_file():
                return path.read_bytes()
        return data

    def list_records(self) -> list[JobRecord]:
        with self._lock:
            return sorted(self._records.values(), key=lambda r: r.created_at)

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)

    # ── internals ────────────────────────────────────────────────────────

    def _run(self, job_id: str) -> None:
        record = self.get(job_id)
        assert record is not None
        self._advance(record, "running")
        try:
            result = self._runner(record.inputs)
        except Exception as exc:                    # noqa: BLE001 - job boundary
            logger.exception("scenario job %s crashed", job_id)
            record.diagnostics = f"internal error: {exc}"
            self._advance(record, "aborted")
            return
        if result.status == "done" and result.csv_bytes is not None:
            files = {CSV_NAME: result.csv_bytes}
            if result.xlsx_bytes is not None:
                files[XLSX_NAME] = result.xlsx_bytes
            with self._lock:
                self._files[job_id] = files
            record.outputs = sorted(files)
            record.final_text = result.final_text
            self._write_files(job_id, files)
            self._advance(record, "done")
        else:
            record.diagnostics = result.diagnostic or "pipeline aborted"
            self._advance(record, "aborted")

    def _advance(self, record: JobRecord, status: str) -> None:
        if status not in _TRANSITIONS[record.status]:
            raise RuntimeError(f"illegal job transition {record.status} -> {status}")
        record.status = status
        record.updated_at = time.time()
        self._persist(record)

    def _persist(self, record: JobRecord) -> None:
        if not self._persist_dir:
            return
        job_dir = self._persist_dir / record.job_id
        job_dir.mkdir(parents=True, exist_ok=True)
        (job_dir / "record.json").write_text(
            json.dumps(record.to_json_dict(), indent=2), encoding="utf-8")

    def _write_files(self, job_id: str, files: dict[str, bytes]) -> None:
        if not self._persist_dir:
            return
        job_dir = self._persist_dir / job_id
        for name, data in files.items():
            (job_dir / name).write_bytes(data)

    def _load_persisted(self) -> None:
        assert self._persist_dir is not None
        for record_path in sorted(self._persist_dir.glob("*/record.json")):
            raw = json.loads(record_path.read_text(encoding="utf-8"))
            record = JobRecord(
                job_id=raw["job_id"], kind=raw.get("kind", "scenario"),
                status=raw["status"], inputs=raw.get("inputs", {}),
                outputs=raw.get("outputs", []),
                diagnostics=raw.get("diagnostics", ""),
                final_text=raw.get("final_text", ""),
                created_at=raw.get("created_at", 0.0),
                updated_at=raw.get("updated_at", 0.0),
            )
            if record.status in ("queued", "running"):
                # the run did not survive the restart
                record.status = "aborted"
                record.diagnostics = "service restarted while job was in flight"
                self._persist(record)
            self._records[record.job_id] = record
            self._files[record.job_id] = {}
