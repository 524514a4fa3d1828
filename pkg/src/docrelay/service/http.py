"""HTTP API: ingestion, the four retrieval use cases, and scenario jobs.

Every error body is {code, message, candidates?}: 400 validation, 404 not
found, 409 ambiguity, 502 model backend trouble.
"""

from __future__ import annotations

import logging
from datetime import datetime
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from ..errors import (
    AmbiguousChapterError,
    AmbiguousDocumentError,
    ChapterNotFoundError,
    DocRelayError,
    DocumentNotFoundError,
    ProtocolError,
    ScriptError,
    TransportError,
)
from ..gateway import ModelGateway
from ..retrieval.runner import MODES, answer_query
from ..scenario.pipeline import ScenarioJobConfig, run_scenario_job
from ..store import DocumentStore
from .config import ServiceConfig
from .jobs import JobManager

logger = logging.getLogger(__name__)

API = "/api/v1"


class IngestBody(BaseModel):
    doc_id: str = Field(min_length=1)
    title: str = Field(min_length=1)
    body: str = Field(min_length=1)
    metadata: dict[str, str] = Field(default_factory=dict)
    timestamp: datetime | None = None


class QueryBody(BaseModel):
    text: str = Field(min_length=1)
    mode: str = "auto"


class ScenarioJobBody(BaseModel):
    fsd_text: str | None = None
    fsd_path: str | None = None         # server-side upload reference
    section: str = Field(min_length=1)
    target_language: str | None = None


def create_app(store: DocumentStore, gateway: ModelGateway,
               config: ServiceConfig | None = None,
               frontend_dir: str | Path | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="docrelay", version="0.1.0")

    def run_job(inputs: dict):
        return run_scenario_job(
            gateway, inputs["fsd_text"], inputs["user_prompt"],
            config=ScenarioJobConfig(section=inputs["section"],
                                     target_language=inputs.get("target_language"),
                                     engine=config.engine_config()),
            declared_order=config.order)

    jobs = JobManager(run_job, max_workers=2, persist_dir=config.jobs_dir)
    app.state.jobs = jobs
    app.state.store = store
    app.state.gateway = gateway

    # ── error mapping ────────────────────────────────────────────────────

    def error_body(code: str, message: str, candidates: list[str] | None = None) -> dict:
        body = {"code": code, "message": message}
        if candidates is not None:
            body["candidates"] = candidates
        return body

    @app.exception_handler(RequestValidationError)
    async def on_validation(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content=error_body("validation", str(exc.errors())))

    @app.exception_handler(DocRelayError)
    async def on_domain_error(request: Request, exc: DocRelayError):
        if isinstance(exc, (AmbiguousDocumentError, AmbiguousChapterError)):
            return JSONResponse(status_code=409, content=error_body(
                "ambiguous", str(exc), getattr(exc, "candidates", [])))
        if isinstance(exc, (DocumentNotFoundError, ChapterNotFoundError)):
            return JSONResponse(status_code=404,
                                content=error_body("not_found", str(exc)))
        if isinstance(exc, (ScriptError, TransportError, ProtocolError)):
            return JSONResponse(status_code=502,
                                content=error_body("backend", str(exc)))
        return JSONResponse(status_code=400, content=error_body("domain", str(exc)))

    @app.exception_handler(ValueError)
    async def on_value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400,
                            content=error_body("validation", str(exc)))

    # ── documents ────────────────────────────────────────────────────────

    @app.post(API + "/documents")
    def ingest(body: IngestBody):
        record = store.ingest_version(body.doc_id, body.title, body.body,
                                      metadata=body.metadata,
                                      timestamp=body.timestamp)
        return {"doc_id": record.doc_id, "version_no": record.version_no}

    @app.get(API + "/documents/{doc_id}/versions")
    def versions(doc_id: str):
        records = store.list_versions(doc_id)
        return {
            "doc_id": doc_id,
            "title": store.get_document(doc_id).title,
            "versions": [
                {"version_no": r.version_no, "timestamp": r.timestamp.isoformat(),
                 "metadata": r.metadata, "chars": len(r.body)}
                for r in records
            ],
        }

    # ── retrieval ────────────────────────────────────────────────────────

    @app.post(API + "/query")
    def query(body: QueryBody):
        if body.mode not in MODES:
            return JSONResponse(status_code=400, content=error_body(
                "validation", f"mode must be one of {MODES}"))
        response = answer_query(gateway, store, body.text, mode=body.mode,
                                config=config.retrieval_config())
        return response.to_json_dict()

    # ── scenario jobs ────────────────────────────────────────────────────

    @app.post(API + "/scenario-jobs")
    def submit_job(body: ScenarioJobBody):
        if body.fsd_text is None and body.fsd_path is None:
            return JSONResponse(status_code=400, content=error_body(
                "validation", "one of fsd_text or fsd_path is required"))
        fsd_text = body.fsd_text
        if fsd_text is None:
            path = Path(body.fsd_path)
            if not path.is_file():
                return JSONResponse(status_code=404, content=error_body(
                    "not_found", f"fsd_path does not exist: {body.fsd_path}"))
            fsd_text = path.read_text(encoding="utf-8")
        record = jobs.submit({
            "fsd_text": fsd_text,
            "section": body.section,
            "target_language": body.target_language,
            "user_prompt": ("Please create a test scenario based on section "
                            f"{body.section}."),
        })
        return {"job_id": record.job_id, "status": record.status}

    @app.get(API + "/scenario-jobs/{job_id}")
    def job_status(job_id: str):
        record = jobs.get(job_id)
        if record is None:
            return JSONResponse(status_code=404,
                                content=error_body("not_found",
                                                   f"unknown job: {job_id}"))
        payload = record.to_json_dict()
        payload["downloads"] = [
            f"{API}/scenario-jobs/{job_id}/files/{name}" for name in record.outputs
        ]
        return payload

    @app.get(API + "/scenario-jobs/{job_id}/files/{name}")
    def job_file(job_id: str, name: str):
        data = jobs.file(job_id, name)
        if data is None:
            return JSONResponse(status_code=404, content=error_body(
                "not_found", f"no file {name!r} for job {job_id}"))
        media = ("text/csv" if name.endswith(".csv") else
                 "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet")
        return Response(content=data, media_type=media)

    # ── static console (secondary component build output) ───────────────

    if frontend_dir and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True),
                  name="console")

    return app
