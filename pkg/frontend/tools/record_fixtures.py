"""Records API responses into frontend/fixtures/ so the console's render
tests run with the service absent.

Usage: python tools/record_fixtures.py   (from the frontend directory)
"""

import json
import re
import time
from pathlib import Path

from fastapi.testclient import TestClient

from docrelay.gateway import ModelGateway, ScriptedBackend, ScriptRule, hashed_embedding, stub_caption
from docrelay.service.http import create_app
from docrelay.store import DocumentStore

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

SAMPLE_FSD = Path(__file__).resolve().parents[2].joinpath(
    "src/docrelay/data/sample_fsd.md").read_text(encoding="utf-8")

SCENARIO_MD = """# Password policy validation

Source section: Password
Language: en

Preconditions:
- A user account exists

| Step No. | Action | Expected Result |
| --- | --- | --- |
| 1 | Set a short password | It is rejected |
| 2 | Set a valid password | It is accepted |
"""


class FnBackend:
    def __init__(self, fn):
        self.fn = fn

    def complete(self, request):
        return self.fn(request)

    def caption(self, image_bytes):
        return stub_caption(image_bytes)

    def embed(self, text):
        return hashed_embedding(text)


def reply_for(request) -> str:
    prompt = request.prompt_text
    role = request.role
    if role == "search-judge":
        title = re.search(r"Document '([^']+)'", prompt).group(1)
        table = {"Login Spec": "PRIMARY", "Password Policy": "PRIMARY",
                 "UI Notes": "SUPPLEMENTARY"}
        return f"JUDGMENT: {table.get(title, 'DROP')}"
    if role == "summarizer":
        title = re.search(r"Document '([^']+)'", prompt).group(1)
        return f"Covers what {title} says about authentication."
    if role == "qa-judge":
        excerpt = prompt.split("Document excerpt:", 1)[-1]
        return "JUDGMENT: KEEP" if "12 characters" in excerpt else "JUDGMENT: DROP"
    if role == "qa-answerer":
        return ("ANSWER: Passwords must be at least 12 characters long.\n"
                "QUOTE: at least 12 characters")
    if role == "qa-aggregator":
        return "Yes: passwords must be at least 12 characters long."
    if role == "trace-judge":
        doc = re.search(r"\(([^)]+)\), latest", prompt).group(1)
        return f"JUDGMENT: {'KEEP' if doc in ('auth-spec', 'sec-notes') else 'DROP'}"
    if role == "trace-extractor":
        m = re.search(r"Document (\S+) version (\d+)", prompt)
        plants = {("auth-spec", 1): "password of 8 characters",
                  ("auth-spec", 2): None,
                  ("auth-spec", 3): "password of 12 characters",
                  ("sec-notes", 1): "passwords rotate every 90 days"}
        text = plants.get((m.group(1), int(m.group(2))))
        return "NOT FOUND" if text is None else f"FOUND: {text}"
    if role == "trace-narrator":
        return ("The minimum password length was raised from 8 to 12 "
                "characters, and a 90-day rotation rule appeared in the "
                "security notes.")
    if role == "reader":
        return "Notes: the guide covers backups, restores and retention."
    if role == "reader-final":
        return "The operations guide is mostly about backup and retention."
    raise AssertionError(f"no scripted reply for role {role}")


def populate(store: DocumentStore) -> None:
    from datetime import datetime, timedelta, timezone

    t0 = datetime(2025, 3, 1, tzinfo=timezone.utc)
    docs = [
        ("login-spec", "Login Spec",
         ["login requires a user name and password on the portal"]),
        ("pwd-policy", "Password Policy",
         ["passwords must contain at least 12 characters and one digit"]),
        ("ui-notes", "UI Notes",
         ["the login page shows the password field below the user name"]),
        ("auth-spec", "Auth Spec",
         ["the password of 8 characters is required",
          "authentication now uses single sign on",
          "the password of 12 characters is required"]),
        ("sec-notes", "Security Notes",
         ["passwords rotate every 90 days without exception"]),
        ("ops-guide", "Operations Guide",
         ["backups run nightly. restores are tested monthly. retention is "
          "ninety days for all snapshots." * 3]),
    ]
    day = 0
    for doc_id, title, bodies in docs:
        for body in bodies:
            store.ingest_version(doc_id, title, body,
                                 metadata={"project": "aurora"},
                                 timestamp=t0 + timedelta(days=day))
            day += 1


def scenario_backend() -> ScriptedBackend:
    return ScriptedBackend([
        ScriptRule(role="writer", reply=SCENARIO_MD),
        ScriptRule(role="fact-checker", reply="VERDICT: PASS"),
    ])


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    store = DocumentStore()
    populate(store)
    app = create_app(store, ModelGateway(backend=FnBackend(reply_for)))
    client = TestClient(app)

    def record(name: str, payload) -> None:
        (FIXTURES / f"{name}.json").write_text(
            json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8")
        print(f"recorded {name}.json")

    record("query_search", client.post("/api/v1/query", json={
        "text": "documents about the login password", "mode": "search"}).json())
    record("query_qa", client.post("/api/v1/query", json={
        "text": "how long must a password be?", "mode": "qa"}).json())
    empty_client = TestClient(create_app(
        DocumentStore(), ModelGateway(backend=FnBackend(reply_for))))
    record("query_qa_unanswerable", empty_client.post("/api/v1/query", json={
        "text": "is there a deployment checklist?", "mode": "qa"}).json())
    record("query_trace", client.post("/api/v1/query", json={
        "text": "password length requirement", "mode": "trace"}).json())
    record("query_trace_empty", TestClient(create_app(
        DocumentStore(), ModelGateway(backend=FnBackend(reply_for))
    )).post("/api/v1/query", json={
        "text": "anything", "mode": "trace"}).json())
    record("query_read", client.post("/api/v1/query", json={
        "text": "read the Operations Guide", "mode": "read"}).json())

    ambiguous = client.post("/api/v1/query", json={
        "text": "read the Login Spec and the Password Policy", "mode": "read"})
    record("error_ambiguous", {"status": ambiguous.status_code,
                               "body": ambiguous.json()})

    # job lifecycle against a fresh app so script cursors start clean
    job_app = create_app(store, ModelGateway(backend=scenario_backend()))
    job_client = TestClient(job_app)
    submitted = job_client.post("/api/v1/scenario-jobs", json={
        "fsd_text": SAMPLE_FSD, "section": "Password",
        "target_language": "en"}).json()
    job_id = submitted["job_id"]
    for _ in range(200):
        payload = job_client.get(f"/api/v1/scenario-jobs/{job_id}").json()
        if payload["status"] in ("done", "aborted"):
            break
        time.sleep(0.02)
    record("job_done", payload)
    record("job_running", {**payload, "status": "running", "outputs": [],
                           "downloads": [], "final_text": ""})
    record("job_queued", {**payload, "status": "queued", "outputs": [],
                          "downloads": [], "final_text": ""})

    abort_app = create_app(store, ModelGateway(backend=scenario_backend()))
    abort_client = TestClient(abort_app)
    submitted = abort_client.post("/api/v1/scenario-jobs", json={
        "fsd_text": SAMPLE_FSD, "section": "Billing",
        "target_language": "en"}).json()
    for _ in range(200):
        payload = abort_client.get(
            f"/api/v1/scenario-jobs/{submitted['job_id']}").json()
        if payload["status"] in ("done", "aborted"):
            break
        time.sleep(0.02)
    record("job_aborted", payload)

    record("doc_versions", client.get("/api/v1/documents/auth-spec/versions").json())


if __name__ == "__main__":
    main()
