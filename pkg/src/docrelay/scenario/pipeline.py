"""The six-agent test-scenario application.

A deterministic supervisor drives five workers in declared order: retriever,
writer, fact-checker, translator, spreadsheet-writer. The retriever and the
spreadsheet writer are plain code; the writer, fact checker and translator
call the model gateway. A failing fact-check verdict routes the task back to
the writer with the reported issues, within the engine's revision budget.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from ..artifacts import ArtifactHandle, ArtifactStore
from ..errors import PipelineFailure, ScenarioFormatError
from ..gateway import ModelGateway
from ..orchestration import (
    AgentDescriptor,
    Envelope,
    EngineConfig,
    HandlePicker,
    PipelineEngine,
    PipelineState,
    ReviewOutcome,
    ReviewRule,
    TranscriptEntry,
    WorkerContext,
    WorkerRegistry,
    WorkerReport,
)
from .fsd import ChapterExtract, PreprocessedFSD, preprocess_fsd, retrieve_chapter
from .markdown import TestScenario, parse_scenario, serialize_scenario
from .spreadsheet import build_model, to_csv_bytes, to_xlsx_bytes

logger = logging.getLogger(__name__)

DECLARED_ORDER = ["retriever", "writer", "fact-checker", "translator",
                  "spreadsheet-writer"]

COMPLETION_TEMPLATE = (
    "The entire process has been completed successfully. The test scenario has "
    "been created, fact-checked, translated into {language}, and written to an "
    "Excel file. If you need any further assistance or modifications, please "
    "let me know!"
)

# Hard-coded acceptance criteria handed to the writer; may become
# configuration later.
WRITER_CRITERIA = (
    "- Ground every step in the provided chapter text; never invent behavior.\n"
    "- Cover the main flow and each stated constraint or limit.\n"
    "- Each step has one concrete user action and one observable expected result.\n"
    "- Number steps consecutively from 1."
)

WRITER_ROLE_PROMPT = (
    "You write manual test scenarios from functional specification excerpts.\n"
    "Reply with exactly this markdown structure and nothing else:\n"
    "# <title>\n\nSource section: <heading>\nLanguage: <language tag>\n\n"
    "Preconditions:\n- <one per line>\n\n"
    "| Step No. | Action | Expected Result |\n| --- | --- | --- |\n"
    "| 1 | <action> | <expected result> |\n\n"
    f"Criteria:\n{WRITER_CRITERIA}"
)

FACTCHECK_ROLE_PROMPT = (
    "You verify a test scenario against the specification excerpt it was "
    "written from, flagging unsupported or contradicting content.\n"
    "Reply with 'VERDICT: PASS' or 'VERDICT: FAIL' on the first line. After a "
    "FAIL, add one line per problem: 'ISSUE <step number or global>: "
    "<description>'."
)

TRANSLATOR_ROLE_PROMPT = (
    "You translate test scenarios. Keep the markdown structure, the step count "
    "and the step numbering identical; translate only the natural-language "
    "content and set the Language line to the target tag."
)

LANGUAGE_NAMES = {
    "en": "English", "de": "German", "fr": "French", "es": "Spanish",
    "it": "Italian", "pt": "Portuguese", "nl": "Dutch", "pl": "Polish",
    "cs": "Czech", "sk": "Slovak", "hu": "Hungarian", "sv": "Swedish",
}
_NAME_TO_TAG = {name.lower(): tag for tag, name in LANGUAGE_NAMES.items()}


def normalize_language(value: str) -> str:
    """Map a language name or tag to its tag ('German' -> 'de')."""
    return _NAME_TO_TAG.get(value.strip().lower(), value.strip().lower())


def display_language(tag: str) -> str:
    return LANGUAGE_NAMES.get(tag, tag)


def parse_section_from_prompt(prompt: str) -> str | None:
    """Pull the section name out of a request like
    'Please create a test scenario based on section Password.'"""
    m = re.search(r"(?:section|chapter)\s+(.+)", prompt, re.IGNORECASE)
    if not m:
        return None
    name = re.split(r",\s|\.\s", m.group(1))[0]     # stop at the next clause
    name = name.strip().rstrip(".?!").strip().strip("\"'")
    return name or None


def parse_language_from_prompt(prompt: str) -> str | None:
    for m in re.finditer(r"\b(?:in|into|to)\s+(?:the\s+)?([A-Za-z]+)", prompt):
        tag = _NAME_TO_TAG.get(m.group(1).lower())
        if tag:
            return tag
    return None


# ── model-facing operations ──────────────────────────────────────────────


def write_scenario(gateway: ModelGateway, extract: ChapterExtract,
                   issues: str | None = None, language: str = "en",
                   reasks: int = 2) -> TestScenario:
    """Ask the writer model for a scenario and parse its canonical markdown.

    In revision mode the reported issues are included verbatim in the prompt.
    An unparseable reply is re-asked up to ``reasks`` times, then the pipeline
    stage fails.
    """
    if not extract.body.strip():
        raise ValueError("chapter extract is empty")
    prompt = (f"Chapter '{extract.heading}':\n{extract.body}\n\n"
              f"Write the test scenario (language: {language}).")
    if issues:
        prompt += f"\n\nRevise your previous scenario. Reported issues:\n{issues}"
    last_error: ScenarioFormatError | None = None
    for attempt in range(reasks + 1):
        reply = gateway.complete("writer", WRITER_ROLE_PROMPT, prompt)
        try:
            return parse_scenario(reply)
        except ScenarioFormatError as exc:
            last_error = exc
            logger.warning("writer reply unparseable (attempt %d): %s",
                           attempt + 1, exc)
            prompt = ("Your previous reply did not follow the required markdown "
                      f"structure ({exc}). Reply again with exactly the canonical "
                      "structure.")
    raise PipelineFailure(
        f"scenario writer output unparseable after {reasks} re-asks: {last_error}")


@dataclass
class FactCheckReport:
    verdict: str                              # pass | fail
    issues: list[tuple[str, str]] = field(default_factory=list)

    def render(self) -> str:
        lines = [f"VERDICT: {self.verdict.upper()}"]
        lines.extend(f"ISSUE {ref}: {desc}" for ref, desc in self.issues)
        return "\n".join(lines) + "\n"

    def summary_line(self) -> str:
        if self.verdict == "pass":
            return "VERDICT: PASS"
        digest = "; ".join(f"{ref}: {desc}" for ref, desc in self.issues)
        return f"VERDICT: FAIL ({len(self.issues)} issues)\n{digest}"


_VERDICT_RE = re.compile(r"^\s*VERDICT:\s*(PASS|FAIL)\s*$", re.IGNORECASE | re.MULTILINE)
_ISSUE_RE = re.compile(r"^\s*ISSUE\s+(\d+|global)\s*:\s*(.+?)\s*$",
                       re.IGNORECASE | re.MULTILINE)


def fact_check(gateway: ModelGateway, scenario_md: str, extract: ChapterExtract,
               reasks: int = 2) -> FactCheckReport:
    """Verify a scenario against the originally retrieved chapter.

    The reply format is constrained to a VERDICT line plus ISSUE lines. A
    reply with no parseable verdict is re-asked up to ``reasks`` times and
    then conservatively treated as a failure.
    """
    prompt = (f"Chapter '{extract.heading}':\n{extract.body}\n\n"
              f"Test scenario:\n{scenario_md}\nGive your verdict.")
    for attempt in range(reasks + 1):
        reply = gateway.complete("fact-checker", FACTCHECK_ROLE_PROMPT, prompt)
        verdict_match = _VERDICT_RE.search(reply)
        if verdict_match:
            verdict = verdict_match.group(1).lower()
            issues = [(ref.lower(), desc) for ref, desc in _ISSUE_RE.findall(reply)]
            if verdict == "fail" and not issues:
                issues = [("global", "no details provided")]
            return FactCheckReport(verdict=verdict,
                                   issues=issues if verdict == "fail" else [])
        logger.warning("fact-check reply without verdict (attempt %d)", attempt + 1)
        prompt = ("Your previous reply had no verdict line. Reply with "
                  "'VERDICT: PASS' or 'VERDICT: FAIL' plus ISSUE lines.")
    return FactCheckReport(verdict="fail", issues=[("global", "unparseable verdict")])


def translate_scenario(gateway: ModelGateway, scenario: TestScenario,
                       target_language: str) -> TestScenario:
    """Translate a scenario, preserving structure; identity when already there.

    A reply that drops or adds steps gets one re-ask; a second structural
    drift fails the stage.
    """
    target = normalize_language(target_language)
    if normalize_language(scenario.language) == target:
        return scenario
    prompt = (f"Translate into {display_language(target)} (tag: {target}):\n\n"
              f"{serialize_scenario(scenario)}")
    for attempt in range(2):
        reply = gateway.complete("translator", TRANSLATOR_ROLE_PROMPT, prompt)
        try:
            translated = parse_scenario(reply)
        except ScenarioFormatError as exc:
            logger.warning("translation unparseable (attempt %d): %s", attempt + 1, exc)
            prompt = (f"Your previous reply was not valid scenario markdown ({exc}). "
                      "Translate again, keeping the exact structure.")
            continue
        if len(translated.steps) != len(scenario.steps):
            logger.warning("translation changed step count %d -> %d (attempt %d)",
                           len(scenario.steps), len(translated.steps), attempt + 1)
            prompt = (f"Your previous translation had {len(translated.steps)} steps "
                      f"instead of {len(scenario.steps)}. Translate again without "
                      "dropping or adding steps.")
            continue
        translated.language = target
        return translated.validate()
    raise PipelineFailure(
        "translator failed to preserve scenario structure after one re-ask")


def emit_spreadsheet(scenario: TestScenario) -> tuple[bytes, bytes]:
    """Deterministic CSV and XLSX bytes for a scenario."""
    model = build_model(scenario)
    return to_csv_bytes(model), to_xlsx_bytes(model)


# ── workers ──────────────────────────────────────────────────────────────


@dataclass
class ScenarioJobConfig:
    section: str | None = None              # overrides the prompt
    target_language: str | None = None      # overrides prompt detection
    fsd_language: str = "en"
    engine: EngineConfig = field(default_factory=EngineConfig)

    def resolve_language(self, user_prompt: str) -> str:
        if self.target_language:
            return normalize_language(self.target_language)
        detected = parse_language_from_prompt(user_prompt)
        return detected or normalize_language(self.fsd_language)


_ISSUES_MARKER = "Reported issues:\n"


def _envelope_issues(envelope: Envelope) -> str | None:
    _, marker, issues = envelope.text.partition(_ISSUES_MARKER)
    return issues if marker else None


def _handle_of(envelope: Envelope, kind: str) -> ArtifactHandle:
    for handle in envelope.handles:
        if handle.kind == kind:
            return handle
    raise PipelineFailure(f"envelope carries no {kind} handle")


def build_scenario_workers(gateway: ModelGateway, config: ScenarioJobConfig
                           ) -> tuple[WorkerRegistry, list[ReviewRule]]:
    """Register the five scenario workers and the fact-check review rule."""

    def retriever(envelope: Envelope, ctx: WorkerContext):
        fsd = PreprocessedFSD.from_json(
            ctx.store.get_text(_handle_of(envelope, "fsd-preprocessed")))
        requested = config.section or parse_section_from_prompt(ctx.user_prompt)
        if not requested:
            raise PipelineFailure("user prompt does not name a section")
        extract = retrieve_chapter(fsd, requested)
        handle = ctx.store.put("chapter-extract", extract.to_json(),
                               created_by="retriever")
        return (f"Retrieved chapter {extract.heading!r} "
                f"({len(extract.body)} chars).", [handle])

    def writer(envelope: Envelope, ctx: WorkerContext):
        extract = ChapterExtract.from_json(
            ctx.store.get_text(_handle_of(envelope, "chapter-extract")))
        scenario = write_scenario(gateway, extract,
                                  issues=_envelope_issues(envelope),
                                  language=config.fsd_language)
        handle = ctx.store.put("scenario-md", serialize_scenario(scenario),
                               created_by="writer")
        return (f"Scenario {scenario.title!r} drafted with "
                f"{len(scenario.steps)} steps.", [handle])

    def fact_checker(envelope: Envelope, ctx: WorkerContext):
        scenario_md = ctx.store.get_text(_handle_of(envelope, "scenario-md"))
        extract = ChapterExtract.from_json(
            ctx.store.get_text(_handle_of(envelope, "chapter-extract")))
        report = fact_check(gateway, scenario_md, extract)
        handle = ctx.store.put("factcheck-report", report.render(),
                               created_by="fact-checker")
        return report.summary_line(), [handle]

    def translator(envelope: Envelope, ctx: WorkerContext):
        scenario = parse_scenario(
            ctx.store.get_text(_handle_of(envelope, "scenario-md")))
        target = config.resolve_language(ctx.user_prompt)
        translated = translate_scenario(gateway, scenario, target)
        handle = ctx.store.put("scenario-translated",
                               serialize_scenario(translated),
                               created_by="translator")
        if translated is scenario:
            summary = f"Translation skipped: already in {display_language(target)}."
        else:
            summary = f"Scenario translated into {display_language(target)}."
        return summary, [handle]

    def spreadsheet_writer(envelope: Envelope, ctx: WorkerContext):
        scenario = parse_scenario(
            ctx.store.get_text(_handle_of(envelope, "scenario-translated")))
        csv_bytes, xlsx_bytes = emit_spreadsheet(scenario)
        csv_handle = ctx.store.put("spreadsheet", csv_bytes,
                                   created_by="spreadsheet-writer")
        xlsx_handle = ctx.store.put("spreadsheet", xlsx_bytes,
                                    created_by="spreadsheet-writer")
        return (f"Spreadsheet written: {len(scenario.steps)} data rows "
                f"(CSV and XLSX)."), [csv_handle, xlsx_handle]

    registry = WorkerRegistry()
    registry.register(AgentDescriptor(
        "retriever", "Finds the user-requested chapter in the FSD.",
        accepts=frozenset({"fsd-preprocessed"}),
        produces=frozenset({"chapter-extract"})), retriever)
    registry.register(AgentDescriptor(
        "writer", WRITER_ROLE_PROMPT,
        accepts=frozenset({"chapter-extract"}),
        produces=frozenset({"scenario-md"})), writer)
    registry.register(AgentDescriptor(
        "fact-checker", FACTCHECK_ROLE_PROMPT,
        accepts=frozenset({"scenario-md", "chapter-extract"}),
        produces=frozenset({"factcheck-report"})), fact_checker)
    registry.register(AgentDescriptor(
        "translator", TRANSLATOR_ROLE_PROMPT,
        accepts=frozenset({"scenario-md"}),
        produces=frozenset({"scenario-translated"})), translator)
    registry.register(AgentDescriptor(
        "spreadsheet-writer", "Writes the hard-coded spreadsheet layout.",
        accepts=frozenset({"scenario-translated"}),
        produces=frozenset({"spreadsheet"})), spreadsheet_writer)

    rules = [ReviewRule(reviewer="fact-checker", producer="writer",
                        interpret=interpret_factcheck_summary)]
    return registry, rules


def interpret_factcheck_summary(report: WorkerReport) -> ReviewOutcome:
    """Supervisor-side reading of the fact checker's natural-language summary."""
    first_line, _, rest = report.summary.partition("\n")
    if first_line.strip().upper().startswith("VERDICT: FAIL"):
        return ReviewOutcome(verdict="fail", issues=rest.strip())
    return ReviewOutcome(verdict="pass")


# ── job entry point ──────────────────────────────────────────────────────


@dataclass
class ScenarioJobResult:
    status: str                             # done | aborted
    final_text: str
    diagnostic: str | None
    scenario: TestScenario | None
    csv_bytes: bytes | None
    xlsx_bytes: bytes | None
    transcript: list[TranscriptEntry]
    artifacts: list[ArtifactHandle]
    store: ArtifactStore


def run_scenario_job(gateway: ModelGateway, fsd_text: str, user_prompt: str,
                     images: dict[str, bytes] | str | None = None,
                     config: ScenarioJobConfig | None = None,
                     store: ArtifactStore | None = None,
                     handle_picker: HandlePicker | None = None,
                     source_name: str = "fsd",
                     declared_order: list[str] | None = None) -> ScenarioJobResult:
    """Preprocess the FSD, run the session, collect the outputs.

    ``declared_order`` defaults to the full five-agent order; a prefix of it
    (e.g. without translation and spreadsheet emission) is also valid.
    """
    config = config or ScenarioJobConfig()
    if store is None:       # explicit: an empty ArtifactStore is falsy
        store = ArtifactStore()
    fsd = preprocess_fsd(fsd_text, images=images,
                         captioner=gateway.caption_image, source_name=source_name)
    store.put("fsd-source", fsd_text, created_by="user")
    store.put("fsd-preprocessed", fsd.to_json(), created_by="preprocessor")

    language = config.resolve_language(user_prompt)

    def final_text(state: PipelineState) -> str:
        return COMPLETION_TEMPLATE.format(language=display_language(language))

    registry, rules = build_scenario_workers(gateway, config)
    engine = PipelineEngine(registry, store, config=config.engine,
                            review_rules=rules, handle_picker=handle_picker,
                            final_text_builder=final_text)
    session = engine.run_session(declared_order or DECLARED_ORDER, user_prompt)

    csv_bytes = xlsx_bytes = None
    scenario = None
    if session.status == "done":
        for handle in store.handles("spreadsheet"):
            content = store.get(handle)
            data = content if isinstance(content, bytes) else content.encode("utf-8")
            if data[:4] == b"PK\x03\x04":
                xlsx_bytes = data
            else:
                csv_bytes = data
        translated = store.latest("scenario-translated")
        if translated is not None:
            scenario = parse_scenario(store.get_text(translated))
    return ScenarioJobResult(
        status=session.status,
        final_text=session.final_text,
        diagnostic=session.diagnostic,
        scenario=scenario,
        csv_bytes=csv_bytes,
        xlsx_bytes=xlsx_bytes,
        transcript=session.transcript,
        artifacts=session.artifacts,
        store=store,
    )
