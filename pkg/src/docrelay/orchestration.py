"""Supervisor-worker pipeline engine.

All communication forms a star: the supervisor synthesizes an envelope for
one worker at a time, the worker verifies its input, does its job against the
artifact store, and reports back in natural language plus artifact handles.
The supervisor never sees artifact bodies, only summaries and handles.

Routing is deterministic: the declared invocation order drives the cursor
forward, worker-side input rejection triggers a bounded re-route with handles
rebuilt from the store by kind, and a failing review report (e.g. from a fact
checker) routes back to the producing agent within a bounded revision budget.
"""

from __future__ import annotations

import itertools
import json
import logging
import uuid
from dataclasses import dataclass, field
from typing import Callable

from .artifacts import ArtifactHandle, ArtifactStore
from .errors import DocRelayError, PipelineFailure

logger = logging.getLogger(__name__)

SUPERVISOR_ID = "supervisor"

TRUNCATION_MARKER = " …[truncated]"


@dataclass(frozen=True)
class AgentDescriptor:
    """Worker identity plus the input/output contract used for verification."""

    agent_id: str
    role_prompt: str
    accepts: frozenset[str] = frozenset()
    produces: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        overlap = self.accepts & self.produces
        if overlap:
            raise ValueError(f"accepts/produces overlap for {self.agent_id}: {overlap}")


@dataclass(frozen=True)
class Envelope:
    """The only message type on the wire; always has the supervisor at one end."""

    from_agent: str
    to_agent: str
    text: str
    handles: tuple[ArtifactHandle, ...]
    step_index: int

    def __post_init__(self) -> None:
        if (self.from_agent == SUPERVISOR_ID) == (self.to_agent == SUPERVISOR_ID):
            raise ValueError("exactly one envelope endpoint must be the supervisor")


@dataclass
class WorkerReport:
    agent_id: str
    status: str                             # ok | input_rejected | failed
    summary: str
    produced: tuple[ArtifactHandle, ...] = ()
    reject_reason: str | None = None
    step_index: int = -1

    def __post_init__(self) -> None:
        if self.status not in ("ok", "input_rejected", "failed"):
            raise ValueError(f"invalid report status: {self.status}")
        if self.status == "input_rejected" and (self.produced or not self.reject_reason):
            raise ValueError("rejected report must carry a reason and no artifacts")


TranscriptEntry = Envelope | WorkerReport

WorkerHandler = Callable[[Envelope, "WorkerContext"], tuple[str, list[ArtifactHandle]]]


@dataclass
class WorkerContext:
    """What a worker may touch besides its envelope."""

    store: ArtifactStore
    user_prompt: str


@dataclass(frozen=True)
class Worker:
    descriptor: AgentDescriptor
    handler: WorkerHandler


class WorkerRegistry:
    def __init__(self) -> None:
        self._workers: dict[str, Worker] = {}

    def register(self, descriptor: AgentDescriptor, handler: WorkerHandler) -> "WorkerRegistry":
        from .errors import RegistrationError

        if descriptor.agent_id == SUPERVISOR_ID:
            raise RegistrationError("the supervisor is not a registrable worker")
        if descriptor.agent_id in self._workers:
            raise RegistrationError(f"duplicate agent id: {descriptor.agent_id}")
        self._workers[descriptor.agent_id] = Worker(descriptor, handler)
        return self

    def get(self, agent_id: str) -> Worker:
        from .errors import RegistrationError

        try:
            return self._workers[agent_id]
        except KeyError:
            raise RegistrationError(f"agent not registered: {agent_id}") from None

    def __contains__(self, agent_id: str) -> bool:
        return agent_id in self._workers

    def __len__(self) -> int:
        return len(self._workers)


def check_input(descriptor: AgentDescriptor, envelope: Envelope,
                store: ArtifactStore) -> tuple[bool, str | None]:
    """Worker-side input verification.

    Accepts iff the envelope's handle kinds cover every kind the worker
    declares in ``accepts``; the rejection reason names what is missing and
    what arrived unexpectedly. A handle that does not resolve in the store is
    rejected outright.
    """
    if envelope.to_agent != descriptor.agent_id:
        raise ValueError(f"envelope addressed to {envelope.to_agent}, "
                         f"not {descriptor.agent_id}")
    for handle in envelope.handles:
        if not store.contains(handle):
            return False, f"unresolvable artifact: {handle.id}"
    kinds = {handle.kind for handle in envelope.handles}
    missing = sorted(descriptor.accepts - kinds)
    if missing:
        unexpected = sorted(kinds - descriptor.accepts)
        reason = f"missing input kind(s): {', '.join(missing)}"
        if unexpected:
            reason += f"; unexpected kind(s): {', '.join(unexpected)}"
        return False, reason
    return True, None


@dataclass(frozen=True)
class RoutingDecision:
    action: str                             # invoke | finish | abort
    agent_id: str | None = None
    envelope: Envelope | None = None
    final_text: str | None = None
    diagnostic: str | None = None


@dataclass(frozen=True)
class ReviewOutcome:
    verdict: str                            # pass | fail
    issues: str = ""


@dataclass(frozen=True)
class ReviewRule:
    """Routes a reviewer's failing report back to the producing agent."""

    reviewer: str
    producer: str
    interpret: Callable[[WorkerReport], ReviewOutcome]


@dataclass
class EngineConfig:
    max_revisions: int = 3                  # per reviewed agent
    max_reroutes: int = 2                   # per cursor position
    context_budget: int = 4000              # max chars of any supervisor envelope


@dataclass
class PipelineState:
    session_id: str
    declared_order: list[str]
    user_prompt: str
    cursor: int = 0
    revision_count: dict[str, int] = field(default_factory=dict)
    reroute_count: dict[int, int] = field(default_factory=dict)
    pending_issues: dict[str, str] = field(default_factory=dict)
    transcript: list[TranscriptEntry] = field(default_factory=list)
    status: str = "running"                 # running | done | aborted
    dispatch_count: int = 0
    _steps: "itertools.count[int]" = field(default_factory=itertools.count)

    def next_step(self) -> int:
        return next(self._steps)


@dataclass
class SessionResult:
    session_id: str
    status: str                             # done | aborted
    final_text: str
    diagnostic: str | None
    artifacts: list[ArtifactHandle]
    transcript: list[TranscriptEntry]


# Picks the handles for the first dispatch at a cursor position; tests inject
# faults here. Re-routes always fall back to kind matching against the store.
HandlePicker = Callable[[PipelineState, AgentDescriptor], list[ArtifactHandle]]

FinalTextBuilder = Callable[[PipelineState], str]


class PipelineEngine:
    """Deterministic supervisor for a registry of workers."""

    def __init__(self, registry: WorkerRegistry, store: ArtifactStore,
                 config: EngineConfig | None = None,
                 review_rules: list[ReviewRule] | None = None,
                 handle_picker: HandlePicker | None = None,
                 final_text_builder: FinalTextBuilder | None = None):
        self.registry = registry
        self.store = store
        self.config = config or EngineConfig()
        self.review_rules = {rule.reviewer: rule for rule in (review_rules or [])}
        self.handle_picker = handle_picker
        self.final_text_builder = final_text_builder or self._default_final_text

    # ── routing ──────────────────────────────────────────────────────────

    def route_next(self, state: PipelineState,
                   last: WorkerReport | None) -> RoutingDecision:
        """Decide the next supervisor action from the last worker report.

        Mutates cursor, revision and re-route counters on ``state``;
        deterministic for a given state and report.
        """
        if state.status != "running":
            raise ValueError(f"session is not running (status={state.status})")

        if last is None:
            if not state.declared_order:
                return RoutingDecision("finish", final_text=self.final_text_builder(state))
            return self._invoke_at_cursor(state, initial=True)

        if last.status == "input_rejected":
            position = state.cursor
            agent_id = state.declared_order[position]
            if state.reroute_count.get(position, 0) >= self.config.max_reroutes:
                return RoutingDecision("abort", diagnostic=(
                    f"re-route loop: budget of {self.config.max_reroutes} exhausted at "
                    f"position {position} ({agent_id}): {last.reject_reason}"))
            state.reroute_count[position] = state.reroute_count.get(position, 0) + 1
            logger.info("re-routing to %s (attempt %d) after rejection: %s",
                        agent_id, state.reroute_count[position], last.reject_reason)
            return self._invoke_at_cursor(state, initial=False)

        if last.status == "failed":
            return RoutingDecision("abort", diagnostic=(
                f"worker {last.agent_id} failed: {last.summary}"))

        rule = self.review_rules.get(last.agent_id)
        if rule is not None:
            outcome = rule.interpret(last)
            if outcome.verdict == "fail":
                if state.revision_count.get(rule.producer, 0) >= self.config.max_revisions:
                    return RoutingDecision("abort", diagnostic=(
                        f"revision loop: budget of {self.config.max_revisions} exhausted "
                        f"for {rule.producer} (reviewer {rule.reviewer} still failing)"))
                state.revision_count[rule.producer] = \
                    state.revision_count.get(rule.producer, 0) + 1
                state.pending_issues[rule.producer] = outcome.issues
                state.cursor = state.declared_order.index(rule.producer)
                logger.info("review failed; routing back to %s (revision %d)",
                            rule.producer, state.revision_count[rule.producer])
                return self._invoke_at_cursor(state, initial=False)

        state.cursor += 1
        if state.cursor >= len(state.declared_order):
            return RoutingDecision("finish", final_text=self.final_text_builder(state))
        return self._invoke_at_cursor(state, initial=True)

    def _invoke_at_cursor(self, state: PipelineState, initial: bool) -> RoutingDecision:
        agent_id = state.declared_order[state.cursor]
        descriptor = self.registry.get(agent_id).descriptor
        if initial and self.handle_picker is not None:
            handles = self.handle_picker(state, descriptor)
        else:
            handles = self._match_handles(descriptor)
        envelope = Envelope(
            from_agent=SUPERVISOR_ID,
            to_agent=agent_id,
            text=self._envelope_text(state, agent_id),
            handles=tuple(handles),
            step_index=state.next_step(),
        )
        return RoutingDecision("invoke", agent_id=agent_id, envelope=envelope)

    def _match_handles(self, descriptor: AgentDescriptor) -> list[ArtifactHandle]:
        """Kind matching against the store; newest artifact of each kind wins."""
        handles = []
        for kind in sorted(descriptor.accepts):
            latest = self.store.latest(kind)
            if latest is not None:
                handles.append(latest)
        return handles

    def _envelope_text(self, state: PipelineState, agent_id: str) -> str:
        text = state.user_prompt
        issues = state.pending_issues.pop(agent_id, None)
        if issues:
            text += f"\n\nRevise your previous output. Reported issues:\n{issues}"
        return clip_text(text, self.config.context_budget)

    # ── session loop ─────────────────────────────────────────────────────

    def run_session(self, declared_order: list[str], user_prompt: str,
                    attachments: list[tuple[str, str | bytes]] | None = None,
                    session_id: str | None = None) -> SessionResult:
        """Run one session to completion.

        Terminates in at most len(order) * (1 + max_revisions) *
        (1 + max_reroutes) worker dispatches; returns a done or aborted
        result, never raises for in-pipeline failures.
        """
        state = PipelineState(
            session_id=session_id or uuid.uuid4().hex[:12],
            declared_order=list(declared_order),
            user_prompt=user_prompt,
        )
        seq_watermark = len(self.store)
        for kind, content in attachments or []:
            self.store.put(kind, content, created_by="user")

        missing = [a for a in declared_order if a not in self.registry]
        if missing:
            diagnostic = ("no workers registered" if len(self.registry) == 0
                          else f"agent not registered: {', '.join(missing)}")
            state.status = "aborted"
            return self._result(state, "", diagnostic, seq_watermark)

        budget = (len(declared_order)
                  * (1 + self.config.max_revisions)
                  * (1 + self.config.max_reroutes))
        last: WorkerReport | None = None
        final_text = ""
        diagnostic: str | None = None
        while state.status == "running":
            decision = self.route_next(state, last)
            if decision.action == "invoke":
                if state.dispatch_count >= budget:
                    state.status = "aborted"
                    diagnostic = f"dispatch budget of {budget} exceeded"
                    break
                last = self._dispatch(state, decision)
            elif decision.action == "finish":
                state.status = "done"
                final_text = decision.final_text or ""
            else:
                state.status = "aborted"
                diagnostic = decision.diagnostic
                logger.warning("session %s aborted: %s", state.session_id, diagnostic)
        return self._result(state, final_text, diagnostic, seq_watermark)

    def _dispatch(self, state: PipelineState, decision: RoutingDecision) -> WorkerReport:
        envelope = decision.envelope
        assert envelope is not None and decision.agent_id is not None
        state.transcript.append(envelope)
        state.dispatch_count += 1
        worker = self.registry.get(decision.agent_id)

        accepted, reason = check_input(worker.descriptor, envelope, self.store)
        if not accepted:
            report = WorkerReport(agent_id=decision.agent_id, status="input_rejected",
                                  summary=f"input rejected: {reason}",
                                  reject_reason=reason)
        else:
            report = self._execute(worker, envelope, state)
        report.step_index = state.next_step()
        report.summary = clip_text(report.summary, self.config.context_budget)
        state.transcript.append(report)
        return report

    def _execute(self, worker: Worker, envelope: Envelope,
                 state: PipelineState) -> WorkerReport:
        context = WorkerContext(store=self.store, user_prompt=state.user_prompt)
        agent_id = worker.descriptor.agent_id
        try:
            summary, produced = worker.handler(envelope, context)
        except (PipelineFailure, DocRelayError) as exc:
            return WorkerReport(agent_id=agent_id, status="failed", summary=str(exc))
        produced_kinds = {handle.kind for handle in produced}
        if produced_kinds != set(worker.descriptor.produces):
            return WorkerReport(agent_id=agent_id, status="failed", summary=(
                f"produced kinds {sorted(produced_kinds)} do not match declared "
                f"{sorted(worker.descriptor.produces)}"))
        return WorkerReport(agent_id=agent_id, status="ok", summary=summary,
                            produced=tuple(produced))

    def _default_final_text(self, state: PipelineState) -> str:
        return (f"Completed {len(state.declared_order)} pipeline steps "
                f"for session {state.session_id}.")

    def _result(self, state: PipelineState, final_text: str,
                diagnostic: str | None, seq_watermark: int) -> SessionResult:
        artifacts = [h for h in self.store.handles() if h.seq > seq_watermark]
        return SessionResult(session_id=state.session_id, status=state.status,
                             final_text=final_text, diagnostic=diagnostic,
                             artifacts=artifacts, transcript=list(state.transcript))


def clip_text(text: str, budget: int) -> str:
    """Hard-truncate text to the supervisor context budget."""
    if len(text) <= budget:
        return text
    return text[: budget - len(TRUNCATION_MARKER)] + TRUNCATION_MARKER


# ── transcript helpers ───────────────────────────────────────────────────


def export_transcript(transcript: list[TranscriptEntry]) -> str:
    """Line-delimited JSON transcript: {step, from, to, text, handles[], status}."""
    lines = []
    for entry in transcript:
        if isinstance(entry, Envelope):
            record = {
                "step": entry.step_index,
                "from": entry.from_agent,
                "to": entry.to_agent,
                "text": entry.text,
                "handles": [{"id": h.id, "kind": h.kind} for h in entry.handles],
                "status": "dispatch",
            }
        else:
            record = {
                "step": entry.step_index,
                "from": entry.agent_id,
                "to": SUPERVISOR_ID,
                "text": entry.summary,
                "handles": [{"id": h.id, "kind": h.kind} for h in entry.produced],
                "status": entry.status,
            }
        lines.append(json.dumps(record, ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")


def dispatch_counts(transcript: list[TranscriptEntry]) -> dict[str, int]:
    """Number of supervisor dispatches per worker."""
    counts: dict[str, int] = {}
    for entry in transcript:
        if isinstance(entry, Envelope) and entry.from_agent == SUPERVISOR_ID:
            counts[entry.to_agent] = counts.get(entry.to_agent, 0) + 1
    return counts


def ok_dispatch_order(transcript: list[TranscriptEntry]) -> list[str]:
    """Order in which agents first reported ok.

    Revision loops re-dispatch earlier agents, so the first-ok order is the
    stable notion of order compliance: on a successful run it must equal the
    declared order.
    """
    seen: list[str] = []
    for entry in transcript:
        if isinstance(entry, WorkerReport) and entry.status == "ok":
            if entry.agent_id not in seen:
                seen.append(entry.agent_id)
    return seen
