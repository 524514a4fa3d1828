"""Engine behavior: registration, input verification, routing, bounded loops,
star and context-minimality properties on the generic engine."""

import json

import pytest

from docrelay.artifacts import ArtifactStore
from docrelay.errors import PipelineFailure, RegistrationError
from docrelay.orchestration import (
    SUPERVISOR_ID,
    AgentDescriptor,
    Envelope,
    EngineConfig,
    PipelineEngine,
    ReviewOutcome,
    ReviewRule,
    WorkerRegistry,
    WorkerReport,
    check_input,
    dispatch_counts,
    export_transcript,
    ok_dispatch_order,
)


def echo_worker(kind_in: str | None, kind_out: str, text: str = "payload body"):
    """Worker that emits one artifact of kind_out."""

    def handler(envelope, ctx):
        handle = ctx.store.put(kind_out, f"{text} [{kind_out}]",
                               created_by=envelope.to_agent)
        return f"done: {kind_out}", [handle]

    accepts = frozenset({kind_in}) if kind_in else frozenset()
    return AgentDescriptor(f"agent-{kind_out}", "role", accepts=accepts,
                           produces=frozenset({kind_out})), handler


def chain_engine(kinds: list[str], store=None, **engine_kwargs):
    """Engine with a linear chain: each worker consumes the previous kind."""
    registry = WorkerRegistry()
    previous = None
    order = []
    for kind in kinds:
        descriptor, handler = echo_worker(previous, kind)
        registry.register(descriptor, handler)
        order.append(descriptor.agent_id)
        previous = kind
    return PipelineEngine(registry, store or ArtifactStore(), **engine_kwargs), order


class TestRegistry:
    def test_register_five_workers(self):
        registry = WorkerRegistry()
        for i in range(5):
            descriptor, handler = echo_worker(None, f"kind-{i}")
            registry.register(descriptor, handler)
        assert len(registry) == 5

    def test_duplicate_id_rejected(self):
        registry = WorkerRegistry()
        descriptor, handler = echo_worker(None, "kind-x")
        registry.register(descriptor, handler)
        with pytest.raises(RegistrationError, match="duplicate"):
            registry.register(descriptor, handler)

    def test_run_with_no_workers_aborts(self):
        engine = PipelineEngine(WorkerRegistry(), ArtifactStore())
        result = engine.run_session(["ghost"], "prompt")
        assert result.status == "aborted"
        assert "no workers" in result.diagnostic


class TestCheckInput:
    def setup_method(self):
        self.store = ArtifactStore()
        self.fsd = self.store.put("fsd-preprocessed", "fsd body")
        self.scenario = self.store.put("scenario-md", "scenario body")
        self.descriptor = AgentDescriptor(
            "retriever", "role", accepts=frozenset({"fsd-preprocessed"}),
            produces=frozenset({"chapter-extract"}))

    def envelope(self, handles):
        return Envelope(from_agent=SUPERVISOR_ID, to_agent="retriever",
                        text="go", handles=tuple(handles), step_index=0)

    def test_wrong_kind_rejected_with_named_kinds(self):
        ok, reason = check_input(self.descriptor, self.envelope([self.scenario]),
                                 self.store)
        assert not ok
        assert "fsd-preprocessed" in reason and "scenario-md" in reason

    def test_right_kind_accepted(self):
        ok, reason = check_input(self.descriptor, self.envelope([self.fsd]),
                                 self.store)
        assert ok and reason is None

    def test_empty_accepts_vacuously_accepts(self):
        descriptor = AgentDescriptor("free", "role")
        envelope = Envelope(from_agent=SUPERVISOR_ID, to_agent="free", text="go",
                            handles=(), step_index=0)
        assert check_input(descriptor, envelope, self.store) == (True, None)

    def test_dangling_handle_rejected(self):
        other = ArtifactStore()
        dangling = other.put("fsd-preprocessed", "elsewhere")
        ok, reason = check_input(self.descriptor, self.envelope([dangling]),
                                 self.store)
        assert not ok and "unresolvable artifact" in reason

    def test_descriptor_accepts_produces_must_not_overlap(self):
        with pytest.raises(ValueError):
            AgentDescriptor("x", "r", accepts=frozenset({"a"}),
                            produces=frozenset({"a"}))


class TestEnvelope:
    def test_star_shape_enforced_on_construction(self):
        with pytest.raises(ValueError):
            Envelope(from_agent="w1", to_agent="w2", text="x", handles=(),
                     step_index=0)
        with pytest.raises(ValueError):
            Envelope(from_agent=SUPERVISOR_ID, to_agent=SUPERVISOR_ID, text="x",
                     handles=(), step_index=0)


class TestRouting:
    def test_fresh_state_invokes_first_agent(self):
        engine, order = chain_engine(["a", "b"])
        state_result = engine.run_session(order, "prompt")
        first = state_result.transcript[0]
        assert isinstance(first, Envelope) and first.to_agent == order[0]

    def test_empty_order_finishes_without_dispatch(self):
        engine, _ = chain_engine(["a"])
        result = engine.run_session([], "prompt")
        assert result.status == "done"
        assert result.transcript == []

    def test_linear_chain_runs_in_order(self):
        engine, order = chain_engine(["a", "b", "c"])
        result = engine.run_session(order, "prompt")
        assert result.status == "done"
        assert ok_dispatch_order(result.transcript) == order

    def test_failed_worker_aborts_with_diagnostic(self):
        registry = WorkerRegistry()

        def exploding(envelope, ctx):
            raise PipelineFailure("boom in worker")

        registry.register(AgentDescriptor("boomer", "r",
                                          produces=frozenset({"k"})), exploding)
        engine = PipelineEngine(registry, ArtifactStore())
        result = engine.run_session(["boomer"], "prompt")
        assert result.status == "aborted"
        assert "boom in worker" in result.diagnostic

    def test_produced_kind_mismatch_becomes_failure(self):
        registry = WorkerRegistry()

        def liar(envelope, ctx):
            return "ok", [ctx.store.put("other-kind", "x", created_by="liar")]

        registry.register(AgentDescriptor("liar", "r",
                                          produces=frozenset({"declared"})), liar)
        engine = PipelineEngine(registry, ArtifactStore())
        result = engine.run_session(["liar"], "prompt")
        assert result.status == "aborted"
        assert "do not match declared" in result.diagnostic


class TestRejectionRerouting:
    def test_misdelivery_rejected_then_rerouted_to_completion(self):
        store = ArtifactStore()
        wrong = store.put("scenario-md", "wrong artifact for the retriever")
        store.put("fsd-preprocessed", "the right input")
        registry = WorkerRegistry()
        descriptor = AgentDescriptor("retriever", "r",
                                     accepts=frozenset({"fsd-preprocessed"}),
                                     produces=frozenset({"chapter-extract"}))

        def handler(envelope, ctx):
            handle = ctx.store.put("chapter-extract", "extract", created_by="retriever")
            return "extracted", [handle]

        registry.register(descriptor, handler)
        fault = {"armed": True}

        def picker(state, desc):
            if fault.pop("armed", False):
                return [wrong]
            return [store.latest(kind) for kind in sorted(desc.accepts)]

        engine = PipelineEngine(registry, store, handle_picker=picker)
        result = engine.run_session(["retriever"], "prompt")
        assert result.status == "done"
        statuses = [e.status for e in result.transcript
                    if isinstance(e, WorkerReport)]
        assert statuses == ["input_rejected", "ok"]

    def test_reroute_budget_exhaustion_aborts_with_named_loop(self):
        registry = WorkerRegistry()
        descriptor = AgentDescriptor("picky", "r",
                                     accepts=frozenset({"never-stored"}),
                                     produces=frozenset({"out"}))
        registry.register(descriptor, lambda envelope, ctx: ("never runs", []))
        config = EngineConfig(max_reroutes=2)
        engine = PipelineEngine(registry, ArtifactStore(), config=config)
        result = engine.run_session(["picky"], "prompt")
        assert result.status == "aborted"
        assert "re-route loop" in result.diagnostic and "picky" in result.diagnostic
        # initial dispatch + max_reroutes re-deliveries
        assert dispatch_counts(result.transcript)["picky"] == 3

    def test_single_rejection_never_fails_without_reroute(self):
        # rejection safety: at least one re-route is always attempted
        registry = WorkerRegistry()
        store = ArtifactStore()
        store.put("needed", "content")
        descriptor = AgentDescriptor("w", "r", accepts=frozenset({"needed"}),
                                     produces=frozenset({"out"}))

        def handler(envelope, ctx):
            return "fine", [ctx.store.put("out", "result", created_by="w")]

        registry.register(descriptor, handler)
        fault = {"armed": True}

        def picker(state, desc):
            if fault.pop("armed", False):
                return []
            return [store.latest("needed")]

        engine = PipelineEngine(registry, store, handle_picker=picker)
        result = engine.run_session(["w"], "prompt")
        assert result.status == "done"
        assert dispatch_counts(result.transcript)["w"] == 2


def make_review_engine(fail_times: int, config: EngineConfig | None = None):
    """Producer/reviewer pair; the reviewer fails its first ``fail_times``
    reports."""
    registry = WorkerRegistry()
    counter = {"reviews": 0}

    def producer(envelope, ctx):
        handle = ctx.store.put("draft", f"draft #{counter['reviews']}",
                               created_by="producer")
        return "drafted", [handle]

    def reviewer(envelope, ctx):
        counter["reviews"] += 1
        verdict = "fail" if counter["reviews"] <= fail_times else "pass"
        handle = ctx.store.put("review", f"review #{counter['reviews']}",
                               created_by="reviewer")
        summary = ("VERDICT: FAIL\nstep 1: wrong" if verdict == "fail"
                   else "VERDICT: PASS")
        return summary, [handle]

    registry.register(AgentDescriptor("producer", "r", accepts=frozenset({}),
                                      produces=frozenset({"draft"})), producer)
    registry.register(AgentDescriptor("reviewer", "r",
                                      accepts=frozenset({"draft"}),
                                      produces=frozenset({"review"})), reviewer)

    def interpret(report):
        if report.summary.startswith("VERDICT: FAIL"):
            return ReviewOutcome("fail", issues=report.summary.partition("\n")[2])
        return ReviewOutcome("pass")

    rules = [ReviewRule(reviewer="reviewer", producer="producer",
                        interpret=interpret)]
    return PipelineEngine(registry, ArtifactStore(), config=config,
                          review_rules=rules)


class TestReviewLoop:
    # oracle: producer dispatches = 1 + number of fail verdicts the engine
    # acted on, capped by the revision budget
    @pytest.mark.parametrize("fails", [0, 1, 2, 3])
    def test_producer_dispatches_match_fail_count(self, fails):
        engine = make_review_engine(fails)
        result = engine.run_session(["producer", "reviewer"], "prompt")
        assert result.status == "done"
        counts = dispatch_counts(result.transcript)
        assert counts["producer"] == fails + 1
        assert counts["reviewer"] == fails + 1

    def test_exceeding_revision_budget_aborts(self):
        engine = make_review_engine(fail_times=4)
        result = engine.run_session(["producer", "reviewer"], "prompt")
        assert result.status == "aborted"
        assert "revision loop" in result.diagnostic
        assert dispatch_counts(result.transcript)["producer"] == 4

    def test_revision_envelope_carries_issues(self):
        engine = make_review_engine(fail_times=1)
        result = engine.run_session(["producer", "reviewer"], "prompt")
        revision_envelopes = [
            e for e in result.transcript
            if isinstance(e, Envelope) and e.to_agent == "producer"
            and "Reported issues" in e.text
        ]
        assert len(revision_envelopes) == 1
        assert "step 1: wrong" in revision_envelopes[0].text


class TestSessionProperties:
    def test_termination_bound_holds(self):
        config = EngineConfig(max_revisions=3, max_reroutes=2)
        engine = make_review_engine(fail_times=4, config=config)
        result = engine.run_session(["producer", "reviewer"], "prompt")
        bound = 2 * (1 + config.max_revisions) * (1 + config.max_reroutes)
        assert sum(dispatch_counts(result.transcript).values()) <= bound

    def test_context_budget_clips_envelope_text(self):
        engine, order = chain_engine(["a"], config=EngineConfig(context_budget=500))
        result = engine.run_session(order, "long prompt " * 200)
        for entry in result.transcript:
            if isinstance(entry, Envelope):
                assert len(entry.text) <= 500

    def test_transcript_steps_strictly_increase(self):
        engine = make_review_engine(fail_times=2)
        result = engine.run_session(["producer", "reviewer"], "prompt")
        steps = [e.step_index for e in result.transcript]
        assert steps == sorted(steps) and len(set(steps)) == len(steps)

    def test_artifacts_listed_in_result(self):
        engine, order = chain_engine(["a", "b"])
        result = engine.run_session(order, "prompt")
        assert {h.kind for h in result.artifacts} == {"a", "b"}


class TestTranscriptExport:
    def test_jsonl_schema(self):
        engine = make_review_engine(fail_times=1)
        result = engine.run_session(["producer", "reviewer"], "prompt")
        lines = export_transcript(result.transcript).splitlines()
        assert len(lines) == len(result.transcript)
        for line in lines:
            record = json.loads(line)
            assert set(record) == {"step", "from", "to", "text", "handles", "status"}
            assert record["from"] == SUPERVISOR_ID or record["to"] == SUPERVISOR_ID
