"""Agent-session behavior: candidate generation, the observation ladder,
question answering, and the pending-question protocol."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from breakfast import (
    C1,
    COFFEE,
    JUICE,
    MUG,
    choice_state,
    intent_state,
    library,
    raw_world,
)
from epike import constraints as cn
from epike import doxastic as dox
from epike import planlib as pl
from epike.actions import (
    KIND_ASK,
    KIND_EXECUTE,
    KIND_EXPLAIN,
    KIND_INTENT,
    KIND_NOOP,
    applicable,
    mk_execution_action,
    mk_explanation,
    mk_question,
    wire_encode,
)
from epike.doxastic import PointedState, belief, evaluate
from epike.errors import ObservationContradictionError, ScenarioError
from epike.executor import AgentSession, candidate_actions, run_subroutine
from epike.mcts import (
    EGO_KINDS_SEARCH,
    MODE_ASK_IF_FAILURE,
    MODE_SEARCH_ACTION,
)
from randgen import rand_lib_state, rand_library


def session(ego, state, lib, *, cap=300, seed=0):
    return AgentSession(ego, state, lib, iteration_cap=cap, seed=seed)


def run_wire(sess, action, seq=None):
    out = sess.on_observe(action, seq)
    return None if out is None else wire_encode(out)


class TestCandidateActions:
    lib = library()

    def perspective(self, state, agent):
        return dox.local_perspective(state, agent)

    def test_rule_aware_agent_full_menu(self):
        state = choice_state(self.lib)
        persp = self.perspective(state, "R")
        cands = candidate_actions(persp, "R", EGO_KINDS_SEARCH, self.lib)
        listing = [(a.kind, a.payload) for a in cands]
        assert listing == [
            (KIND_EXECUTE, "e_mug"),
            (KIND_EXECUTE, "e_glass"),
            (KIND_NOOP, ""),
            (KIND_INTENT, "container=mug"),
            (KIND_INTENT, "container=glass"),
            (KIND_INTENT, "drink=coffee"),
            (KIND_INTENT, "drink=juice"),
            (KIND_EXPLAIN, "in(((container=mug & drink=coffee) | (container=glass & drink=juice)))"),
        ]

    def test_kind_restriction_is_honored(self):
        state = choice_state(self.lib)
        persp = self.perspective(state, "R")
        only_exec = candidate_actions(persp, "R", {KIND_EXECUTE}, self.lib)
        assert [a.kind for a in only_exec] == [KIND_EXECUTE, KIND_EXECUTE]
        only_noop = candidate_actions(persp, "R", {KIND_NOOP}, self.lib)
        assert [a.kind for a in only_noop] == [KIND_NOOP]

    def test_misinformed_agent_cannot_explain_the_rule(self):
        # The agent who does not believe the pairing rule can neither explain
        # it (no lying) nor ask about it (it already disbelieves membership).
        state = choice_state(self.lib)
        persp = self.perspective(state, "H")
        cands = candidate_actions(persp, "H", EGO_KINDS_SEARCH, self.lib)
        assert [a.kind for a in cands if a.kind in (KIND_EXPLAIN, KIND_ASK)] == []
        assert [(a.kind, a.payload) for a in cands if a.kind == KIND_EXECUTE] == [
            (KIND_EXECUTE, "e_coffee"),
            (KIND_EXECUTE, "e_juice"),
        ]

    def test_torn_agent_asks_instead_of_acting(self):
        state = intent_state(self.lib)
        persp = self.perspective(state, "R")
        cands = candidate_actions(persp, "R", EGO_KINDS_SEARCH, self.lib)
        listing = [(a.kind, a.payload, a.askee) for a in cands]
        assert listing == [
            (KIND_NOOP, "", None),
            (KIND_ASK, "in(drink=coffee)", "H"),
            (KIND_ASK, "in(drink=juice)", "H"),
        ]

    def test_fully_executed_agent_has_no_executions(self):
        kb = pl.compile_initial_kb(self.lib, [C1])
        kb = pl.record_execution(kb, self.lib, "e_coffee")
        model = dox.mk_model([dox.World("w1", kb)], self.lib.agents, {})
        persp = PointedState(model, frozenset({"w1"}))
        cands = candidate_actions(persp, "H", {KIND_EXECUTE}, self.lib)
        assert cands == []

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000))
    def test_candidates_apply_cleanly_at_own_perspective(self, seed):
        rng = random.Random(seed)
        lib = rand_library(rng)
        state = rand_lib_state(rng, lib)
        agent = rng.choice(list(lib.agents))
        persp = dox.local_perspective(state, agent)
        for action in candidate_actions(persp, agent, EGO_KINDS_SEARCH, lib):
            assert applicable(persp, action, lib)


def torn_failure_state(lib):
    """One world broken by the rule, one rule-free and fine; R cannot tell."""
    model = dox.mk_model(
        [raw_world("w1", [C1, MUG, JUICE]), raw_world("w2", [MUG, JUICE])],
        lib.agents,
        {"R": [("w1", "w2"), ("w2", "w1")]},
    )
    return dox.PointedState(model, frozenset({"w1"}))


def believed_failure_state(lib):
    """R is sure the rule broke the task; H's preferred world has no rule."""
    model = dox.mk_model(
        [raw_world("w1", [C1, MUG, JUICE]), raw_world("w2", [MUG, JUICE])],
        lib.agents,
        {"H": [("w2", "w1")]},
    )
    return dox.PointedState(model, frozenset({"w1"}))


class TestAgentSession:
    lib = library()

    def test_view_widens_to_own_component(self):
        r = session("R", choice_state(self.lib), self.lib)
        assert r.state.designated == frozenset({"w1"})
        h = session("H", choice_state(self.lib), self.lib)
        assert h.state.designated == frozenset({"w1", "w2"})

    def test_adapts_to_observed_drink_choice(self):
        r = session("R", choice_state(self.lib), self.lib)
        out = r.on_observe(mk_execution_action(self.lib, "e_juice"), seq=1)
        assert out is not None
        assert (out.kind, out.payload) == (KIND_EXECUTE, "e_glass")
        assert applicable(r.state, out, self.lib)

    def test_silent_after_common_success(self):
        r = session("R", choice_state(self.lib), self.lib)
        r.on_observe(mk_execution_action(self.lib, "e_juice"), seq=1)
        out = r.on_observe(mk_execution_action(self.lib, "e_glass"), seq=2)
        assert out is None
        assert r.believes_success()

    def test_contradicted_observation_raises(self):
        r = session("R", choice_state(self.lib), self.lib)
        r.on_observe(mk_execution_action(self.lib, "e_juice"), seq=1)
        with pytest.raises(ObservationContradictionError):
            r.on_observe(mk_execution_action(self.lib, "e_mug"), seq=2)

    def test_sequence_numbers_must_increase(self):
        r = session("R", choice_state(self.lib), self.lib)
        r.on_observe(mk_execution_action(self.lib, "e_juice"), seq=1)
        with pytest.raises(ScenarioError):
            r.on_observe(mk_execution_action(self.lib, "e_glass"), seq=1)

    def test_waits_after_finishing_own_step(self):
        model = dox.mk_model([raw_world("w1", [C1])], self.lib.agents, {})
        r = session("R", dox.PointedState(model, frozenset({"w1"})), self.lib)
        out = r.on_observe(mk_execution_action(self.lib, "e_mug"), seq=1)
        assert out is None  # the drink is the human's move; waiting is wire-silent

    def test_answers_yes_when_belief_holds(self):
        h = session("H", intent_state(self.lib), self.lib)
        question = mk_question(self.lib, "R", "H", dox.In(COFFEE))
        out = h.on_observe(question, seq=1)
        assert out is not None
        assert (out.kind, out.actor, out.answered) == (KIND_EXPLAIN, "H", "yes")
        assert out.payload == "in(drink=coffee)"

    def test_answers_no_when_negation_believed(self):
        h = session("H", intent_state(self.lib), self.lib)
        question = mk_question(self.lib, "R", "H", dox.In(JUICE))
        out = h.on_observe(question, seq=1)
        assert out is not None
        assert (out.kind, out.answered) == (KIND_EXPLAIN, "no")
        assert out.payload == "!in(drink=juice)"

    def test_answers_unknown_when_torn(self):
        state = torn_failure_state(self.lib)
        r = session("R", state, self.lib)
        question = mk_question(self.lib, "H", "R", dox.In(C1))
        out = r.on_observe(question, seq=1)
        assert out is not None
        assert (out.kind, out.answered) == (KIND_EXPLAIN, "unknown")
        assert out.payload == "(!B[R](in(((container=mug & drink=coffee) | (container=glass & drink=juice)))) & !B[R](!in(((container=mug & drink=coffee) | (container=glass & drink=juice)))))"

    def test_uncertain_failure_asks_and_blocks_until_answered(self):
        r = session("R", torn_failure_state(self.lib), self.lib)
        out = r.decide()
        assert out is not None and out.kind == KIND_ASK
        assert (out.payload, out.askee) == (
            "in(((container=mug & drink=coffee) | (container=glass & drink=juice)))",
            "H",
        )
        assert r.pending_question == ("R", "H", out.payload)

        # Waiting: the asker stays silent on an unrelated observation.
        assert r.on_observe(out, seq=1) is None
        assert r.pending_question is not None

        # The answer lands: pending clears and the ladder resumes.
        answer = mk_explanation(self.lib, "H", dox.In(C1), answered="yes")
        out2 = r.on_observe(answer, seq=2)
        assert r.pending_question is None
        assert r.believes_failure()
        assert out2 is None  # failure already commonly believed in the surviving world

    def test_believed_failure_gets_explained(self):
        r = session("R", believed_failure_state(self.lib), self.lib)
        out = r.decide()
        assert out is not None
        assert (out.kind, out.payload) == (
            KIND_EXPLAIN,
            "in(((container=mug & drink=coffee) | (container=glass & drink=juice)))",
        )
        # After its own explanation is broadcast, failure is common belief.
        out2 = r.on_observe(out, seq=1)
        assert out2 is None
        assert r.believes(r._common(dox.Entailed(cn.BOTTOM)))

    def test_seeded_determinism(self):
        def trail():
            r = session("R", choice_state(self.lib), self.lib, cap=150, seed=11)
            outs = [run_wire(r, mk_execution_action(self.lib, "e_juice"), 1)]
            return outs

        assert trail() == trail()


class TestRunSubroutine:
    lib = library()

    def test_pending_question_blocks_action_search(self):
        r = session("R", choice_state(self.lib), self.lib)
        r.pending_question = ("R", "H", "in(drink=coffee)")
        assert run_subroutine(MODE_SEARCH_ACTION, r) is None

    def test_pending_question_blocks_new_questions(self):
        r = session("R", torn_failure_state(self.lib), self.lib)
        r.pending_question = ("R", "H", "in(drink=coffee)")
        assert run_subroutine(MODE_ASK_IF_FAILURE, r) is None

    def test_search_action_emits_question_and_sets_pending(self):
        r = session("R", torn_failure_state(self.lib), self.lib)
        out = run_subroutine(MODE_ASK_IF_FAILURE, r)
        assert out is not None and out.kind == KIND_ASK
        assert r.pending_question == (out.actor, out.askee, out.payload)
