"""The epistemic plan-execution agent.

An :class:`AgentSession` holds one agent's subjective view of a team plan
execution — a plausibility model over knowledge-base worlds, with the agent's
whole epistemic component designated — and reacts to a stream of observed
actions. Each observation first updates the view by action-priority product
update, then a branch ladder decides what, if anything, to do next:

* the agent believes execution failed and failure is not yet common belief
  → search for an explanation of the failure;
* the agent cannot rule out failure → search for a question to settle it;
* the agent believes execution succeeded and success is not yet common belief
  → search for an explanation of the success;
* otherwise, if not yet done → search for the next action (its own executions
  and any communication that raises expected utility);
* nothing useful → stay silent (``None``).

Questions observed by their askee bypass the ladder: the askee immediately
answers with a truthful explanation of the asked formula, its negation, or
its own uncertainty. An asker with an outstanding question emits nothing new
until the answer arrives.
"""

from __future__ import annotations

import random
from dataclasses import replace
from typing import Iterable, Mapping, Optional, Sequence

from . import constraints as cn
from . import doxastic as dox
from . import planlib as pl
from .actions import (
    KIND_ASK,
    KIND_EXECUTE,
    KIND_EXPLAIN,
    KIND_INTENT,
    KIND_NOOP,
    PointedAction,
    mk_execution_action,
    mk_explanation,
    mk_intent_announcement,
    mk_noop,
    mk_question,
    product_update,
    uncertainty_formula,
    wire_decode,
)
from .doxastic import SUC, PointedState, belief, evaluate
from .errors import InapplicableActionError, ObservationContradictionError
from .mcts import (
    FAILED_FORMULA,
    MODE_ASK_IF_FAILURE,
    MODE_EXPLAIN_FAILURE,
    MODE_EXPLAIN_SUCCESS,
    MODE_SEARCH_ACTION,
    SearchConfig,
    search,
    subroutine_config,
)

__all__ = [
    "AgentSession",
    "candidate_actions",
    "run_subroutine",
]


# --- candidate generation ----------------------------------------------------


def _component_union(state: PointedState, agent: str) -> frozenset[str]:
    union: frozenset[str] = frozenset()
    for wid in state.designated:
        union |= state.model.cc(agent, wid)
    return union


def _literal_pool(state: PointedState, agent: str, lib: pl.PlanLibrary) -> list[dox.Formula]:
    """Explanation/question payload literals, in deterministic order.

    The pool is built from the syntactic constraints found in the worlds of
    the agent's epistemic component (static library encoding excluded: it is
    present in every world, so no formula about it can ever pass the "someone
    might not know" filter). Order: plain ``in(c)`` literals sorted by printed
    text, then their negations in the same constraint order.
    """
    texts: dict[str, cn.Constraint] = {}
    for wid in sorted(_component_union(state, agent)):
        for c in state.model.kb(wid).constraints:
            if c in lib.static_constraints:
                continue
            texts.setdefault(cn.print_constraint(c), c)
    ordered = [texts[t] for t in sorted(texts)]
    pool: list[dox.Formula] = [dox.In(c) for c in ordered]
    pool.extend(dox.Not(dox.In(c)) for c in ordered)
    return pool


def _explanation_payloads(
    state: PointedState, agent: str, lib: pl.PlanLibrary
) -> list[dox.Formula]:
    """Literal pool plus one level of belief prefixing, by (other agent, text)."""
    pool = _literal_pool(state, agent, lib)
    others = [b for b in state.model.agents if b != agent]
    prefixed = [belief(b, f) for b in others for f in pool]
    return pool + prefixed


def candidate_actions(
    state: PointedState,
    agent: str,
    allowed_kinds: Iterable[str],
    lib: pl.PlanLibrary,
) -> list[PointedAction]:
    """All actions the agent could take from its perspective, in policy order.

    ``state`` must be the deciding agent's own perspective (most plausible
    worlds of its component). The order — executions in plan declaration
    order, then noop, then intents, explanations, and questions — is the
    deterministic tie-break order everywhere downstream.
    """
    kinds = frozenset(allowed_kinds)
    out: list[PointedAction] = []

    if KIND_EXECUTE in kinds:
        for tp in lib.timepoints:
            if tp.owner != agent:
                continue
            executed = cn.Assign(tp.id, "T")
            if not evaluate(state, belief(agent, dox.Sat(executed)), lib):
                continue
            if evaluate(state, belief(agent, dox.Entailed(executed)), lib):
                continue
            out.append(mk_execution_action(lib, tp.id))

    if KIND_NOOP in kinds:
        out.append(mk_noop(lib, agent))

    if KIND_INTENT in kinds:
        for var in lib.variables:
            for value in var.domain:
                assign = cn.Assign(var.name, value)
                if not evaluate(state, belief(agent, dox.Sat(assign)), lib):
                    continue
                if evaluate(state, belief(agent, dox.Entailed(assign)), lib):
                    continue
                out.append(mk_intent_announcement(lib, agent, assign))

    if KIND_EXPLAIN in kinds:
        others = [b for b in state.model.agents if b != agent]
        for payload in _explanation_payloads(state, agent, lib):
            if not evaluate(state, belief(agent, payload), lib):
                continue  # agents cannot lie
            if not any(
                not evaluate(state, belief(agent, belief(b, payload)), lib) for b in others
            ):
                continue  # everyone already believes it, as far as the agent knows
            out.append(mk_explanation(lib, agent, payload))

    if KIND_ASK in kinds:
        askees = sorted(b for b in state.model.agents if b != agent)
        for payload in _literal_pool(state, agent, lib):
            if not isinstance(payload, dox.In):
                continue  # a negated atom asks the same three-way question
            if evaluate(state, belief(agent, payload), lib):
                continue
            if evaluate(state, belief(agent, dox.Not(payload)), lib):
                continue
            for askee in askees:
                out.append(mk_question(lib, agent, askee, payload))

    return out


# --- the agent session ---------------------------------------------------------


class AgentSession:
    """One agent's live view of the execution, driven by observed actions.

    ``initial_state`` is the scenario's pointed state over decision-level
    knowledge bases; the session compiles it into the full plan encoding and
    widens the designated set to the ego's whole epistemic component (the ego
    cannot tell the scenario's actual worlds from its epistemic alternatives).
    """

    #: When set, intersected with every subroutine's action-kind sets
    #: (subclasses use this to forbid whole action families).
    kind_mask: Optional[frozenset] = None

    def __init__(
        self,
        ego: str,
        initial_state: PointedState,
        lib: pl.PlanLibrary,
        *,
        iteration_cap: int = 1000,
        time_budget_ms: Optional[float] = None,
        horizon: int = 3,
        seed: int = 0,
        trace_sink: Optional[list] = None,
    ):
        if ego not in lib.agents:
            raise pl.ScenarioError(f"ego {ego!r} is not one of the plan's agents {lib.agents}")
        first_kb = initial_state.model.worlds[0].kb
        already_compiled = set(first_kb.decl_map) == {d.name for d in lib.decls}
        compiled = initial_state if already_compiled else pl.compile_initial_state(lib, initial_state)
        self.ego = ego
        self.lib = lib
        self.state = PointedState(compiled.model, _component_union(compiled, ego))
        self.iteration_cap = iteration_cap
        self.time_budget_ms = time_budget_ms
        self.horizon = horizon
        self.rng = random.Random(seed)
        self.trace_sink = trace_sink
        self.pending_question: Optional[tuple[str, str, str]] = None  # (asker, askee, payload)
        self.last_seq: Optional[int] = None

    # -- predicates ------------------------------------------------------------

    def believes(self, formula: dox.Formula) -> bool:
        return evaluate(self.state, belief(self.ego, formula), self.lib)

    def believes_failure(self) -> bool:
        return self.believes(FAILED_FORMULA)

    def believes_success(self) -> bool:
        return self.believes(SUC)

    def believes_common_success(self) -> bool:
        return self.believes(self._common(SUC))

    def _common(self, formula: dox.Formula) -> dox.Formula:
        return dox.And(tuple(belief(i, formula) for i in self.state.model.agents))

    # -- observation callback ----------------------------------------------------

    def on_observe(
        self,
        action: PointedAction | Mapping[str, str],
        seq: Optional[int] = None,
    ) -> Optional[PointedAction]:
        """Update the view with an observed action and decide what to do next."""
        if isinstance(action, Mapping):
            action = wire_decode(action, self.lib)
        if seq is not None:
            if self.last_seq is not None and seq <= self.last_seq:
                raise pl.ScenarioError(
                    f"observation sequence must increase: got {seq} after {self.last_seq}"
                )
            self.last_seq = seq

        self._apply(action)
        reaction = self._react(action)
        if reaction is not None:
            return reaction
        return self._ladder()

    def _apply(self, action: PointedAction) -> None:
        try:
            self.state = product_update(self.state, action, self.lib)
        except InapplicableActionError as err:
            raise ObservationContradictionError(
                f"agent {self.ego!r} cannot reconcile observed action "
                f"{action.kind}:{action.payload!r} with any of its worlds"
            ) from err

    def _react(self, action: PointedAction) -> Optional[PointedAction]:
        """Protocol reflexes that preempt the ladder (question answering)."""
        if action.kind == KIND_ASK:
            if action.askee == self.ego:
                return self._answer(action)
            if action.actor == self.ego:
                self.pending_question = (action.actor, action.askee or "", action.payload)
        elif (
            action.kind == KIND_EXPLAIN
            and self.pending_question is not None
            and action.actor == self.pending_question[1]
        ):
            self.pending_question = None
        return None

    def decide(self, *, strip_noop: bool = False) -> Optional[PointedAction]:
        """What the agent would do right now, absent any new observation.

        ``strip_noop`` removes waiting from the agent's own menu so the search
        must surface its next-best concrete action (used by the optional
        hang-mitigation mode of the execution loop).
        """
        return self._ladder(strip_noop=strip_noop)

    def _answer(self, question: PointedAction) -> PointedAction:
        """Truthful reply to a question addressed to this agent."""
        asked = dox.parse_formula(question.payload)
        if self.believes(asked):
            return mk_explanation(self.lib, self.ego, asked, answered="yes")
        if self.believes(dox.Not(asked)):
            return mk_explanation(self.lib, self.ego, dox.Not(asked), answered="no")
        return mk_explanation(
            self.lib, self.ego, uncertainty_formula(self.ego, asked), answered="unknown"
        )

    def _ladder(self, *, strip_noop: bool = False) -> Optional[PointedAction]:
        if self.believes_failure():
            if not self.believes(self._common(FAILED_FORMULA)):
                return run_subroutine(MODE_EXPLAIN_FAILURE, self, strip_noop=strip_noop)
            return None
        if not self.believes(dox.Not(FAILED_FORMULA)):
            return run_subroutine(MODE_ASK_IF_FAILURE, self, strip_noop=strip_noop)
        if self.believes_success():
            if not self.believes(self._common(SUC)):
                return run_subroutine(MODE_EXPLAIN_SUCCESS, self, strip_noop=strip_noop)
            return None
        return run_subroutine(MODE_SEARCH_ACTION, self, strip_noop=strip_noop)


# --- subroutine dispatch --------------------------------------------------------


def _strip_questions(cfg: SearchConfig) -> SearchConfig:
    return replace(cfg, ego_kinds=cfg.ego_kinds - {KIND_ASK}, other_kinds=cfg.other_kinds - {KIND_ASK})


def run_subroutine(
    mode: str, session: AgentSession, *, strip_noop: bool = False
) -> Optional[PointedAction]:
    """Run one search subroutine for the session and translate its answer.

    A pending question silences the asker: action search is suspended outright
    and no new question may be posed until the askee has answered. A returned
    noop means "wait", which on the wire is no action at all. ``strip_noop``
    removes waiting from the ego menu only — simulated partners keep it.
    """
    waiting = session.pending_question is not None
    if waiting and mode == MODE_SEARCH_ACTION:
        return None
    cfg = subroutine_config(
        mode,
        iteration_cap=session.iteration_cap,
        time_budget_ms=session.time_budget_ms,
        horizon=session.horizon,
    )
    if waiting:
        cfg = _strip_questions(cfg)
    if session.kind_mask is not None:
        cfg = replace(
            cfg,
            ego_kinds=cfg.ego_kinds & session.kind_mask,
            other_kinds=cfg.other_kinds & session.kind_mask,
        )
    if strip_noop:
        cfg = replace(cfg, ego_kinds=cfg.ego_kinds - {KIND_NOOP})
    if not cfg.ego_kinds:
        return None

    def candidates(state: PointedState, agent: str, kinds: frozenset) -> Sequence[PointedAction]:
        return candidate_actions(state, agent, kinds, session.lib)

    chosen = search(
        session.state,
        session.ego,
        session.lib,
        cfg,
        candidates,
        session.rng,
        trace_sink=session.trace_sink,
    )
    if chosen is not None and chosen.kind == KIND_NOOP:
        return None
    if chosen is not None and chosen.kind == KIND_ASK:
        session.pending_question = (chosen.actor, chosen.askee or "", chosen.payload)
    return chosen
