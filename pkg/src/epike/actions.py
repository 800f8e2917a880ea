"""Plausibility action models and the action-priority product update.

Events carry doxastic preconditions and add-a-constraint (or no-op)
postconditions. Updating a state with an action pairs every world with every
event whose precondition holds there; plausibility between surviving pairs is
anti-lexicographic (event order dominates, world order breaks event ties)
restricted to pairs whose source worlds share an epistemic component.

Four templates build every action the engine ever takes:

* execution of a time point (one event per subset of its not-yet-executed
  ordering predecessors),
* intent announcement of a decision constraint,
* explanation of a restricted doxastic formula (no-op postcondition),
* question to another agent, modeled as three mutually distinguishable events
  covering the askee's possible truthful answers.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional

from . import caching
from . import constraints as cn
from . import doxastic as dox
from .doxastic import (
    And,
    CondBelief,
    Entailed,
    Formula,
    In,
    Not,
    PlausibilityFrame,
    PlausibilityModel,
    PointedState,
    Sat,
    SuccessPredicate,
    TRUE_FORMULA,
    World,
    belief,
    extension,
)
from .errors import InapplicableActionError, ModelValidationError, RestrictedFormulaError

KIND_EXECUTE = "execute"
KIND_INTENT = "intent"
KIND_EXPLAIN = "explain"
KIND_ASK = "ask"
KIND_NOOP = "noop"


@dataclass(frozen=True, order=True)
class Event:
    """An action-model event: doxastic precondition, add-constraint postcondition.

    `post=None` is the no-op postcondition; otherwise the constraint is added
    to the knowledge base of every world the event fires at.
    """

    id: str
    pre: Formula
    post: Optional[cn.Constraint]


class ActionModel:
    """Finite set of events plus per-agent plausibility preorders."""

    __slots__ = ("events", "frame", "_event_map", "_hash")

    def __init__(self, events: Iterable[Event], frame: PlausibilityFrame):
        event_tuple = tuple(sorted(events))
        if tuple(e.id for e in event_tuple) != frame.ids:
            raise ModelValidationError("event ids do not match the frame ids")
        self.events = event_tuple
        self.frame = frame
        self._event_map = {e.id: e for e in event_tuple}
        self._hash = hash((event_tuple, frame))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ActionModel)
            and self._hash == other._hash
            and self.events == other.events
            and self.frame == other.frame
        )

    def event(self, ident: str) -> Event:
        return self._event_map[ident]


def mk_action_model(
    events: Iterable[Event],
    agents: Iterable[str],
    edges: Mapping[str, Iterable[tuple[str, str]]],
) -> ActionModel:
    event_tuple = tuple(sorted(events))
    frame = PlausibilityFrame((e.id for e in event_tuple), agents, edges)
    return ActionModel(event_tuple, frame)


def validate_action_model(model: ActionModel) -> None:
    model.frame.validate("action model")


@dataclass(frozen=True)
class PointedAction:
    """An action model with designated events plus wire metadata."""

    model: ActionModel
    designated: frozenset[str]
    kind: str
    actor: str
    payload: str
    askee: Optional[str] = None
    answered: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.designated:
            raise ModelValidationError("a pointed action needs at least one designated event")
        missing = self.designated - set(self.model.frame.ids)
        if missing:
            raise ModelValidationError(f"designated events {sorted(missing)} not in the action model")


# --- product update -----------------------------------------------------------

PAIR_SEP = "⊗"  # "⊗" joins parent world id and event id

_PRODUCT_MEMO: dict[tuple, PointedState] = caching.register_dict({})


def applicable(
    state: PointedState,
    action: PointedAction,
    lib: Optional[SuccessPredicate] = None,
) -> bool:
    """True iff every designated world admits some designated event's precondition."""
    model = state.model
    covered: frozenset[str] = frozenset()
    for eid in sorted(action.designated):
        covered |= extension(model, action.model.event(eid).pre, lib)
        if state.designated <= covered:
            return True
    return state.designated <= covered


def product_update(
    state: PointedState,
    action: PointedAction,
    lib: Optional[SuccessPredicate] = None,
) -> PointedState:
    """Anti-lexicographic (action-priority) update of a state by an action.

    Raises InapplicableActionError when no designated (world, event) pair
    survives. Worlds unreachable from the new designated set are pruned.
    """
    key = (state.model, state.designated, action.model, action.designated, lib)
    hit = _PRODUCT_MEMO.get(key)
    if hit is not None:
        if not hit.designated:
            raise InapplicableActionError(
                f"action {action.kind}:{action.payload} is inapplicable at {sorted(state.designated)}"
            )
        return hit

    model = state.model
    aframe = action.model.frame
    wframe = model.frame
    fired: dict[str, frozenset[str]] = {
        e.id: extension(model, e.pre, lib) for e in action.model.events
    }
    pairs: list[tuple[World, Event]] = [
        (w, e)
        for w in model.worlds
        for e in action.model.events
        if w.id in fired[e.id]
    ]

    designated = frozenset(
        _pair_id(w.id, e.id)
        for w, e in pairs
        if w.id in state.designated and e.id in action.designated
    )
    if not designated:
        empty = PointedState.__new__(PointedState)  # sentinel for the memo
        object.__setattr__(empty, "model", model)
        object.__setattr__(empty, "designated", frozenset())
        _PRODUCT_MEMO[key] = empty
        raise InapplicableActionError(
            f"action {action.kind}:{action.payload} is inapplicable at {sorted(state.designated)}"
        )

    # Epistemic reachability from the designated pairs prunes dead weight. Two
    # pairs can only relate when their source worlds share a component and
    # their events are plausibility-comparable for the agent.
    agents = wframe.agents
    adjacency: dict[str, set[str]] = {
        _pair_id(w.id, e.id): set() for w, e in pairs
    }
    edges: dict[str, list[tuple[str, str]]] = {agent: [] for agent in agents}
    for w1, e1 in pairs:
        p1 = _pair_id(w1.id, e1.id)
        for w2, e2 in pairs:
            p2 = _pair_id(w2.id, e2.id)
            for agent in agents:
                if not wframe.same_component(agent, w1.id, w2.id):
                    continue
                if aframe.strictly_less(agent, e1.id, e2.id) or (
                    aframe.equi(agent, e1.id, e2.id) and wframe.leq(agent, w1.id, w2.id)
                ):
                    edges[agent].append((p1, p2))
                    adjacency[p1].add(p2)
                    adjacency[p2].add(p1)

    reachable = set(designated)
    frontier = list(designated)
    while frontier:
        nxt = frontier.pop()
        for other in adjacency.get(nxt, ()):
            if other not in reachable:
                reachable.add(other)
                frontier.append(other)

    worlds = []
    for w, e in pairs:
        pid = _pair_id(w.id, e.id)
        if pid not in reachable:
            continue
        new_kb = w.kb if e.post is None else w.kb.add(e.post)
        worlds.append(World(pid, new_kb))
    kept_edges = {
        agent: [(u, v) for u, v in edges[agent] if u in reachable and v in reachable]
        for agent in agents
    }
    new_model = dox.mk_model(worlds, agents, kept_edges)
    result = PointedState(new_model, designated)
    _PRODUCT_MEMO[key] = result
    return result


def _pair_id(world_id: str, event_id: str) -> str:
    return f"{world_id}{PAIR_SEP}{event_id}"


def parent_world_id(pair_id: str) -> str:
    """Source world of a product world (inverse of the pairing id scheme)."""
    head, sep, _ = pair_id.rpartition(PAIR_SEP)
    if not sep:
        raise ValueError(f"{pair_id!r} is not a product world id")
    return head


# --- restricted explanation grammar -----------------------------------------


def validate_explanation_formula(f: Formula) -> None:
    """Explanations are negations, belief prefixes, conjunctions, or in(c) literals."""
    match f:
        case In(_):
            return
        case Not(op):
            validate_explanation_formula(op)
        case CondBelief(_, condition, body) if condition == TRUE_FORMULA:
            validate_explanation_formula(body)
        case And(ops) if len(ops) >= 2:
            for op in ops:
                validate_explanation_formula(op)
        case _:
            raise RestrictedFormulaError(f"not an explanation formula: {f!r}")


# --- action templates ---------------------------------------------------------


def _fand(parts: list[Formula]) -> Formula:
    if len(parts) == 1:
        return parts[0]
    return And(tuple(parts))


def _all_equi_edges(agents: Iterable[str], ids: list[str]) -> dict[str, list[tuple[str, str]]]:
    pairs = [(u, v) for u in ids for v in ids]
    return {agent: list(pairs) for agent in agents}


def mk_execution_action(lib, timepoint: str) -> PointedAction:
    """Execution of a time point by its owner.

    One event per subset S of the point's ordering predecessors: the event
    fires exactly when the predecessors in S are not yet entailed executed,
    and its postcondition voids the guards of the orderings in S. All events
    are equi-plausible for every agent and all are designated.
    """
    tp = lib.timepoint(timepoint)
    preds = sorted(
        (o for o in lib.orderings if o.succ == timepoint),
        key=lambda o: (o.pred, cn.print_constraint(o.guard)),
    )
    feasible = belief(tp.owner, Sat(cn.Assign(timepoint, "T")))
    events = []
    for mask in range(2 ** len(preds)):
        skipped = [o for bit, o in enumerate(preds) if mask >> bit & 1]
        done = [o for bit, o in enumerate(preds) if not mask >> bit & 1]
        pre = _fand(
            [feasible]
            + [Not(Entailed(cn.Assign(o.pred, "T"))) for o in skipped]
            + [Entailed(cn.Assign(o.pred, "T")) for o in done]
        )
        post = cn.conj(
            [cn.Assign(timepoint, "T")] + [cn.Not(o.guard) for o in skipped]
        )
        events.append(Event(f"{timepoint}#{mask}", pre, post))
    ids = [e.id for e in events]
    model = mk_action_model(events, lib.agents, _all_equi_edges(lib.agents, ids))
    return PointedAction(model, frozenset(ids), KIND_EXECUTE, tp.owner, timepoint)


def mk_intent_announcement(lib, actor: str, constraint: cn.Constraint) -> PointedAction:
    """Public commitment to a decision constraint the actor believes satisfiable."""
    event = Event("i0", belief(actor, Sat(constraint)), constraint)
    model = mk_action_model([event], lib.agents, {})
    return PointedAction(
        model, frozenset(("i0",)), KIND_INTENT, actor, cn.print_constraint(constraint)
    )


def mk_explanation(lib, actor: str, formula: Formula, answered: Optional[str] = None) -> PointedAction:
    """Public truthful announcement of a restricted doxastic formula."""
    validate_explanation_formula(formula)
    event = Event("x0", belief(actor, formula), None)
    model = mk_action_model([event], lib.agents, {})
    return PointedAction(
        model,
        frozenset(("x0",)),
        KIND_EXPLAIN,
        actor,
        dox.print_formula(formula),
        answered=answered,
    )


def uncertainty_formula(askee: str, formula: Formula) -> Formula:
    """The "I don't know" answer: the askee believes neither the formula nor its negation."""
    return And((Not(belief(askee, formula)), Not(belief(askee, Not(formula)))))


def mk_question(lib, asker: str, askee: str, formula: Formula) -> PointedAction:
    """Question about a restricted formula, as three mutually distinguishable events.

    The events cover the askee's possible truthful answers (believes it,
    believes its negation, uncertain); no agent relates distinct events, so an
    update partitions worlds by answer while every answer stays designated.
    This reconstruction is the single swap point for alternative question
    semantics.
    """
    if asker == askee:
        raise ModelValidationError(f"agent {asker!r} cannot ask itself")
    validate_explanation_formula(formula)
    events = [
        Event("q_yes", belief(askee, formula), None),
        Event("q_no", belief(askee, Not(formula)), None),
        Event("q_unknown", uncertainty_formula(askee, formula), None),
    ]
    model = mk_action_model(events, lib.agents, {})
    return PointedAction(
        model,
        frozenset(e.id for e in events),
        KIND_ASK,
        asker,
        dox.print_formula(formula),
        askee=askee,
    )


def mk_noop(lib, actor: str) -> PointedAction:
    """Identity action; never broadcast, only searched over."""
    event = Event("n0", TRUE_FORMULA, None)
    model = mk_action_model([event], lib.agents, {})
    return PointedAction(model, frozenset(("n0",)), KIND_NOOP, actor, "")


# --- wire encoding ------------------------------------------------------------


def wire_encode(action: PointedAction) -> dict:
    """JSON-ready record; `wire_decode` inverts it bit-exactly."""
    record = {"kind": action.kind, "actor": action.actor, "payload": action.payload}
    if action.askee is not None:
        record["askee"] = action.askee
    if action.answered is not None:
        record["answered"] = action.answered
    return record


def wire_decode(record: Mapping[str, str], lib) -> PointedAction:
    kind = record["kind"]
    actor = record["actor"]
    payload = record["payload"]
    if kind == KIND_EXECUTE:
        action = mk_execution_action(lib, payload)
        if action.actor != actor:
            raise ModelValidationError(f"time point {payload!r} is owned by {action.actor!r}, not {actor!r}")
        return action
    if kind == KIND_INTENT:
        return mk_intent_announcement(lib, actor, cn.parse_constraint(payload))
    if kind == KIND_EXPLAIN:
        return mk_explanation(lib, actor, dox.parse_formula(payload), answered=record.get("answered"))
    if kind == KIND_ASK:
        return mk_question(lib, actor, record["askee"], dox.parse_formula(payload))
    if kind == KIND_NOOP:
        return mk_noop(lib, actor)
    raise ModelValidationError(f"unknown action kind {kind!r}")


def replace_answered(action: PointedAction, answered: str) -> PointedAction:
    return replace(action, answered=answered)
