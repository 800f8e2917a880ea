"""Temporal plan libraries and their knowledge-base encoding.

A library is ⟨variables, time points, orderings, agents⟩: decision variables
pick a subplan, each time point has an owner and a guard over the decision
variables, and ordering constraints are guarded precedence edges. The encoding
turns the library into constraints over the decision variables plus one
boolean per time point:

* ``(e=T) -> guard(e)`` for every time point,
* the negation of every minimal nogood — a partial decision assignment whose
  activated precedence graph is cyclic,
* the scenario/world constraint set on top.

Executing a time point adds ``(e=T)`` conjoined with the negated guards of
every ordering whose predecessor had not been executed yet, which is what
makes order violations show up as plain inconsistency. Success holds when
some subplan is consistent with the knowledge base and all of its activated
time points are entailed executed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from . import caching
from . import constraints as cn
from .constraints import Assign, BOOL_DOMAIN, Constraint, VariableDecl, constraint_vars
from .doxastic import PointedState, World, mk_model
from .errors import ScenarioError
from .kb import KnowledgeBase, kb_entails, kb_new, kb_sat_with


@dataclass(frozen=True, order=True)
class TimePoint:
    id: str
    owner: str
    guard: Constraint


@dataclass(frozen=True, order=True)
class OrderingConstraint:
    pred: str
    succ: str
    guard: Constraint


@dataclass(frozen=True, order=True)
class Subplan:
    """A full assignment of the decision variables."""

    assigns: tuple[tuple[str, str], ...]

    def as_dict(self) -> dict[str, str]:
        return dict(self.assigns)

    def constraint(self) -> Constraint:
        return cn.conj([Assign(var, value) for var, value in self.assigns])


@dataclass(frozen=True)
class ExecutionState:
    """Ground-truth bookkeeping: executed time points in order, announced intents."""

    history: tuple[str, ...] = ()
    intents: tuple[Constraint, ...] = ()

    def record(self, timepoint: str) -> "ExecutionState":
        return ExecutionState(self.history + (timepoint,), self.intents)

    def announce(self, intent: Constraint) -> "ExecutionState":
        return ExecutionState(self.history, self.intents + (intent,))


def guard_assignments(guard: Constraint, label: str) -> dict[str, str]:
    """Guards are conjunctions of assignments (or `true`); returns var -> value."""
    if isinstance(guard, cn.Top):
        return {}
    parts: tuple[Constraint, ...]
    if isinstance(guard, cn.And):
        parts = guard.operands
    else:
        parts = (guard,)
    out: dict[str, str] = {}
    for part in parts:
        if not isinstance(part, Assign):
            raise ScenarioError(f"{label}: guards must be conjunctions of assignments, got {cn.print_constraint(guard)}")
        if out.get(part.var, part.value) != part.value:
            raise ScenarioError(f"{label}: guard assigns {part.var!r} twice with different values")
        out[part.var] = part.value
    return out


class PlanLibrary:
    """Immutable plan library with its compiled encoding artifacts."""

    __slots__ = (
        "variables",
        "timepoints",
        "orderings",
        "agents",
        "decls",
        "nogoods",
        "static_constraints",
        "_tp_map",
        "_preds",
        "_success_cache",
        "_subplans",
        "_key",
        "_hash",
    )

    def __init__(
        self,
        variables: Iterable[VariableDecl],
        timepoints: Iterable[TimePoint],
        orderings: Iterable[OrderingConstraint],
        agents: Iterable[str],
    ):
        # Declaration order is kept: it is the deterministic tie-break order
        # for everything downstream (candidate enumeration, subplan listing).
        self.variables = tuple(variables)
        self.timepoints = tuple(timepoints)
        self.orderings = tuple(orderings)
        self.agents = tuple(agents)
        self._validate()
        self.decls = self.variables + tuple(
            VariableDecl(tp.id, BOOL_DOMAIN) for tp in self.timepoints
        )
        self.nogoods = _nogoods(self)
        self.static_constraints = frozenset(
            cn.implies(Assign(tp.id, "T"), tp.guard) for tp in self.timepoints
        ) | {cn.Not(g) for g in self.nogoods}
        self._tp_map = {tp.id: tp for tp in self.timepoints}
        self._preds = {
            tp.id: tuple(o for o in self.orderings if o.succ == tp.id) for tp in self.timepoints
        }
        self._success_cache: dict[KnowledgeBase, bool] = caching.register_dict({})
        self._subplans = tuple(
            Subplan(tuple(zip((v.name for v in self.variables), values)))
            for values in itertools.product(*(v.domain for v in self.variables))
        )
        self._key = (self.variables, self.timepoints, self.orderings, self.agents)
        self._hash = hash(self._key)

    def _validate(self) -> None:
        if not self.agents:
            raise ScenarioError("a plan library needs at least one agent")
        if len(set(self.agents)) != len(self.agents):
            raise ScenarioError(f"duplicate agents in {list(self.agents)}")
        var_names = [v.name for v in self.variables]
        tp_ids = [tp.id for tp in self.timepoints]
        if len(set(var_names)) != len(var_names):
            raise ScenarioError(f"duplicate decision variables in {var_names}")
        if len(set(tp_ids)) != len(tp_ids):
            raise ScenarioError(f"duplicate time points in {tp_ids}")
        overlap = set(var_names) & set(tp_ids)
        if overlap:
            raise ScenarioError(f"names used both as variable and time point: {sorted(overlap)}")
        decision = {v.name: v for v in self.variables}
        guard_kb_decls = tuple(sorted(decision.values()))
        for tp in self.timepoints:
            if tp.owner not in self.agents:
                raise ScenarioError(f"time point {tp.id!r} owned by unknown agent {tp.owner!r}")
            cn.validate_constraint(tp.guard, decision)
            guard_assignments(tp.guard, f"time point {tp.id!r}")
        tp_set = set(tp_ids)
        for o in self.orderings:
            if o.pred not in tp_set or o.succ not in tp_set:
                raise ScenarioError(f"ordering {o.pred!r} -> {o.succ!r} references unknown time points")
            if o.pred == o.succ:
                raise ScenarioError(f"ordering {o.pred!r} -> {o.succ!r} is a self-loop")
            cn.validate_constraint(o.guard, decision)
            guard_assignments(o.guard, f"ordering {o.pred!r} -> {o.succ!r}")
            guard_kb = kb_new(guard_kb_decls, (o.guard,))
            for tp_id in (o.pred, o.succ):
                if not kb_entails(guard_kb, self._guard_of(tp_id)):
                    raise ScenarioError(
                        f"ordering {o.pred!r} -> {o.succ!r}: guard does not entail the guard of {tp_id!r}"
                    )

    def _guard_of(self, tp_id: str) -> Constraint:
        for tp in self.timepoints:
            if tp.id == tp_id:
                return tp.guard
        raise KeyError(tp_id)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PlanLibrary) and self._key == other._key

    def __repr__(self) -> str:
        return (
            f"PlanLibrary({len(self.variables)} vars, {len(self.timepoints)} timepoints, "
            f"{len(self.orderings)} orderings, agents={list(self.agents)})"
        )

    @property
    def decision_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def timepoint(self, tp_id: str) -> TimePoint:
        try:
            return self._tp_map[tp_id]
        except KeyError:
            raise ScenarioError(f"unknown time point {tp_id!r}") from None

    def predecessors(self, tp_id: str) -> tuple[OrderingConstraint, ...]:
        return self._preds[tp_id]

    def subplans(self) -> tuple[Subplan, ...]:
        return self._subplans

    def activated_timepoints(self, subplan: Subplan) -> tuple[str, ...]:
        assignment = subplan.as_dict()
        return tuple(
            tp.id for tp in self.timepoints if cn.eval_constraint(tp.guard, assignment)
        )

    def activated_orderings(self, subplan: Subplan) -> tuple[OrderingConstraint, ...]:
        assignment = subplan.as_dict()
        return tuple(
            o for o in self.orderings if cn.eval_constraint(o.guard, assignment)
        )

    def success_on(self, kb: KnowledgeBase) -> bool:
        """Some subplan is consistent with kb and fully entailed executed."""
        hit = self._success_cache.get(kb)
        if hit is not None:
            return hit
        result = False
        for g in self._subplans:
            if not kb_sat_with(kb, g.constraint()):
                continue
            if all(
                kb_entails(kb, Assign(tp_id, "T"))
                for tp_id in self.activated_timepoints(g)
            ):
                result = True
                break
        self._success_cache[kb] = result
        return result


def compile_initial_kb(lib: PlanLibrary, constraints: Iterable[Constraint] = ()) -> KnowledgeBase:
    """Encode the library plus a decision-level constraint set as a knowledge base."""
    decision = set(lib.decision_names)
    extra = tuple(constraints)
    for c in extra:
        bad = constraint_vars(c) - decision
        if bad:
            raise ScenarioError(
                f"initial constraint {cn.print_constraint(c)} references non-decision variables {sorted(bad)}"
            )
    return kb_new(lib.decls, lib.static_constraints | set(extra))


def compile_initial_state(lib: PlanLibrary, state: PointedState) -> PointedState:
    """Replace every world's decision-level KB with its full encoding."""
    worlds = [
        World(w.id, compile_initial_kb(lib, sorted(w.kb.constraints, key=cn.print_constraint)))
        for w in state.model.worlds
    ]
    frame = state.model.frame
    edges = {agent: sorted(frame.le[agent]) for agent in frame.agents}
    return PointedState(mk_model(worlds, frame.agents, edges), state.designated)


def record_execution(
    kb: KnowledgeBase,
    lib: PlanLibrary,
    timepoint: str,
    executed: Iterable[str] = (),
) -> KnowledgeBase:
    """Add the execution record of a time point given what ran before it."""
    done = set(executed)
    tp = lib.timepoint(timepoint)
    violated = [o for o in lib.predecessors(tp.id) if o.pred not in done]
    return kb.add(cn.conj([Assign(tp.id, "T")] + [cn.Not(o.guard) for o in violated]))


def success_holds(kb: KnowledgeBase, lib: PlanLibrary) -> bool:
    return lib.success_on(kb)


def feasible_subplans(kb: KnowledgeBase, lib: PlanLibrary) -> list[Subplan]:
    """Subplans consistent with the knowledge base, in domain-product order."""
    return [g for g in lib.subplans() if kb_sat_with(kb, g.constraint())]


def _nogoods(lib: PlanLibrary) -> tuple[Constraint, ...]:
    """Negations-to-be of minimal partial assignments with cyclic activated orderings.

    Enumerates partial assignments over the variables mentioned in ordering
    guards, smallest first; an assignment is kept when its activated
    precedence graph has a cycle and no proper restriction of it does.
    """
    guard_vars = sorted(
        {v for o in lib.orderings for v in constraint_vars(o.guard)}
    )
    domains = {v.name: v.domain for v in lib.variables}
    order_assigns = [
        (o, guard_assignments(o.guard, "ordering")) for o in lib.orderings
    ]

    def cyclic(theta: dict[str, str]) -> bool:
        active = [
            o
            for o, assigns in order_assigns
            if all(theta.get(var) == val for var, val in assigns.items())
        ]
        succs: dict[str, list[str]] = {}
        for o in active:
            succs.setdefault(o.pred, []).append(o.succ)
        visiting: set[str] = set()
        done: set[str] = set()

        def visit(node: str) -> bool:
            if node in done:
                return False
            visiting.add(node)
            for nxt in succs.get(node, ()):
                if nxt in visiting or visit(nxt):
                    return True
            visiting.discard(node)
            done.add(node)
            return False

        return any(visit(node) for node in list(succs))

    found: list[tuple[tuple[str, str], ...]] = []
    # Size 0 matters: a cycle of unconditional orderings is activated by the
    # empty assignment, so its nogood is the empty conjunction (never true).
    for size in range(0, len(guard_vars) + 1):
        for combo in itertools.combinations(guard_vars, size):
            for values in itertools.product(*(domains[v] for v in combo)):
                theta = dict(zip(combo, values))
                if not cyclic(theta):
                    continue
                items = tuple(sorted(theta.items()))
                if any(set(prev) <= set(items) for prev in found):
                    continue  # a restriction already covers it
                found.append(items)
    return tuple(
        cn.conj([Assign(var, val) for var, val in items]) for items in found
    )
