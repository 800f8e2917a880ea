"""Independent brute-force oracles the test suite compares the engine against.

Everything here is deliberately naive and shares as little code as possible
with the production implementations: truth-table satisfiability, per-world
recursive formula evaluation with min-sets recomputed from the raw relation,
unpruned product updates, and direct walk-the-history definitions of plan
failure and success.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping, Optional, Sequence

from epike import constraints as cn
from epike import doxastic as dx
from epike.kb import KnowledgeBase


# --- satisfiability / entailment by enumeration -------------------------------


def oracle_satisfiable(decls: Sequence[cn.VariableDecl], constraints: Iterable[cn.Constraint]) -> bool:
    cs = list(constraints)
    names = [d.name for d in decls]
    for values in itertools.product(*(d.domain for d in decls)):
        assignment = dict(zip(names, values))
        if all(_eval(c, assignment) for c in cs):
            return True
    return False


def oracle_entails(kb: KnowledgeBase, c: cn.Constraint) -> bool:
    names = [d.name for d in kb.decls]
    for values in itertools.product(*(d.domain for d in kb.decls)):
        assignment = dict(zip(names, values))
        if all(_eval(x, assignment) for x in kb.constraints) and not _eval(c, assignment):
            return False
    return True


def _eval(c: cn.Constraint, assignment: Mapping[str, str]) -> bool:
    if isinstance(c, cn.Assign):
        return assignment[c.var] == c.value
    if isinstance(c, cn.Not):
        return not _eval(c.operand, assignment)
    if isinstance(c, cn.And):
        return all(_eval(op, assignment) for op in c.operands)
    if isinstance(c, cn.Or):
        return any(_eval(op, assignment) for op in c.operands)
    if isinstance(c, cn.Top):
        return True
    if isinstance(c, cn.Bottom):
        return False
    raise TypeError(c)


# --- doxastic truth, world by world -------------------------------------------


def oracle_holds(
    model: dx.PlausibilityModel,
    world_id: str,
    formula: dx.Formula,
    lib=None,
) -> bool:
    """Truth at a single world, straight from the definitions."""
    rel = model.frame.le
    kb = model.kb(world_id)
    if isinstance(formula, dx.In):
        return formula.constraint in kb.constraints
    if isinstance(formula, dx.Entailed):
        return oracle_entails(kb, formula.constraint)
    if isinstance(formula, dx.Sat):
        return oracle_satisfiable(kb.decls, set(kb.constraints) | {formula.constraint})
    if isinstance(formula, dx.Suc):
        assert lib is not None
        return oracle_success_on(kb, lib)
    if isinstance(formula, dx.Not):
        return not oracle_holds(model, world_id, formula.operand, lib)
    if isinstance(formula, dx.And):
        return all(oracle_holds(model, world_id, op, lib) for op in formula.operands)
    if isinstance(formula, dx.CondBelief):
        agent = formula.agent
        component = _component(model, agent, world_id)
        cond_worlds = {
            v for v in component if oracle_holds(model, v, formula.condition, lib)
        }
        minimal = {
            v
            for v in cond_worlds
            if not any(
                (u, v) in rel[agent] and (v, u) not in rel[agent] for u in cond_worlds
            )
        }
        return all(oracle_holds(model, v, formula.body, lib) for v in minimal)
    raise TypeError(formula)


def _component(model: dx.PlausibilityModel, agent: str, world_id: str) -> set[str]:
    """Connected component of the comparability graph, recomputed by BFS."""
    rel = model.frame.le[agent]
    seen = {world_id}
    frontier = [world_id]
    while frontier:
        u = frontier.pop()
        for v in model.frame.ids:
            if v not in seen and ((u, v) in rel or (v, u) in rel):
                seen.add(v)
                frontier.append(v)
    return seen


def oracle_evaluate(state: dx.PointedState, formula: dx.Formula, lib=None) -> bool:
    return all(oracle_holds(state.model, w, formula, lib) for w in state.designated)


def oracle_local_perspective(state: dx.PointedState, agent: str) -> frozenset[str]:
    """Most plausible worlds across the designated worlds' components."""
    rel = state.model.frame.le[agent]
    union: set[str] = set()
    for wid in state.designated:
        union |= _component(state.model, agent, wid)
    return frozenset(
        w
        for w in union
        if not any((v, w) in rel and (w, v) not in rel for v in union)
    )


# --- unpruned product update ---------------------------------------------------


def oracle_product_update(state: dx.PointedState, action, lib=None) -> Optional[dx.PointedState]:
    """Action-priority update keeping every surviving pair (no reachability pruning).

    Returns None when no designated pair survives.
    """
    model = state.model
    amodel = action.model
    pairs = [
        (w, e)
        for w in model.worlds
        for e in amodel.events
        if oracle_holds(model, w.id, e.pre, lib)
    ]
    designated = frozenset(
        f"{w.id}⊗{e.id}"
        for w, e in pairs
        if w.id in state.designated and e.id in action.designated
    )
    if not designated:
        return None
    worlds = [
        dx.World(f"{w.id}⊗{e.id}", w.kb if e.post is None else w.kb.add(e.post))
        for w, e in pairs
    ]
    edges: dict[str, list[tuple[str, str]]] = {agent: [] for agent in model.frame.agents}
    arel = amodel.frame.le
    wrel = model.frame.le
    for w1, e1 in pairs:
        for w2, e2 in pairs:
            for agent in model.frame.agents:
                if w2.id not in _component(model, agent, w1.id):
                    continue
                e_lt = (e1.id, e2.id) in arel[agent] and (e2.id, e1.id) not in arel[agent]
                e_eq = (e1.id, e2.id) in arel[agent] and (e2.id, e1.id) in arel[agent]
                if e_lt or (e_eq and (w1.id, w2.id) in wrel[agent]):
                    edges[agent].append((f"{w1.id}⊗{e1.id}", f"{w2.id}⊗{e2.id}"))
    return dx.PointedState(dx.mk_model(worlds, model.frame.agents, edges), designated)


# --- direct plan-execution definitions ----------------------------------------


def _guard_true(guard: cn.Constraint, assignment: Mapping[str, str]) -> bool:
    return _eval(guard, assignment)


def oracle_compatible(lib, subplan: Mapping[str, str], history: Sequence[str]) -> bool:
    """A history fits a subplan iff every executed point is activated and
    every activated ordering whose successor ran had its predecessor run first."""
    executed: set[str] = set()
    for tp_id in history:
        tp = lib.timepoint(tp_id)
        if not _guard_true(tp.guard, subplan):
            return False
        for o in lib.orderings:
            if o.succ == tp_id and _guard_true(o.guard, subplan) and o.pred not in executed:
                return False
        executed.add(tp_id)
    return True


def oracle_viable(lib, subplan: Mapping[str, str]) -> bool:
    """A subplan is executable at all iff its activated precedence graph is acyclic."""
    succs: dict[str, list[str]] = {}
    for o in lib.orderings:
        if _guard_true(o.guard, subplan):
            succs.setdefault(o.pred, []).append(o.succ)
    visiting: set[str] = set()
    done: set[str] = set()

    def has_cycle(node: str) -> bool:
        if node in done:
            return False
        visiting.add(node)
        for nxt in succs.get(node, ()):
            if nxt in visiting or has_cycle(nxt):
                return True
        visiting.discard(node)
        done.add(node)
        return False

    return not any(has_cycle(n) for n in list(succs))


def _subplans(lib) -> list[dict[str, str]]:
    names = [v.name for v in lib.variables]
    return [
        dict(zip(names, values))
        for values in itertools.product(*(v.domain for v in lib.variables))
    ]


def _satisfies_all(assignment: Mapping[str, str], constraints: Iterable[cn.Constraint]) -> bool:
    return all(_eval(c, assignment) for c in constraints)


def oracle_failure(lib, initial: Sequence[cn.Constraint], history: Sequence[str]) -> bool:
    """No initially-allowed executable subplan is compatible with the history."""
    return not any(
        _satisfies_all(g, initial)
        and oracle_viable(lib, g)
        and oracle_compatible(lib, g, history)
        for g in _subplans(lib)
    )


def oracle_success(lib, initial: Sequence[cn.Constraint], history: Sequence[str]) -> bool:
    """Some initially-allowed executable compatible subplan has all activated points executed."""
    done = set(history)
    for g in _subplans(lib):
        if not (
            _satisfies_all(g, initial)
            and oracle_viable(lib, g)
            and oracle_compatible(lib, g, history)
        ):
            continue
        activated = [tp.id for tp in lib.timepoints if _guard_true(tp.guard, g)]
        if all(tp_id in done for tp_id in activated):
            return True
    return False


def oracle_success_on(kb: KnowledgeBase, lib) -> bool:
    """Success on a knowledge base, via enumeration only."""
    for g in _subplans(lib):
        cs = set(kb.constraints) | {cn.Assign(v, val) for v, val in g.items()}
        if not oracle_satisfiable(kb.decls, cs):
            continue
        activated = [tp.id for tp in lib.timepoints if _guard_true(tp.guard, g)]
        if all(oracle_entails(kb, cn.Assign(tp_id, "T")) for tp_id in activated):
            return True
    return False


def oracle_feasible_subplans(kb: KnowledgeBase, lib) -> list[dict[str, str]]:
    out = []
    for g in _subplans(lib):
        cs = set(kb.constraints) | {cn.Assign(v, val) for v, val in g.items()}
        if oracle_satisfiable(kb.decls, cs):
            out.append(g)
    return out
