"""Seeded random generators for constraints, models, formulas, and libraries."""

from __future__ import annotations

import itertools
import random
from typing import Optional, Sequence

from epike import constraints as cn
from epike import doxastic as dx
from epike import planlib as pl
from epike.kb import KnowledgeBase, kb_new


def rand_decls(rng: random.Random, max_vars: int = 3, max_domain: int = 3) -> list[cn.VariableDecl]:
    n = rng.randint(1, max_vars)
    decls = []
    for i in range(n):
        size = rng.randint(2, max_domain)
        decls.append(cn.VariableDecl(f"v{i}", tuple(f"d{j}" for j in range(size))))
    return decls


def rand_constraint(rng: random.Random, decls: Sequence[cn.VariableDecl], depth: int = 3) -> cn.Constraint:
    if depth <= 0 or rng.random() < 0.4:
        roll = rng.random()
        if roll < 0.05:
            return cn.TOP
        if roll < 0.1:
            return cn.BOTTOM
        d = rng.choice(list(decls))
        return cn.Assign(d.name, rng.choice(list(d.domain)))
    roll = rng.random()
    if roll < 0.34:
        return cn.Not(rand_constraint(rng, decls, depth - 1))
    arity = rng.randint(2, 3)
    ops = tuple(rand_constraint(rng, decls, depth - 1) for _ in range(arity))
    return cn.And(ops) if roll < 0.67 else cn.Or(ops)


def rand_kb(rng: random.Random, decls: Sequence[cn.VariableDecl], max_constraints: int = 4) -> KnowledgeBase:
    n = rng.randint(0, max_constraints)
    return kb_new(decls, [rand_constraint(rng, decls) for _ in range(n)])


def rand_model(
    rng: random.Random,
    decls: Sequence[cn.VariableDecl],
    agents: Sequence[str] = ("a", "b"),
    max_worlds: int = 4,
) -> dx.PlausibilityModel:
    """Random model: per agent, a random partition into components and a random
    ranking within each component (so the preorder properties hold by construction)."""
    n = rng.randint(1, max_worlds)
    worlds = [dx.World(f"w{i}", rand_kb(rng, decls)) for i in range(n)]
    edges: dict[str, list[tuple[str, str]]] = {}
    for agent in agents:
        comp_of = {w.id: rng.randint(0, max(0, n // 2)) for w in worlds}
        rank_of = {w.id: rng.randint(0, 2) for w in worlds}
        pairs = [
            (u.id, v.id)
            for u in worlds
            for v in worlds
            if comp_of[u.id] == comp_of[v.id] and rank_of[u.id] <= rank_of[v.id]
        ]
        edges[agent] = pairs
    return dx.mk_model(worlds, agents, edges)


def rand_formula(
    rng: random.Random,
    decls: Sequence[cn.VariableDecl],
    agents: Sequence[str],
    depth: int = 3,
    allow_suc: bool = False,
) -> dx.Formula:
    if depth <= 0 or rng.random() < 0.35:
        roll = rng.random()
        c = rand_constraint(rng, decls, depth=1)
        if allow_suc and roll < 0.1:
            return dx.SUC
        if roll < 0.4:
            return dx.In(c)
        if roll < 0.7:
            return dx.Entailed(c)
        return dx.Sat(c)
    roll = rng.random()
    if roll < 0.3:
        return dx.Not(rand_formula(rng, decls, agents, depth - 1, allow_suc))
    if roll < 0.55:
        arity = rng.randint(2, 3)
        return dx.And(tuple(rand_formula(rng, decls, agents, depth - 1, allow_suc) for _ in range(arity)))
    agent = rng.choice(list(agents))
    if roll < 0.8:
        return dx.belief(agent, rand_formula(rng, decls, agents, depth - 1, allow_suc))
    return dx.CondBelief(
        agent,
        rand_formula(rng, decls, agents, depth - 1, allow_suc),
        rand_formula(rng, decls, agents, depth - 1, allow_suc),
    )


def rand_library(
    rng: random.Random,
    agents: Sequence[str] = ("a", "b"),
    allow_cycles: bool = True,
    max_vars: int = 2,
    max_timepoints: int = 5,
    max_orderings: int = 4,
) -> pl.PlanLibrary:
    """Random plan library with assignment-conjunction guards.

    Ordering guards are built by merging the endpoint guards (so entailment
    holds by construction) plus optional extra assignments; cycles are allowed
    unless disabled, exercising the nogood machinery.
    """
    decls = rand_decls(rng, max_vars=max_vars, max_domain=3)
    decl_map = {d.name: d for d in decls}
    n_tp = rng.randint(2, max_timepoints)
    timepoints = []
    for i in range(n_tp):
        guard = _rand_guard(rng, decls, max_assigns=min(2, len(decls)))
        timepoints.append(pl.TimePoint(f"e{i}", rng.choice(list(agents)), guard))
    orderings = []
    attempts = rng.randint(0, max_orderings)
    for _ in range(attempts):
        pred, succ = rng.sample([tp.id for tp in timepoints], 2)
        if not allow_cycles and any(o.pred == succ and o.succ == pred for o in orderings):
            continue
        merged = _merge_guards(
            next(tp.guard for tp in timepoints if tp.id == pred),
            next(tp.guard for tp in timepoints if tp.id == succ),
        )
        if merged is None:
            continue
        if rng.random() < 0.3:
            d = rng.choice(decls)
            extra = cn.Assign(d.name, rng.choice(list(d.domain)))
            widened = _merge_guards(merged, extra)
            if widened is not None:
                merged = widened
        if any(o.pred == pred and o.succ == succ for o in orderings):
            continue
        orderings.append(pl.OrderingConstraint(pred, succ, merged))
    lib = pl.PlanLibrary(decls, timepoints, orderings, agents)
    if not allow_cycles:
        assert not lib.nogoods
    return lib


def _rand_guard(rng: random.Random, decls: Sequence[cn.VariableDecl], max_assigns: int) -> cn.Constraint:
    k = rng.randint(0, max_assigns)
    chosen = rng.sample(list(decls), k) if k else []
    return cn.conj([cn.Assign(d.name, rng.choice(list(d.domain))) for d in sorted(chosen)])


def _assigns(guard: cn.Constraint) -> list[cn.Assign]:
    if isinstance(guard, cn.Top):
        return []
    if isinstance(guard, cn.Assign):
        return [guard]
    assert isinstance(guard, cn.And)
    return [a for a in guard.operands if isinstance(a, cn.Assign)]


def _merge_guards(g1: cn.Constraint, g2: cn.Constraint) -> Optional[cn.Constraint]:
    merged: dict[str, str] = {}
    for a in _assigns(g1) + _assigns(g2):
        if merged.get(a.var, a.value) != a.value:
            return None
        merged[a.var] = a.value
    return cn.conj([cn.Assign(var, val) for var, val in sorted(merged.items())])


def rand_history(rng: random.Random, lib: pl.PlanLibrary, max_len: int = 4) -> list[str]:
    """Random duplicate-free execution prefix (not necessarily sensible)."""
    ids = [tp.id for tp in lib.timepoints]
    rng.shuffle(ids)
    return ids[: rng.randint(0, min(max_len, len(ids)))]


def rand_initial_constraints(rng: random.Random, lib: pl.PlanLibrary, max_n: int = 2) -> list[cn.Constraint]:
    return [
        rand_constraint(rng, lib.variables, depth=2)
        for _ in range(rng.randint(0, max_n))
    ]


def rand_lib_state(
    rng: random.Random,
    lib: pl.PlanLibrary,
    max_worlds: int = 3,
) -> dx.PointedState:
    """Random compiled pointed state over a plan library's vocabulary."""
    n = rng.randint(1, max_worlds)
    worlds = [
        dx.World(f"w{i}", kb_new(lib.variables, rand_initial_constraints(rng, lib)))
        for i in range(n)
    ]
    edges: dict[str, list[tuple[str, str]]] = {}
    for agent in lib.agents:
        comp_of = {w.id: rng.randint(0, max(0, n // 2)) for w in worlds}
        rank_of = {w.id: rng.randint(0, 2) for w in worlds}
        edges[agent] = [
            (u.id, v.id)
            for u in worlds
            for v in worlds
            if comp_of[u.id] == comp_of[v.id] and rank_of[u.id] <= rank_of[v.id]
        ]
    ids = [w.id for w in worlds]
    designated = frozenset(rng.sample(ids, rng.randint(1, n)))
    raw = dx.PointedState(dx.mk_model(worlds, lib.agents, edges), designated)
    return pl.compile_initial_state(lib, raw)


def rand_template_action(rng: random.Random, lib: pl.PlanLibrary, history: Sequence[str] = ()):
    """Random instance of one of the five action templates."""
    from epike import actions as ac

    kind = rng.choice(["execute", "intent", "explain", "ask", "noop"])
    agents = list(lib.agents)
    if kind == "execute":
        return ac.mk_execution_action(lib, rng.choice([tp.id for tp in lib.timepoints]))
    if kind == "intent":
        var = rng.choice(list(lib.variables))
        return ac.mk_intent_announcement(
            lib, rng.choice(agents), cn.Assign(var.name, rng.choice(list(var.domain)))
        )
    actor = rng.choice(agents)
    formula = rand_explanation_formula(rng, lib, actor)
    if kind == "explain":
        return ac.mk_explanation(lib, actor, formula)
    if kind == "ask":
        askee = rng.choice([a for a in agents if a != actor])
        return ac.mk_question(lib, actor, askee, dx.In(rand_pool_constraint(rng, lib)))
    return ac.mk_noop(lib, actor)


def rand_pool_constraint(rng: random.Random, lib: pl.PlanLibrary) -> cn.Constraint:
    """A constraint that plausibly appears in some world's knowledge base."""
    if rng.random() < 0.5:
        return rand_constraint(rng, lib.variables, depth=2)
    return rng.choice(sorted(lib.static_constraints, key=cn.print_constraint))


def rand_explanation_formula(rng: random.Random, lib: pl.PlanLibrary, actor: str):
    c = rand_pool_constraint(rng, lib)
    base = dx.In(c) if rng.random() < 0.7 else dx.Not(dx.In(c))
    others = [a for a in lib.agents if a != actor]
    if others and rng.random() < 0.3:
        return dx.belief(rng.choice(others), base)
    return base
