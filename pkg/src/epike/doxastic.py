"""Conditional doxastic logic over knowledge bases.

Worlds carry knowledge bases; each agent orders worlds with a plausibility
preorder (reflexive, transitive, locally connected, well-founded). Belief is
truth at the most plausible worlds of an agent's epistemic component:

    (M, w) |= B[a | psi](phi)  iff  min_a([psi] ∩ cc_a(w)) ⊆ [phi]

A pointed state designates a set of worlds; a formula holds at the state iff
it holds at every designated world. `Sat(c)` is the definable abbreviation
`!entailed(!c)` kept as an explicit node so the wire syntax round-trips.

Wire syntax (lossless round trip)::

    formula := 'in' '(' constraint ')' | 'entailed' '(' constraint ')'
             | 'sat' '(' constraint ')' | 'suc'
             | '!' formula | '(' formula (' & ' formula)+ ')'
             | 'B' '[' agent ']' '(' formula ')'
             | 'B' '[' agent ' | ' formula ']' '(' formula ')'
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Protocol, Union

from . import constraints as cn
from .errors import MalformedFormulaError, ModelValidationError, ParseError
from .kb import KnowledgeBase, kb_entails, kb_sat_with


# --- plausibility frames ------------------------------------------------------


class PlausibilityFrame:
    """Per-agent preorders over a finite id set, closed at construction.

    Edges are (u, v) pairs meaning "u is at least as plausible as v" for the
    agent. Reflexive and transitive closure is applied eagerly; components and
    most-plausible sets are precomputed per agent.
    """

    __slots__ = ("ids", "agents", "le", "_comp", "_min_comp", "_key", "_hash")

    def __init__(
        self,
        ids: Iterable[str],
        agents: Iterable[str],
        edges: Mapping[str, Iterable[tuple[str, str]]],
    ):
        id_tuple = tuple(sorted(ids))
        if len(set(id_tuple)) != len(id_tuple):
            raise ModelValidationError(f"duplicate ids in {id_tuple}")
        agent_tuple = tuple(sorted(agents))
        idset = set(id_tuple)
        le: dict[str, frozenset[tuple[str, str]]] = {}
        for agent in agent_tuple:
            pairs = set()
            for u, v in edges.get(agent, ()):
                if u not in idset or v not in idset:
                    raise ModelValidationError(f"edge ({u},{v}) for {agent!r} leaves the id set")
                pairs.add((u, v))
            le[agent] = _close(idset, pairs)
        self.ids = id_tuple
        self.agents = agent_tuple
        self.le = le
        self._comp = {agent: _components(id_tuple, le[agent]) for agent in agent_tuple}
        self._min_comp: dict[tuple[str, frozenset[str]], frozenset[str]] = {}
        self._key = (
            id_tuple,
            agent_tuple,
            tuple((agent, tuple(sorted(le[agent]))) for agent in agent_tuple),
        )
        self._hash = hash(self._key)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PlausibilityFrame) and self._key == other._key

    def leq(self, agent: str, u: str, v: str) -> bool:
        """u is at least as plausible as v."""
        return (u, v) in self.le[agent]

    def strictly_less(self, agent: str, u: str, v: str) -> bool:
        """u is strictly more plausible than v."""
        pairs = self.le[agent]
        return (u, v) in pairs and (v, u) not in pairs

    def equi(self, agent: str, u: str, v: str) -> bool:
        pairs = self.le[agent]
        return (u, v) in pairs and (v, u) in pairs

    def cc(self, agent: str, ident: str) -> frozenset[str]:
        """The agent's epistemic component (connected closure) of an id."""
        return self._comp[agent][ident]

    def same_component(self, agent: str, u: str, v: str) -> bool:
        return self._comp[agent][u] is self._comp[agent][v]

    def min_set(self, agent: str, subset: frozenset[str]) -> frozenset[str]:
        """Most plausible elements of a subset (no strictly-more-plausible rival)."""
        key = (agent, subset)
        hit = self._min_comp.get(key)
        if hit is not None:
            return hit
        pairs = self.le[agent]
        result = frozenset(
            w
            for w in subset
            if not any((v, w) in pairs and (w, v) not in pairs for v in subset)
        )
        self._min_comp[key] = result
        return result

    def violations(self, label: str) -> list[str]:
        """Describe every preorder-property failure (empty list when sound)."""
        ids = self.ids
        found: list[str] = []
        for agent in self.agents:
            pairs = self.le[agent]
            for w in ids:
                if (w, w) not in pairs:
                    found.append(f"{label}: relation for {agent!r} not reflexive at {w!r}")
            for u, v in pairs:
                for x, y in pairs:
                    if v == x and (u, y) not in pairs:
                        found.append(
                            f"{label}: relation for {agent!r} not transitive via {u!r}<={v!r}<={y!r}"
                        )
            comp_map = self._comp[agent]
            for u in ids:
                for v in comp_map[u]:
                    if (u, v) not in pairs and (v, u) not in pairs:
                        found.append(
                            f"{label}: component of {agent!r} not locally connected at ({u!r},{v!r})"
                        )
            for comp in set(comp_map.values()):
                if not self.min_set(agent, comp):
                    found.append(
                        f"{label}: no most-plausible element for {agent!r} in component {sorted(comp)}"
                    )
        return found

    def validate(self, label: str) -> None:
        """Check preorder properties, raising with a witness on failure."""
        found = self.violations(label)
        if found:
            raise ModelValidationError(found[0])


def _close(ids: set[str], pairs: set[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    """Reflexive-transitive closure of a pair set."""
    closed = set(pairs)
    for i in ids:
        closed.add((i, i))
    succ: dict[str, set[str]] = {i: set() for i in ids}
    for u, v in closed:
        succ[u].add(v)
    changed = True
    while changed:
        changed = False
        for u in ids:
            reach = set()
            for v in succ[u]:
                reach |= succ[v]
            new = reach - succ[u]
            if new:
                succ[u] |= new
                changed = True
    return frozenset((u, v) for u in ids for v in succ[u])


def _components(ids: tuple[str, ...], pairs: frozenset[tuple[str, str]]) -> dict[str, frozenset[str]]:
    """Connected components of the comparability graph (≤ ∪ ≥, transitively)."""
    parent = {i: i for i in ids}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in pairs:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    groups: dict[str, set[str]] = {}
    for i in ids:
        groups.setdefault(find(i), set()).add(i)
    frozen = {root: frozenset(members) for root, members in groups.items()}
    return {i: frozen[find(i)] for i in ids}


# --- worlds and models --------------------------------------------------------


@dataclass(frozen=True, order=True)
class World:
    id: str
    kb: KnowledgeBase


class PlausibilityModel:
    """Finite set of KB-worlds plus per-agent plausibility preorders."""

    __slots__ = ("worlds", "frame", "_world_map", "_ext_cache", "_hash")

    def __init__(self, worlds: Iterable[World], frame: PlausibilityFrame):
        world_tuple = tuple(sorted(worlds))
        if tuple(w.id for w in world_tuple) != frame.ids:
            raise ModelValidationError("world ids do not match the frame ids")
        decls = {w.kb.decls for w in world_tuple}
        if len(decls) > 1:
            raise ModelValidationError("worlds must share one variable vocabulary")
        self.worlds = world_tuple
        self.frame = frame
        self._world_map = {w.id: w for w in world_tuple}
        self._ext_cache: dict[tuple, frozenset[str]] = {}
        self._hash = hash((world_tuple, frame))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PlausibilityModel)
            and self._hash == other._hash
            and self.worlds == other.worlds
            and self.frame == other.frame
        )

    def __repr__(self) -> str:
        return f"PlausibilityModel({[w.id for w in self.worlds]}, agents={list(self.frame.agents)})"

    @property
    def agents(self) -> tuple[str, ...]:
        return self.frame.agents

    def world(self, ident: str) -> World:
        return self._world_map[ident]

    def kb(self, ident: str) -> KnowledgeBase:
        return self._world_map[ident].kb

    def cc(self, agent: str, ident: str) -> frozenset[str]:
        return self.frame.cc(agent, ident)

    def min_set(self, agent: str, subset: frozenset[str]) -> frozenset[str]:
        return self.frame.min_set(agent, subset)


def mk_model(
    worlds: Iterable[World],
    agents: Iterable[str],
    edges: Mapping[str, Iterable[tuple[str, str]]],
) -> PlausibilityModel:
    """Build a model, closing the plausibility relations eagerly."""
    world_tuple = tuple(sorted(worlds))
    frame = PlausibilityFrame((w.id for w in world_tuple), agents, edges)
    return PlausibilityModel(world_tuple, frame)


def validate_model(model: PlausibilityModel) -> list[str]:
    """List every plausibility-property violation; an empty list means sound."""
    return model.frame.violations("model")


@dataclass(frozen=True)
class PointedState:
    """A model with a nonempty set of designated worlds."""

    model: PlausibilityModel
    designated: frozenset[str]

    def __post_init__(self) -> None:
        if not self.designated:
            raise ModelValidationError("a pointed state needs at least one designated world")
        missing = self.designated - set(self.model.frame.ids)
        if missing:
            raise ModelValidationError(f"designated worlds {sorted(missing)} not in the model")


# --- formulas -------------------------------------------------------------


@dataclass(frozen=True)
class In:
    constraint: cn.Constraint


@dataclass(frozen=True)
class Entailed:
    constraint: cn.Constraint


@dataclass(frozen=True)
class Sat:
    """Abbreviation for !entailed(!c), kept explicit for the wire syntax."""

    constraint: cn.Constraint


@dataclass(frozen=True)
class Not:
    operand: "Formula"


@dataclass(frozen=True)
class And:
    operands: tuple["Formula", ...]


@dataclass(frozen=True)
class CondBelief:
    agent: str
    condition: "Formula"
    body: "Formula"


@dataclass(frozen=True)
class Suc:
    """Success of the plan library in play; needs `lib` at evaluation time."""


SUC = Suc()
Formula = Union[In, Entailed, Sat, Not, And, CondBelief, Suc]

TRUE_FORMULA = And(())


def belief(agent: str, body: Formula) -> CondBelief:
    """Plain belief: conditional belief under the trivially-true condition."""
    return CondBelief(agent, TRUE_FORMULA, body)


def f_or(operands: Iterable[Formula]) -> Formula:
    return Not(And(tuple(Not(op) for op in operands)))


class SuccessPredicate(Protocol):
    def success_on(self, kb: KnowledgeBase) -> bool:
        """Whether the world-level success condition holds on a knowledge base."""


def extension(
    model: PlausibilityModel,
    formula: Formula,
    lib: Optional[SuccessPredicate] = None,
) -> frozenset[str]:
    """World ids where the formula holds; cached per (model, formula, lib)."""
    key = (formula, lib)
    hit = model._ext_cache.get(key)
    if hit is not None:
        return hit
    frame = model.frame
    all_ids = frozenset(frame.ids)
    match formula:
        case In(c):
            result = frozenset(w.id for w in model.worlds if w.kb.contains(c))
        case Entailed(c):
            result = frozenset(w.id for w in model.worlds if kb_entails(w.kb, c))
        case Sat(c):
            result = frozenset(w.id for w in model.worlds if kb_sat_with(w.kb, c))
        case Suc():
            if lib is None:
                raise MalformedFormulaError("evaluating `suc` needs the plan library")
            result = frozenset(w.id for w in model.worlds if lib.success_on(w.kb))
        case Not(op):
            result = all_ids - extension(model, op, lib)
        case And(ops):
            result = all_ids
            for op in ops:
                result &= extension(model, op, lib)
        case CondBelief(agent, condition, body):
            if agent not in frame.agents:
                raise MalformedFormulaError(f"unknown agent {agent!r} in belief formula")
            cond_ext = extension(model, condition, lib)
            body_ext = extension(model, body, lib)
            # Belief is constant on each epistemic component, so decide per
            # component rather than per world.
            verdicts: dict[frozenset[str], bool] = {}
            members = []
            for wid in frame.ids:
                comp = frame.cc(agent, wid)
                verdict = verdicts.get(comp)
                if verdict is None:
                    verdict = frame.min_set(agent, cond_ext & comp) <= body_ext
                    verdicts[comp] = verdict
                if verdict:
                    members.append(wid)
            result = frozenset(members)
        case _:
            raise MalformedFormulaError(f"not a formula: {formula!r}")
    model._ext_cache[key] = result
    return result


def evaluate(
    state: PointedState,
    formula: Formula,
    lib: Optional[SuccessPredicate] = None,
) -> bool:
    """Truth at a pointed state: the formula holds at every designated world."""
    return state.designated <= extension(state.model, formula, lib)


def local_perspective(state: PointedState, agent: str) -> PointedState:
    """The agent's subjective state: most plausible worlds of its components."""
    frame = state.model.frame
    union: frozenset[str] = frozenset()
    for wid in state.designated:
        union |= frame.cc(agent, wid)
    return PointedState(state.model, frame.min_set(agent, union))


def split_globals(state: PointedState) -> list[PointedState]:
    """One single-designated state per designated world, in id order."""
    return [PointedState(state.model, frozenset((wid,))) for wid in sorted(state.designated)]


# --- textual syntax ---------------------------------------------------------


def print_formula(f: Formula) -> str:
    """Canonical text form; `parse_formula` inverts it exactly."""
    match f:
        case In(c):
            return f"in({cn.print_constraint(c)})"
        case Entailed(c):
            return f"entailed({cn.print_constraint(c)})"
        case Sat(c):
            return f"sat({cn.print_constraint(c)})"
        case Suc():
            return "suc"
        case Not(op):
            return "!" + print_formula(op)
        case And(ops):
            if len(ops) < 2:
                raise ValueError("printable formula conjunctions need arity >= 2")
            return "(" + " & ".join(print_formula(op) for op in ops) + ")"
        case CondBelief(agent, condition, body):
            if condition == TRUE_FORMULA:
                return f"B[{agent}]({print_formula(body)})"
            return f"B[{agent} | {print_formula(condition)}]({print_formula(body)})"
    raise ValueError(f"not a formula: {f!r}")


def parse_formula(text: str) -> Formula:
    toks = cn._Tokens(text, extra_punct="[],")
    f = _parse_formula(toks)
    toks.done()
    return f


def _parse_formula(toks: cn._Tokens) -> Formula:
    tok = toks.next()
    if tok in ("in", "entailed", "sat"):
        toks.expect("(")
        c = cn._parse_constraint(toks)
        toks.expect(")")
        return {"in": In, "entailed": Entailed, "sat": Sat}[tok](c)
    if tok == "suc":
        return SUC
    if tok == "!":
        return Not(_parse_formula(toks))
    if tok == "(":
        operands = [_parse_formula(toks)]
        toks.expect("&")
        operands.append(_parse_formula(toks))
        while toks.peek() == "&":
            toks.next()
            operands.append(_parse_formula(toks))
        toks.expect(")")
        return And(tuple(operands))
    if tok == "B":
        toks.expect("[")
        agent = toks.next()
        condition: Formula = TRUE_FORMULA
        if toks.peek() == "|":
            toks.next()
            condition = _parse_formula(toks)
        toks.expect("]")
        toks.expect("(")
        body = _parse_formula(toks)
        toks.expect(")")
        return CondBelief(agent, condition, body)
    raise ParseError(f"unexpected token {tok!r} in {toks.text!r}")
