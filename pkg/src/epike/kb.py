"""Knowledge bases over finite-domain constraints, with pluggable solvers.

A `KnowledgeBase` is an immutable set of constraints plus variable
declarations. Membership (`contains`) is purely structural; semantic questions
(consistency, entailment) go through a solver backend:

* `EnumerationBackend` — exhaustive truth-table enumeration. Exponential, kept
  as the always-available oracle that tests compare against.
* `BacktrackingBackend` — depth-first search with three-valued constraint
  pruning and a query cache keyed by (declaration tuple, constraint set).
  This is the default production backend.

Knowledge bases are interned so equal bases share one instance, which makes
the query caches effective across the whole process.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Optional, Protocol, Sequence

from . import caching
from .constraints import (
    Assign,
    Bottom,
    Constraint,
    Not,
    Top,
    VariableDecl,
    conj,
    constraint_vars,
    eval_constraint,
    eval_constraint_partial,
    validate_constraint,
)
from .errors import MalformedConstraintError


class SolverBackend(Protocol):
    def satisfiable(self, decls: tuple[VariableDecl, ...], constraints: frozenset[Constraint]) -> bool:
        """True iff some total assignment over `decls` satisfies all constraints."""


class EnumerationBackend:
    """Truth-table oracle: try every total assignment. No caching, no pruning."""

    def satisfiable(self, decls: tuple[VariableDecl, ...], constraints: frozenset[Constraint]) -> bool:
        names = [d.name for d in decls]
        for values in itertools.product(*(d.domain for d in decls)):
            assignment = dict(zip(names, values))
            if all(eval_constraint(c, assignment) for c in constraints):
                return True
        return False


class BacktrackingBackend:
    """Backtracking search with three-valued pruning and a global query cache."""

    def __init__(self) -> None:
        self._cache: dict[tuple, bool] = caching.register_dict({})

    def satisfiable(self, decls: tuple[VariableDecl, ...], constraints: frozenset[Constraint]) -> bool:
        key = (decls, constraints)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        result = self._search(decls, tuple(constraints))
        self._cache[key] = result
        return result

    @staticmethod
    def _search(decls: tuple[VariableDecl, ...], constraints: tuple[Constraint, ...]) -> bool:
        # Ground constraints (no variables) are decided up front.
        by_var: dict[str, list[Constraint]] = {d.name: [] for d in decls}
        for c in constraints:
            cvars = constraint_vars(c)
            if not cvars:
                if eval_constraint_partial(c, {}) is False:
                    return False
                continue
            for v in cvars:
                by_var[v].append(c)
        # Most-constrained-first keeps the search shallow; name breaks ties
        # deterministically.
        order = sorted(decls, key=lambda d: (-len(by_var[d.name]), d.name))
        assignment: dict[str, str] = {}

        def extend(depth: int) -> bool:
            if depth == len(order):
                return True
            decl = order[depth]
            for value in decl.domain:
                assignment[decl.name] = value
                ok = True
                for c in by_var[decl.name]:
                    if eval_constraint_partial(c, assignment) is False:
                        ok = False
                        break
                if ok and extend(depth + 1):
                    return True
                del assignment[decl.name]
            return False

        return extend(0)


_DEFAULT_BACKEND: SolverBackend = BacktrackingBackend()


def default_backend() -> SolverBackend:
    return _DEFAULT_BACKEND


def set_default_backend(backend: SolverBackend) -> SolverBackend:
    """Swap the process-default backend; returns the previous one."""
    global _DEFAULT_BACKEND
    previous = _DEFAULT_BACKEND
    _DEFAULT_BACKEND = backend
    caching.clear_all_caches()
    return previous


class KnowledgeBase:
    """Immutable constraint set over declared variables."""

    __slots__ = ("decls", "constraints", "_decl_map", "_hash")

    decls: tuple[VariableDecl, ...]
    constraints: frozenset[Constraint]

    def __init__(self, decls: tuple[VariableDecl, ...], constraints: frozenset[Constraint]):
        object.__setattr__(self, "decls", decls)
        object.__setattr__(self, "constraints", constraints)
        object.__setattr__(self, "_decl_map", {d.name: d for d in decls})
        object.__setattr__(self, "_hash", hash((decls, constraints)))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("KnowledgeBase is immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, KnowledgeBase)
            and self._hash == other._hash
            and self.decls == other.decls
            and self.constraints == other.constraints
        )

    def __repr__(self) -> str:
        return f"KnowledgeBase({len(self.decls)} vars, {len(self.constraints)} constraints)"

    @property
    def decl_map(self) -> dict[str, VariableDecl]:
        return self._decl_map

    def contains(self, c: Constraint) -> bool:
        """Syntactic membership (structural equality, no normalization)."""
        return c in self.constraints

    def add(self, c: Constraint) -> "KnowledgeBase":
        validate_constraint(c, self._decl_map)
        if c in self.constraints:
            return self
        return _intern(self.decls, self.constraints | {c})

    def add_all(self, cs: Iterable[Constraint]) -> "KnowledgeBase":
        out = self
        for c in cs:
            out = out.add(c)
        return out

    def remove(self, c: Constraint) -> "KnowledgeBase":
        if c not in self.constraints:
            return self
        return _intern(self.decls, self.constraints - {c})


_INTERN: dict[tuple, KnowledgeBase] = caching.register_dict({})


def _intern(decls: tuple[VariableDecl, ...], constraints: frozenset[Constraint]) -> KnowledgeBase:
    key = (decls, constraints)
    kb = _INTERN.get(key)
    if kb is None:
        kb = KnowledgeBase(decls, constraints)
        _INTERN[key] = kb
    return kb


def kb_new(decls: Iterable[VariableDecl], constraints: Iterable[Constraint] = ()) -> KnowledgeBase:
    decl_tuple = tuple(sorted(decls))
    names = [d.name for d in decl_tuple]
    if len(set(names)) != len(names):
        raise MalformedConstraintError(f"duplicate variable declarations in {names}")
    decl_map = {d.name: d for d in decl_tuple}
    cs = []
    for c in constraints:
        validate_constraint(c, decl_map)
        cs.append(c)
    return _intern(decl_tuple, frozenset(cs))


_QUERY_CACHE: dict[tuple, bool] = caching.register_dict({})


def kb_consistent(kb: KnowledgeBase, backend: Optional[SolverBackend] = None) -> bool:
    """True iff the knowledge base has at least one model."""
    if backend is not None:
        return backend.satisfiable(kb.decls, kb.constraints)
    key = (kb, None, False)
    hit = _QUERY_CACHE.get(key)
    if hit is None:
        hit = _DEFAULT_BACKEND.satisfiable(kb.decls, kb.constraints)
        _QUERY_CACHE[key] = hit
    return hit


def kb_sat_with(kb: KnowledgeBase, c: Constraint, backend: Optional[SolverBackend] = None) -> bool:
    """True iff kb plus `c` is consistent (`sat(c)` in the doxastic layer)."""
    validate_constraint(c, kb.decl_map)
    if backend is not None:
        return backend.satisfiable(kb.decls, kb.constraints | {c})
    key = (kb, c, False)
    hit = _QUERY_CACHE.get(key)
    if hit is None:
        hit = _DEFAULT_BACKEND.satisfiable(kb.decls, kb.constraints | {c})
        _QUERY_CACHE[key] = hit
    return hit


def kb_entails(kb: KnowledgeBase, c: Constraint, backend: Optional[SolverBackend] = None) -> bool:
    """True iff every model of kb satisfies `c`; an inconsistent kb entails everything."""
    validate_constraint(c, kb.decl_map)
    if backend is not None:
        return not backend.satisfiable(kb.decls, kb.constraints | {Not(c)})
    key = (kb, c, True)
    hit = _QUERY_CACHE.get(key)
    if hit is None:
        hit = not _DEFAULT_BACKEND.satisfiable(kb.decls, kb.constraints | {Not(c)})
        _QUERY_CACHE[key] = hit
    return hit


def kb_models(
    kb: KnowledgeBase,
    variables: Sequence[str],
    backend: Optional[SolverBackend] = None,
) -> Iterator[dict[str, str]]:
    """All assignments of `variables` extendable to a full model of kb.

    Enumerates the cartesian product of the named domains, so keep the
    projection small (it is used for subplan enumeration, not general search).
    """
    decl_map = kb.decl_map
    unknown = [v for v in variables if v not in decl_map]
    if unknown:
        raise MalformedConstraintError(f"unknown variables {unknown}")
    for values in itertools.product(*(decl_map[v].domain for v in variables)):
        candidate = conj(tuple(Assign(v, val) for v, val in zip(variables, values)))
        if kb_sat_with(kb, candidate, backend):
            yield dict(zip(variables, values))


class SolverSession:
    """Incremental push/pop view over a base knowledge base.

    The session keeps an assertion stack; queries run against the base
    constraints plus everything currently pushed, sharing the process-wide
    query cache through the backend.
    """

    def __init__(self, kb: KnowledgeBase, backend: Optional[SolverBackend] = None):
        self._kb = kb
        self._backend = backend or _DEFAULT_BACKEND
        self._stack: list[Constraint] = []

    def push(self, c: Constraint) -> None:
        validate_constraint(c, self._kb.decl_map)
        self._stack.append(c)

    def pop(self) -> Constraint:
        return self._stack.pop()

    @property
    def depth(self) -> int:
        return len(self._stack)

    def _current(self) -> frozenset[Constraint]:
        return self._kb.constraints | frozenset(self._stack)

    def check(self) -> bool:
        """Consistency of base + stack."""
        return self._backend.satisfiable(self._kb.decls, self._current())

    def entails(self, c: Constraint) -> bool:
        validate_constraint(c, self._kb.decl_map)
        return not self._backend.satisfiable(self._kb.decls, self._current() | {Not(c)})
