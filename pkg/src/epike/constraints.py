"""Finite-domain constraint language.

Constraints are propositional formulas over assignments ``var=value`` of
finite-domain variables. Conjunction/disjunction are n-ary (arity >= 2 in the
wire syntax); ``true``/``false`` are explicit atoms. Structural equality is
what knowledge-base membership uses, so no normalization ever happens on
stored constraints — the `conj`/`disj` helpers only collapse trivial arities
at construction time.

Wire syntax (lossless round trip)::

    constraint := 'true' | 'false' | var '=' value
                | '!' constraint
                | '(' constraint (' & ' constraint)+ ')'
                | '(' constraint (' | ' constraint)+ ')'
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Union

from .errors import MalformedConstraintError, ParseError


@dataclass(frozen=True, order=True)
class VariableDecl:
    """A finite-domain variable: name plus ordered domain of values."""

    name: str
    domain: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.domain:
            raise MalformedConstraintError(f"variable {self.name!r} has empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise MalformedConstraintError(f"variable {self.name!r} has duplicate domain values")


BOOL_DOMAIN = ("T", "F")


@dataclass(frozen=True)
class Assign:
    var: str
    value: str


@dataclass(frozen=True)
class Not:
    operand: "Constraint"


@dataclass(frozen=True)
class And:
    operands: tuple["Constraint", ...]


@dataclass(frozen=True)
class Or:
    operands: tuple["Constraint", ...]


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


TOP = Top()
BOTTOM = Bottom()

Constraint = Union[Assign, Not, And, Or, Top, Bottom]


def conj(operands: Iterable[Constraint]) -> Constraint:
    """N-ary conjunction; collapses arity 0 to `true` and arity 1 to the operand."""
    ops = tuple(operands)
    if not ops:
        return TOP
    if len(ops) == 1:
        return ops[0]
    return And(ops)


def disj(operands: Iterable[Constraint]) -> Constraint:
    """N-ary disjunction; collapses arity 0 to `false` and arity 1 to the operand."""
    ops = tuple(operands)
    if not ops:
        return BOTTOM
    if len(ops) == 1:
        return ops[0]
    return Or(ops)


def implies(antecedent: Constraint, consequent: Constraint) -> Constraint:
    return Or((Not(antecedent), consequent))


def constraint_vars(c: Constraint) -> frozenset[str]:
    """All variable names mentioned in a constraint."""
    match c:
        case Assign(var, _):
            return frozenset((var,))
        case Not(operand):
            return constraint_vars(operand)
        case And(ops) | Or(ops):
            out: frozenset[str] = frozenset()
            for op in ops:
                out |= constraint_vars(op)
            return out
        case _:
            return frozenset()


def validate_constraint(c: Constraint, decls: Mapping[str, VariableDecl]) -> None:
    """Raise MalformedConstraintError if `c` leaves the declared vocabulary."""
    match c:
        case Assign(var, value):
            decl = decls.get(var)
            if decl is None:
                raise MalformedConstraintError(f"unknown variable {var!r}")
            if value not in decl.domain:
                raise MalformedConstraintError(
                    f"value {value!r} not in domain of {var!r} {decl.domain}"
                )
        case Not(operand):
            validate_constraint(operand, decls)
        case And(ops) | Or(ops):
            for op in ops:
                validate_constraint(op, decls)
        case Top() | Bottom():
            pass
        case _:
            raise MalformedConstraintError(f"not a constraint: {c!r}")


def eval_constraint(c: Constraint, assignment: Mapping[str, str]) -> bool:
    """Two-valued truth under a total assignment."""
    match c:
        case Assign(var, value):
            return assignment[var] == value
        case Not(operand):
            return not eval_constraint(operand, assignment)
        case And(ops):
            return all(eval_constraint(op, assignment) for op in ops)
        case Or(ops):
            return any(eval_constraint(op, assignment) for op in ops)
        case Top():
            return True
        case _:
            return False


def eval_constraint_partial(c: Constraint, assignment: Mapping[str, str]) -> Optional[bool]:
    """Three-valued truth under a partial assignment (None = undetermined)."""
    match c:
        case Assign(var, value):
            got = assignment.get(var)
            return None if got is None else got == value
        case Not(operand):
            sub = eval_constraint_partial(operand, assignment)
            return None if sub is None else not sub
        case And(ops):
            saw_unknown = False
            for op in ops:
                sub = eval_constraint_partial(op, assignment)
                if sub is False:
                    return False
                if sub is None:
                    saw_unknown = True
            return None if saw_unknown else True
        case Or(ops):
            saw_unknown = False
            for op in ops:
                sub = eval_constraint_partial(op, assignment)
                if sub is True:
                    return True
                if sub is None:
                    saw_unknown = True
            return None if saw_unknown else False
        case Top():
            return True
        case _:
            return False


# --- textual syntax ---------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[=!()&|]))")


def print_constraint(c: Constraint) -> str:
    """Canonical text form; `parse_constraint` inverts it exactly."""
    match c:
        case Assign(var, value):
            return f"{var}={value}"
        case Not(operand):
            return "!" + print_constraint(operand)
        case And(ops):
            if len(ops) < 2:
                raise ValueError("printable conjunctions need arity >= 2 (use conj())")
            return "(" + " & ".join(print_constraint(op) for op in ops) + ")"
        case Or(ops):
            if len(ops) < 2:
                raise ValueError("printable disjunctions need arity >= 2 (use disj())")
            return "(" + " | ".join(print_constraint(op) for op in ops) + ")"
        case Top():
            return "true"
        case Bottom():
            return "false"
    raise ValueError(f"not a constraint: {c!r}")


class _Tokens:
    """Shared tokenizer for the constraint and formula grammars."""

    def __init__(self, text: str, extra_punct: str = ""):
        self.text = text
        self.toks: list[str] = []
        pattern = (
            re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[=!()&|\[\],]))")
            if extra_punct
            else _TOKEN
        )
        pos = 0
        while pos < len(text):
            m = pattern.match(text, pos)
            if m is None:
                if text[pos:].strip() == "":
                    break
                raise ParseError(f"unexpected character {text[pos]!r} at {pos} in {text!r}")
            self.toks.append(m.group("ident") or m.group("punct"))
            pos = m.end()
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of input in {self.text!r}")
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise ParseError(f"expected {tok!r}, got {got!r} in {self.text!r}")

    def done(self) -> None:
        if self.peek() is not None:
            raise ParseError(f"trailing input from {self.peek()!r} in {self.text!r}")


def parse_constraint(text: str) -> Constraint:
    toks = _Tokens(text)
    c = _parse_constraint(toks)
    toks.done()
    return c


def _parse_constraint(toks: _Tokens) -> Constraint:
    tok = toks.next()
    if tok == "true":
        return TOP
    if tok == "false":
        return BOTTOM
    if tok == "!":
        return Not(_parse_constraint(toks))
    if tok == "(":
        first = _parse_constraint(toks)
        op = toks.next()
        if op not in ("&", "|"):
            raise ParseError(f"expected '&' or '|', got {op!r} in {toks.text!r}")
        operands = [first, _parse_constraint(toks)]
        while toks.peek() == op:
            toks.next()
            operands.append(_parse_constraint(toks))
        toks.expect(")")
        return And(tuple(operands)) if op == "&" else Or(tuple(operands))
    if _IDENT.fullmatch(tok):
        toks.expect("=")
        value = toks.next()
        if not _IDENT.fullmatch(value):
            raise ParseError(f"expected a value after '=', got {value!r}")
        return Assign(tok, value)
    raise ParseError(f"unexpected token {tok!r} in {toks.text!r}")


def iter_subconstraints(c: Constraint) -> Iterator[Constraint]:
    """Pre-order walk over a constraint tree."""
    yield c
    match c:
        case Not(operand):
            yield from iter_subconstraints(operand)
        case And(ops) | Or(ops):
            for op in ops:
                yield from iter_subconstraints(op)
