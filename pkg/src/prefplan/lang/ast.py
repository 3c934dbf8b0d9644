"""Abstract syntax for domain and instance files.

All nodes are frozen dataclasses so that structural equality is plain ``==``.
Source positions are carried where diagnostics need them but never take part
in comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

STATE = "state-fluent"
ACTION = "action-fluent"
NON_FLUENT = "non-fluent"
FLUENT_KINDS = (STATE, ACTION, NON_FLUENT)

BOOL = "bool"
REAL = "real"


def _pos():
    return field(default=0, compare=False, repr=False)


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: Union[bool, float]


@dataclass(frozen=True)
class EnumConst:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class FluentRef:
    name: str
    args: tuple = ()
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "~"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class IfThenElse:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"


@dataclass(frozen=True)
class Bernoulli:
    prob: "Expr"
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True)
class KronDelta:
    arg: "Expr"


@dataclass(frozen=True)
class Discrete:
    type_name: str
    branches: tuple  # ((value_name, Expr), ...)
    line: int = _pos()
    col: int = _pos()


Expr = Union[Const, EnumConst, Var, FluentRef, Unary, Binary, IfThenElse,
             Bernoulli, KronDelta, Discrete]

STOCHASTIC = (Bernoulli, KronDelta, Discrete)

ARITH_OPS = ("+", "-", "*", "/")
COMPARE_OPS = ("==", "~=", "<", "<=", ">", ">=")
LOGIC_OPS = ("^", "|", "=>", "<=>")


def children(expr):
    if isinstance(expr, Unary):
        return (expr.operand,)
    if isinstance(expr, Binary):
        return (expr.left, expr.right)
    if isinstance(expr, IfThenElse):
        return (expr.cond, expr.then, expr.orelse)
    if isinstance(expr, Bernoulli):
        return (expr.prob,)
    if isinstance(expr, KronDelta):
        return (expr.arg,)
    if isinstance(expr, Discrete):
        return tuple(p for _, p in expr.branches)
    if isinstance(expr, FluentRef):
        return expr.args
    return ()


def walk(expr):
    """Yield every node of ``expr`` in pre-order."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def is_stochastic(expr) -> bool:
    return any(isinstance(n, STOCHASTIC) for n in walk(expr))


# -- declarations ------------------------------------------------------------


@dataclass(frozen=True)
class EnumDecl:
    name: str
    values: tuple
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True)
class FluentDecl:
    name: str
    kind: str
    value_type: str  # "bool", "real", or an enum/object type name
    params: tuple = ()
    default: Union[bool, float, str, None] = None
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True)
class Cpf:
    target: str
    params: tuple  # variable names without the leading '?'
    body: Expr
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True)
class DomainModel:
    name: str
    requirements: tuple = ()
    enum_decls: tuple = ()
    object_types: tuple = ()
    fluent_decls: tuple = ()
    cpfs: tuple = ()
    reward: Expr = Const(0.0)
    preconditions: tuple = ()
    preferences: tuple = ()

    def fluent(self, name):
        for f in self.fluent_decls:
            if f.name == name:
                return f
        return None

    def enum(self, name):
        for e in self.enum_decls:
            if e.name == name:
                return e
        return None

    def cpf(self, name):
        for c in self.cpfs:
            if c.target == name:
                return c
        return None

    def fluents_of_kind(self, kind):
        return [f for f in self.fluent_decls if f.kind == kind]


@dataclass(frozen=True)
class Assignment:
    fluent: str
    args: tuple
    value: Union[bool, float, str]
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True)
class InstanceModel:
    name: str
    domain_name: str
    objects: tuple = ()  # ((type_name, (obj, ...)), ...)
    non_fluents: tuple = ()
    init_state: tuple = ()
    horizon: int = 1
    discount: float = 1.0
    preferences: tuple = ()

    def objects_of(self, type_name):
        for t, objs in self.objects:
            if t == type_name:
                return objs
        return None
