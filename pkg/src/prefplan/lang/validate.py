"""Static checks binding a domain to an instance.

Every violated rule yields its own :class:`Diagnostic`; all of them are
collected and raised together as one :class:`ValidationError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import Diagnostic, ValidationError
from . import ast

NORM_TOL = 1e-9

BOOL_T = "bool"
REAL_T = "real"
UNKNOWN = "?"


@dataclass(frozen=True)
class CheckedModel:
    """A domain/instance pair that passed :func:`validate`.

    ``types`` maps every enum and object type to its ordered values.
    """
    domain: ast.DomainModel
    instance: ast.InstanceModel
    types: dict = field(compare=False)
    preferences: tuple = ()

    def fluent(self, name):
        return self.domain.fluent(name)


def const_value(expr):
    """Fold an expression built only from literals; None if it has fluents."""
    if isinstance(expr, ast.Const):
        return expr.value
    if isinstance(expr, ast.Unary) and expr.op == "-":
        v = const_value(expr.operand)
        return None if v is None else -v
    if isinstance(expr, ast.Binary) and expr.op in ast.ARITH_OPS:
        a, b = const_value(expr.left), const_value(expr.right)
        if a is None or b is None:
            return None
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if b == 0:
            return None
        return a / b
    return None


def _enum(t):
    return t.startswith("enum:")


def _sym(t):
    return t.startswith("sym:")


class _Checker:
    def __init__(self, domain, instance):
        self.d = domain
        self.i = instance
        self.diags = []
        self.types = {}
        self.fluents = {f.name: f for f in domain.fluent_decls}

    def err(self, code, msg, node=None, where=None):
        line = getattr(node, "line", 0) or getattr(where, "line", 0)
        col = getattr(node, "col", 0) or getattr(where, "col", 0)
        self.diags.append(Diagnostic(code, msg, line, col))

    # -- declarations ----------------------------------------------------------

    def check_types(self):
        for e in self.d.enum_decls:
            self.types[e.name] = tuple(e.values)
        declared_objs = {}
        for tname, objs in self.i.objects:
            if tname not in self.d.object_types:
                self.err("E-UNDECL", f"objects given for undeclared object "
                         f"type '{tname}'")
                continue
            if len(set(objs)) != len(objs):
                self.err("E-DUP", f"duplicate object in type '{tname}'")
            declared_objs[tname] = tuple(objs)
        for t in self.d.object_types:
            if t not in declared_objs:
                self.err("E-OBJ", f"no objects declared for object type '{t}'")
                self.types[t] = ()
            else:
                self.types[t] = declared_objs[t]

    def value_type(self, tname):
        if tname == "bool":
            return BOOL_T
        if tname == "real":
            return REAL_T
        if tname in self.types:
            return "enum:" + tname
        return UNKNOWN

    def literal_ok(self, tname, value):
        if tname == "bool":
            return isinstance(value, bool)
        if tname == "real":
            return isinstance(value, float) and not isinstance(value, bool)
        if tname in self.types:
            return isinstance(value, str) and value in self.types[tname]
        return False

    def check_fluents(self):
        for f in self.d.fluent_decls:
            if f.value_type not in ("bool", "real") and f.value_type not in self.types:
                self.err("E-UNDECL", f"fluent '{f.name}' has undeclared value "
                         f"type '{f.value_type}'", f)
                continue
            if f.kind == ast.ACTION and f.value_type != "bool":
                self.err("E-TYPE", f"action fluent '{f.name}' must be bool", f)
            if f.value_type == "real" and f.kind != ast.NON_FLUENT:
                self.err("E-TYPE", f"real-valued fluent '{f.name}' must be a "
                         "non-fluent", f)
            for p in f.params:
                if p not in self.types:
                    self.err("E-UNDECL", f"fluent '{f.name}' has undeclared "
                             f"parameter type '{p}'", f)
            if f.default is not None and not self.literal_ok(f.value_type, f.default):
                self.err("E-TYPE", f"default of '{f.name}' is not a valid "
                         f"{f.value_type} literal", f)
            if f.value_type in self.types and not self.types[f.value_type]:
                self.err("E-OBJ", f"fluent '{f.name}' ranges over an empty type", f)
        for name in tuple(self.d.preferences) + tuple(self.i.preferences):
            f = self.fluents.get(name)
            if f is None or f.kind != ast.STATE:
                self.err("E-UNDECL", f"preference '{name}' is not a declared "
                         "state fluent")

    # -- expressions -----------------------------------------------------------

    def infer_var_types(self, expr, env, where):
        for node in ast.walk(expr):
            if isinstance(node, ast.FluentRef):
                f = self.fluents.get(node.name)
                if f is None or len(f.params) != len(node.args):
                    continue
                for arg, ptype in zip(node.args, f.params):
                    if isinstance(arg, ast.Var) and arg.name not in env:
                        env[arg.name] = ptype
        for node in ast.walk(expr):
            if isinstance(node, ast.Var) and node.name not in env:
                self.err("E-VAR", f"cannot infer the type of '?{node.name}'",
                         None, where)
                env[node.name] = None
        return env

    def typeof(self, e, env, where):
        if isinstance(e, ast.Const):
            return BOOL_T if isinstance(e.value, bool) else REAL_T
        if isinstance(e, ast.EnumConst):
            return "sym:" + e.name
        if isinstance(e, ast.Var):
            if e.name not in env:
                self.err("E-VAR", f"unbound variable '?{e.name}'", None, where)
                return UNKNOWN
            return "enum:" + env[e.name] if env[e.name] else UNKNOWN
        if isinstance(e, ast.FluentRef):
            return self.type_ref(e, env, where)
        if isinstance(e, ast.Unary):
            t = self.typeof(e.operand, env, where)
            if e.op == "~":
                self.need_bool(t, "operand of '~'", where)
                return BOOL_T
            self.need_num(t, "operand of unary '-'", where)
            return REAL_T
        if isinstance(e, ast.Binary):
            lt = self.typeof(e.left, env, where)
            rt = self.typeof(e.right, env, where)
            if e.op in ast.ARITH_OPS:
                self.need_num(lt, f"operand of '{e.op}'", where)
                self.need_num(rt, f"operand of '{e.op}'", where)
                return REAL_T
            if e.op in ast.LOGIC_OPS:
                self.need_bool(lt, f"operand of '{e.op}'", where)
                self.need_bool(rt, f"operand of '{e.op}'", where)
                return BOOL_T
            if e.op in ("==", "~="):
                self.compatible(lt, rt, e.op, where)
            else:
                self.need_num(lt, f"operand of '{e.op}'", where)
                self.need_num(rt, f"operand of '{e.op}'", where)
            return BOOL_T
        if isinstance(e, ast.IfThenElse):
            self.need_bool(self.typeof(e.cond, env, where), "if condition", where)
            t1 = self.typeof(e.then, env, where)
            t2 = self.typeof(e.orelse, env, where)
            return self.join(t1, t2, where)
        if isinstance(e, ast.Bernoulli):
            self.need_num(self.typeof(e.prob, env, where), "Bernoulli parameter", where)
            p = const_value(e.prob)
            if p is not None and not (0.0 <= p <= 1.0):
                self.err("E-PROB", f"Bernoulli parameter {p!r} outside [0, 1] "
                         f"in {self.context(where)}", e, where)
            return BOOL_T
        if isinstance(e, ast.KronDelta):
            return self.typeof(e.arg, env, where)
        if isinstance(e, ast.Discrete):
            return self.type_discrete(e, env, where)
        return UNKNOWN

    def type_ref(self, e, env, where):
        f = self.fluents.get(e.name)
        if f is None:
            self.err("E-UNDECL", f"undeclared fluent '{e.name}'", e, where)
            return UNKNOWN
        if len(f.params) != len(e.args):
            self.err("E-ARITY", f"'{e.name}' takes {len(f.params)} argument(s), "
                     f"got {len(e.args)}", e, where)
            return self.value_type(f.value_type)
        for arg, ptype in zip(e.args, f.params):
            if isinstance(arg, ast.EnumConst):
                if ptype in self.types and arg.name not in self.types[ptype]:
                    self.err("E-TYPE", f"'@{arg.name}' is not a value of "
                             f"'{ptype}' in '{e.name}'", e, where)
            elif isinstance(arg, ast.Var):
                vt = env.get(arg.name, UNKNOWN)
                if arg.name not in env:
                    self.err("E-VAR", f"unbound variable '?{arg.name}'", e, where)
                elif vt and vt != ptype:
                    self.err("E-TYPE", f"'?{arg.name}' has type '{vt}' but "
                             f"'{e.name}' expects '{ptype}'", e, where)
        return self.value_type(f.value_type)

    def type_discrete(self, e, env, where):
        if e.type_name not in self.types:
            self.err("E-UNDECL", f"Discrete over undeclared type '{e.type_name}'",
                     e, where)
            return UNKNOWN
        values = self.types[e.type_name]
        labels = [v for v, _ in e.branches]
        if sorted(labels) != sorted(values) or len(labels) != len(values):
            self.err("E-DISCRETE", f"Discrete over '{e.type_name}' needs exactly "
                     f"one branch per value {list(values)}, got {labels} in "
                     f"{self.context(where)}", e, where)
        probs = []
        for _, p in e.branches:
            self.need_num(self.typeof(p, env, where), "Discrete branch", where)
            probs.append(const_value(p))
        if probs and all(p is not None for p in probs):
            total = math.fsum(probs)
            if any(p < 0 for p in probs):
                self.err("E-PROB", f"negative Discrete branch probability in "
                         f"{self.context(where)}", e, where)
            if abs(total - 1.0) > NORM_TOL:
                self.err("E-NORM", f"Discrete branch probabilities sum to "
                         f"{total!r}, not 1.0, in {self.context(where)}", e, where)
        return "enum:" + e.type_name

    def context(self, where):
        if isinstance(where, ast.Cpf):
            return f"CPF of '{where.target}'"
        return where if isinstance(where, str) else "expression"

    def need_bool(self, t, what, where):
        if t not in (BOOL_T, UNKNOWN):
            self.err("E-TYPE", f"{what} must be bool in {self.context(where)}",
                     None, where)

    def need_num(self, t, what, where):
        if t not in (BOOL_T, REAL_T, UNKNOWN):
            self.err("E-TYPE", f"{what} must be numeric in {self.context(where)}",
                     None, where)

    def compatible(self, a, b, op, where):
        if UNKNOWN in (a, b):
            return
        if _enum(a) and _sym(b):
            a, b = b, a
        if _sym(a) and _enum(b):
            if a[4:] not in self.types[b[5:]]:
                self.err("E-TYPE", f"'@{a[4:]}' is not a value of '{b[5:]}' "
                         f"in {self.context(where)}", None, where)
            return
        if _sym(a) and _sym(b):
            return
        if _enum(a) or _enum(b):
            if a != b:
                self.err("E-TYPE", f"cannot compare {a[5:] if _enum(a) else a} "
                         f"with {b[5:] if _enum(b) else b} using '{op}' in "
                         f"{self.context(where)}", None, where)

    def join(self, a, b, where):
        if a == b or b == UNKNOWN:
            return a
        if a == UNKNOWN:
            return b
        if {a, b} <= {BOOL_T, REAL_T}:
            return REAL_T
        if _sym(a) and _enum(b):
            a, b = b, a
        if _enum(a) and _sym(b):
            self.compatible(a, b, "if", where)
            return a
        if _sym(a) and _sym(b):
            return a
        self.err("E-TYPE", f"if-arms have incompatible types in "
                 f"{self.context(where)}", None, where)
        return UNKNOWN

    def check_stochastic_placement(self, body, where):
        """Stochastic nodes only at the body top or inside if-arms chains."""
        def allowed(e):
            if isinstance(e, ast.STOCHASTIC):
                return [c for c in ast.children(e)]
            if isinstance(e, ast.IfThenElse):
                return [e.cond] + allowed(e.then) + allowed(e.orelse)
            return [e]
        for sub in allowed(body):
            if ast.is_stochastic(sub):
                self.err("E-STOCH", f"stochastic expression nested inside a "
                         f"deterministic one in {self.context(where)}", None, where)
                return

    # -- blocks ------------------------------------------------------------------

    def check_cpfs(self):
        seen = {}
        for c in self.d.cpfs:
            f = self.fluents.get(c.target)
            if f is None or f.kind != ast.STATE:
                self.err("E-UNDECL", f"CPF for '{c.target}' which is not a "
                         "declared state fluent", c)
                continue
            if c.target in seen:
                self.err("E-CPF", f"duplicate CPF for state fluent '{c.target}'", c)
                continue
            seen[c.target] = c
            if len(c.params) != len(f.params):
                self.err("E-ARITY", f"CPF of '{c.target}' binds {len(c.params)} "
                         f"variable(s), fluent has {len(f.params)}", c)
                continue
            env = dict(zip(c.params, f.params))
            t = self.typeof(c.body, env, c)
            want = self.value_type(f.value_type)
            if want == BOOL_T:
                if t not in (BOOL_T, UNKNOWN):
                    self.err("E-TYPE", f"CPF of '{c.target}' must yield bool", c)
            elif _enum(want):
                if _sym(t):
                    if t[4:] not in self.types[f.value_type]:
                        self.err("E-TYPE", f"CPF of '{c.target}' yields a value "
                                 f"outside '{f.value_type}'", c)
                elif t not in (want, UNKNOWN):
                    self.err("E-TYPE", f"CPF of '{c.target}' must yield "
                             f"'{f.value_type}'", c)
            self.check_stochastic_placement(c.body, c)
        for f in self.d.fluent_decls:
            if f.kind == ast.STATE and f.name not in seen:
                self.err("E-CPF", f"missing CPF for state fluent '{f.name}'", f)

    def check_reward(self):
        r = self.d.reward
        if ast.is_stochastic(r):
            self.err("E-STOCH", "reward must be deterministic", None, "reward")
        self.need_num(self.typeof(r, {}, "reward"), "reward", "reward")

    def check_preconditions(self):
        for k, p in enumerate(self.d.preconditions):
            where = f"action precondition #{k + 1}"
            env = self.infer_var_types(p, {}, where)
            if ast.is_stochastic(p):
                self.err("E-STOCH", f"{where} must be deterministic")
            self.need_bool(self.typeof(p, env, where), "precondition", where)

    def check_instance(self):
        if self.i.domain_name != self.d.name:
            self.err("E-DOMAIN", f"instance refers to domain '{self.i.domain_name}'"
                     f" but domain is '{self.d.name}'")
        if self.i.horizon < 0:
            self.err("E-RANGE", "horizon must be non-negative")
        if not (0.0 < self.i.discount <= 1.0):
            self.err("E-RANGE", f"discount {self.i.discount!r} outside (0, 1]")
        for block, kind, items in (("non-fluents", ast.NON_FLUENT, self.i.non_fluents),
                                   ("init-state", ast.STATE, self.i.init_state)):
            seen = set()
            for a in items:
                f = self.fluents.get(a.fluent)
                if f is None:
                    self.err("E-UNDECL", f"{block} assigns undeclared fluent "
                             f"'{a.fluent}'", a)
                    continue
                if f.kind != kind:
                    self.err("E-ASSIGN", f"{block} may not assign {f.kind} "
                             f"'{a.fluent}'", a)
                    continue
                key = (a.fluent, a.args)
                if key in seen:
                    self.err("E-DUP", f"'{a.fluent}' assigned twice in {block}", a)
                seen.add(key)
                if len(a.args) != len(f.params):
                    self.err("E-ARITY", f"'{a.fluent}' takes {len(f.params)} "
                             f"argument(s), got {len(a.args)}", a)
                    continue
                for arg, ptype in zip(a.args, f.params):
                    if ptype in self.types and arg not in self.types[ptype]:
                        self.err("E-TYPE", f"'{arg}' is not a value of '{ptype}'", a)
                value = a.value
                if f.value_type == "real" and isinstance(value, bool):
                    value = None
                if not self.literal_ok(f.value_type, value):
                    self.err("E-TYPE", f"'{a.fluent}' expects a {f.value_type} "
                             f"value, got {a.value!r}", a)


def validate(domain: ast.DomainModel, instance: ast.InstanceModel) -> CheckedModel:
    """Check ``domain`` against ``instance``; raise ValidationError on any issue."""
    c = _Checker(domain, instance)
    c.check_types()
    c.check_fluents()
    c.check_cpfs()
    c.check_reward()
    c.check_preconditions()
    c.check_instance()
    if c.diags:
        raise ValidationError(c.diags)
    prefs = tuple(dict.fromkeys(tuple(domain.preferences) + tuple(instance.preferences)))
    return CheckedModel(domain, instance, dict(c.types), prefs)
