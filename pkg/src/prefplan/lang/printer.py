"""Pretty printer emitting the canonical concrete syntax.

``parse_domain(pretty_print(d)) == d`` for every domain the parser can produce;
the same holds for instances.
"""

from __future__ import annotations

from . import ast

_KIND_WORD = {ast.STATE: "state-fluent", ast.ACTION: "action-fluent",
              ast.NON_FLUENT: "non-fluent"}

# binding strength; higher binds tighter
_PREC = {"<=>": 1, "=>": 2, "|": 3, "^": 4, "~": 5,
         "==": 6, "~=": 6, "<": 6, "<=": 6, ">": 6, ">=": 6,
         "+": 7, "-": 7, "*": 8, "/": 8}
_ATOM = 10


def format_literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(float(value))
    return "@" + str(value)


def _prec(e):
    if isinstance(e, ast.Binary):
        return _PREC[e.op]
    if isinstance(e, ast.Unary):
        return _PREC["~"] if e.op == "~" else 9
    if isinstance(e, ast.IfThenElse):
        return 0
    if isinstance(e, ast.Const) and not isinstance(e.value, bool) and e.value < 0:
        return 9
    return _ATOM


def _wrap(e, needs):
    s = format_expr(e)
    return f"({s})" if needs else s


def format_expr(e) -> str:
    if isinstance(e, ast.Const):
        return format_literal(e.value)
    if isinstance(e, ast.EnumConst):
        return "@" + e.name
    if isinstance(e, ast.Var):
        return "?" + e.name
    if isinstance(e, ast.FluentRef):
        if not e.args:
            return e.name
        return f"{e.name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, ast.Unary):
        if e.op == "-":
            # '-<number>' would re-parse as a single negative literal
            needs = _prec(e.operand) < 9 or isinstance(e.operand, ast.Const)
            return "-" + _wrap(e.operand, needs)
        return "~" + _wrap(e.operand, _prec(e.operand) < _PREC["~"])
    if isinstance(e, ast.Binary):
        p = _PREC[e.op]
        if e.op == "=>":
            lneed, rneed = _prec(e.left) <= p, _prec(e.right) < p
        elif p == 6:
            lneed, rneed = _prec(e.left) <= p, _prec(e.right) <= p
        else:
            lneed, rneed = _prec(e.left) < p, _prec(e.right) <= p
        return f"{_wrap(e.left, lneed)} {e.op} {_wrap(e.right, rneed)}"
    if isinstance(e, ast.IfThenElse):
        return (f"if ({format_expr(e.cond)}) then {format_expr(e.then)} "
                f"else {format_expr(e.orelse)}")
    if isinstance(e, ast.Bernoulli):
        return f"Bernoulli({format_expr(e.prob)})"
    if isinstance(e, ast.KronDelta):
        return f"KronDelta({format_expr(e.arg)})"
    if isinstance(e, ast.Discrete):
        parts = [e.type_name] + [f"@{v} : {format_expr(p)}"
                                 for v, p in e.branches]
        return f"Discrete({', '.join(parts)})"
    raise TypeError(f"not an expression: {e!r}")


def _format_body(e, indent):
    """CPF bodies: put each else-if arm on its own line."""
    if not isinstance(e, ast.IfThenElse):
        return format_expr(e)
    pad = " " * indent
    out = [f"if ({format_expr(e.cond)})",
           f"{pad}    then {format_expr(e.then)}"]
    rest = e.orelse
    while isinstance(rest, ast.IfThenElse):
        out.append(f"{pad}else if ({format_expr(rest.cond)})")
        out.append(f"{pad}    then {format_expr(rest.then)}")
        rest = rest.orelse
    out.append(f"{pad}else {format_expr(rest)}")
    return "\n".join(out)


def _format_domain(d: ast.DomainModel) -> str:
    lines = [f"domain {d.name} {{"]
    if d.requirements:
        lines.append(f"    requirements = {{ {', '.join(d.requirements)} }};")
    if d.enum_decls or d.object_types:
        lines.append("    types {")
        for t in d.object_types:
            lines.append(f"        {t} : object;")
        for e in d.enum_decls:
            vals = ", ".join("@" + v for v in e.values)
            lines.append(f"        {e.name} : {{ {vals} }};")
        lines.append("    };")
    if d.fluent_decls:
        lines.append("    pvariables {")
        for f in d.fluent_decls:
            head = f.name + (f"({', '.join(f.params)})" if f.params else "")
            spec = f"{_KIND_WORD[f.kind]}, {f.value_type}"
            if f.default is not None:
                spec += f", default = {format_literal(f.default)}"
            lines.append(f"        {head} : {{ {spec} }};")
        lines.append("    };")
    if d.preferences:
        lines.append(f"    preferences = {{ {', '.join(d.preferences)} }};")
    if d.cpfs:
        lines.append("    cpfs {")
        for c in d.cpfs:
            head = c.target + "'"
            if c.params:
                head += f"({', '.join('?' + p for p in c.params)})"
            lines.append(f"        {head} = {_format_body(c.body, 12)};")
        lines.append("    };")
    if d.preconditions:
        lines.append("    action-preconditions {")
        for p in d.preconditions:
            lines.append(f"        {format_expr(p)};")
        lines.append("    };")
    lines.append(f"    reward = {format_expr(d.reward)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_assignments(keyword, assignments, indent=4) -> str:
    pad = " " * indent
    lines = [f"{pad}{keyword} {{"]
    for a in assignments:
        head = a.fluent
        if a.args:
            head += f"({', '.join('@' + x for x in a.args)})"
        lines.append(f"{pad}    {head} = {format_literal(a.value)};")
    lines.append(f"{pad}}};")
    return "\n".join(lines)


def _format_instance(m: ast.InstanceModel) -> str:
    lines = [f"instance {m.name} {{", f"    domain = {m.domain_name};"]
    if m.objects:
        lines.append("    objects {")
        for t, objs in m.objects:
            lines.append(f"        {t} : {{ {', '.join(objs)} }};")
        lines.append("    };")
    if m.non_fluents:
        lines.append(format_assignments("non-fluents", m.non_fluents))
    if m.init_state:
        lines.append(format_assignments("init-state", m.init_state))
    if m.preferences:
        lines.append(f"    preferences = {{ {', '.join(m.preferences)} }};")
    lines.append(f"    horizon = {m.horizon};")
    lines.append(f"    discount = {format_literal(m.discount)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def pretty_print(model) -> str:
    if isinstance(model, ast.DomainModel):
        return _format_domain(model)
    if isinstance(model, ast.InstanceModel):
        return _format_instance(model)
    raise TypeError(f"cannot print {type(model).__name__}")
