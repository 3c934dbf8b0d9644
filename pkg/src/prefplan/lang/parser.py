"""Recursive-descent parser for domain and instance files.

See ``docs/grammar.md`` for the EBNF. Parsing is purely syntactic: name
resolution and type checks happen in :func:`prefplan.lang.validate`.
"""

from __future__ import annotations

from ..errors import ParseError
from . import ast
from .lexer import tokenize

_VALUE_KINDS = {"state-fluent": ast.STATE, "action-fluent": ast.ACTION,
                "non-fluent": ast.NON_FLUENT}
_COMPARE = set(ast.COMPARE_OPS)
_RESERVED = {"if", "then", "else", "true", "false", "Bernoulli", "KronDelta",
             "Discrete"}


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token plumbing ------------------------------------------------------

    @property
    def tok(self):
        return self.tokens[self.pos]

    def peek(self, offset=1):
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self):
        t = self.tok
        if t.kind != "EOF":
            self.pos += 1
        return t

    def at(self, text, kind=None):
        t = self.tok
        if kind is not None and t.kind != kind:
            return False
        return t.text == text and t.kind in ("OP", "IDENT")

    def accept(self, text):
        if self.at(text):
            return self.advance()
        return None

    def error(self, expected, what=None):
        t = self.tok
        msg = what or f"unexpected {t.describe()}"
        raise ParseError("E-SYNTAX", msg, t.line, t.col, expected)

    def expect(self, text):
        if not self.at(text):
            self.error([repr(text)])
        return self.advance()

    def ident(self):
        if self.tok.kind != "IDENT" or self.tok.text in _RESERVED:
            self.error(["identifier"])
        return self.advance()

    def symbol(self):
        # enum/object constants: '@x' or a bare name
        if self.tok.kind in ("ENUM", "IDENT"):
            return self.advance().text
        self.error(["'@value'", "identifier"])

    def end_block(self):
        self.expect("}")
        self.accept(";")

    def dup(self, seen, tok, what):
        if tok.text in seen:
            raise ParseError("E-DUP", f"duplicate {what} '{tok.text}'",
                             tok.line, tok.col)
        seen.add(tok.text)

    # -- literals --------------------------------------------------------------

    def number(self):
        neg = self.accept("-") is not None
        if self.tok.kind != "NUMBER":
            self.error(["number"])
        v = float(self.advance().text)
        return -v if neg else v

    def literal(self):
        t = self.tok
        if t.kind == "NUMBER" or self.at("-"):
            return self.number()
        if self.at("true", "IDENT"):
            self.advance()
            return True
        if self.at("false", "IDENT"):
            self.advance()
            return False
        if t.kind in ("ENUM", "IDENT"):
            return self.advance().text
        self.error(["number", "true", "false", "'@value'"])

    def value_list(self):
        self.expect("{")
        vals = []
        seen = set()
        while True:
            t = self.tok
            if t.kind not in ("ENUM", "IDENT"):
                self.error(["'@value'", "identifier"])
            self.dup(seen, t, "enum value")
            vals.append(self.advance().text)
            if not self.accept(","):
                break
        self.expect("}")
        return tuple(vals)

    def name_list(self):
        self.expect("{")
        names = []
        if not self.at("}"):
            names.append(self.ident().text)
            while self.accept(","):
                names.append(self.ident().text)
        self.expect("}")
        return tuple(names)

    # -- domain ----------------------------------------------------------------

    def domain(self):
        self.expect("domain")
        name = self.ident().text
        self.expect("{")
        reqs, enums, objs, fluents, cpfs, pres, prefs = [], [], [], [], [], [], []
        reward = None
        type_names, fluent_names = set(), set()
        while not self.at("}"):
            t = self.tok
            if self.accept("requirements"):
                self.expect("=")
                reqs.extend(self.name_list())
                self.expect(";")
            elif self.accept("types"):
                self.expect("{")
                while not self.at("}"):
                    tn = self.ident()
                    self.dup(type_names, tn, "type")
                    self.expect(":")
                    if self.accept("object"):
                        objs.append(tn.text)
                    else:
                        enums.append(self.enum_decl(tn))
                    self.expect(";")
                self.end_block()
            elif self.accept("pvariables"):
                self.expect("{")
                while not self.at("}"):
                    fluents.append(self.pvariable(fluent_names))
                self.end_block()
            elif self.accept("cstate"):
                # shorthand block: 'f : {v1, v2};' declares an enum type
                # 'f_t' and a preference state fluent 'f' of that type.
                self.ident()
                self.expect("{")
                while not self.at("}"):
                    fn = self.ident()
                    self.dup(fluent_names, fn, "fluent")
                    tname = fn.text + "_t"
                    if tname in type_names:
                        raise ParseError("E-DUP", f"duplicate type '{tname}'",
                                         fn.line, fn.col)
                    type_names.add(tname)
                    self.expect(":")
                    decl = self.enum_decl(fn, tname)
                    enums.append(decl)
                    fluents.append(ast.FluentDecl(
                        fn.text, ast.STATE, tname, (), None,
                        line=fn.line, col=fn.col))
                    prefs.append(fn.text)
                    self.expect(";")
                self.end_block()
            elif self.accept("preferences"):
                self.expect("=")
                prefs.extend(self.name_list())
                self.expect(";")
            elif self.accept("cpfs"):
                self.expect("{")
                while not self.at("}"):
                    cpfs.append(self.cpf())
                self.end_block()
            elif self.accept("reward"):
                if reward is not None:
                    raise ParseError("E-DUP", "duplicate reward", t.line, t.col)
                self.expect("=")
                reward = self.expr()
                self.expect(";")
            elif self.accept("action-preconditions"):
                self.expect("{")
                while not self.at("}"):
                    pres.append(self.expr())
                    self.expect(";")
                self.end_block()
            else:
                self.error(["requirements", "types", "pvariables", "cstate",
                            "preferences", "cpfs", "reward",
                            "action-preconditions", "'}'"])
        self.end_block()
        if self.tok.kind != "EOF":
            self.error(["end of input"])
        return ast.DomainModel(
            name=name, requirements=tuple(reqs), enum_decls=tuple(enums),
            object_types=tuple(objs), fluent_decls=tuple(fluents),
            cpfs=tuple(cpfs),
            reward=reward if reward is not None else ast.Const(0.0),
            preconditions=tuple(pres), preferences=tuple(dict.fromkeys(prefs)))

    def enum_decl(self, name_tok, type_name=None):
        vals = self.value_list()
        if len(vals) < 2:
            raise ParseError("E-ENUM",
                             f"enum '{type_name or name_tok.text}' needs at "
                             "least two values", name_tok.line, name_tok.col)
        return ast.EnumDecl(type_name or name_tok.text, vals,
                            line=name_tok.line, col=name_tok.col)

    def pvariable(self, seen):
        nt = self.ident()
        self.dup(seen, nt, "fluent")
        params = []
        if self.accept("("):
            params.append(self.ident().text)
            while self.accept(","):
                params.append(self.ident().text)
            self.expect(")")
        self.expect(":")
        self.expect("{")
        kt = self.tok
        if kt.text not in _VALUE_KINDS:
            self.error(list(_VALUE_KINDS))
        self.advance()
        self.expect(",")
        vtype = self.ident().text
        default = None
        if self.accept(","):
            self.expect("default")
            self.expect("=")
            default = self.literal()
        self.expect("}")
        self.expect(";")
        return ast.FluentDecl(nt.text, _VALUE_KINDS[kt.text], vtype,
                              tuple(params), default, line=nt.line, col=nt.col)

    def cpf(self):
        nt = self.ident()
        self.expect("'")
        params = []
        if self.accept("("):
            while True:
                if self.tok.kind != "VAR":
                    self.error(["'?variable'"])
                params.append(self.advance().text)
                if not self.accept(","):
                    break
            self.expect(")")
        self.expect("=")
        body = self.expr()
        self.expect(";")
        return ast.Cpf(nt.text, tuple(params), body, line=nt.line, col=nt.col)

    # -- instance ----------------------------------------------------------------

    def instance(self):
        self.expect("instance")
        name = self.ident().text
        self.expect("{")
        domain_name = None
        objects, nonf, init, prefs = [], [], [], []
        horizon, discount = 1, 1.0
        while not self.at("}"):
            if self.accept("domain"):
                self.expect("=")
                domain_name = self.ident().text
                self.expect(";")
            elif self.accept("objects"):
                self.expect("{")
                while not self.at("}"):
                    tn = self.ident().text
                    self.expect(":")
                    objects.append((tn, self.value_list()))
                    self.expect(";")
                self.end_block()
            elif self.accept("non-fluents"):
                nonf.extend(self.assignments())
            elif self.accept("init-state"):
                init.extend(self.assignments())
            elif self.accept("preferences"):
                self.expect("=")
                prefs.extend(self.name_list())
                self.expect(";")
            elif self.accept("horizon"):
                self.expect("=")
                t = self.tok
                if t.kind != "NUMBER" or not t.text.isdigit():
                    self.error(["non-negative integer"])
                horizon = int(self.advance().text)
                self.expect(";")
            elif self.accept("discount"):
                self.expect("=")
                discount = self.number()
                self.expect(";")
            else:
                self.error(["domain", "objects", "non-fluents", "init-state",
                            "preferences", "horizon", "discount", "'}'"])
        self.end_block()
        if self.tok.kind != "EOF":
            self.error(["end of input"])
        if domain_name is None:
            t = self.tok
            raise ParseError("E-SYNTAX", "instance is missing 'domain = ...;'",
                             t.line, t.col)
        return ast.InstanceModel(
            name=name, domain_name=domain_name, objects=tuple(objects),
            non_fluents=tuple(nonf), init_state=tuple(init), horizon=horizon,
            discount=discount, preferences=tuple(prefs))

    def assignments(self):
        self.expect("{")
        out = []
        while not self.at("}"):
            negated = self.accept("~") is not None
            nt = self.ident()
            args = []
            if self.accept("("):
                args.append(self.symbol())
                while self.accept(","):
                    args.append(self.symbol())
                self.expect(")")
            if negated:
                value = False
            elif self.accept("="):
                value = self.literal()
            else:
                value = True
            self.expect(";")
            out.append(ast.Assignment(nt.text, tuple(args), value,
                                      line=nt.line, col=nt.col))
        self.end_block()
        return out

    # -- expressions -------------------------------------------------------------

    def expr(self):
        if self.at("if", "IDENT"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            self.expect("then")
            then = self.expr()
            self.expect("else")
            return ast.IfThenElse(cond, then, self.expr())
        return self.equiv()

    def equiv(self):
        left = self.implies()
        while self.accept("<=>"):
            left = ast.Binary("<=>", left, self.implies())
        return left

    def implies(self):
        left = self.disj()
        if self.accept("=>"):
            return ast.Binary("=>", left, self.implies())
        return left

    def disj(self):
        left = self.conj()
        while self.accept("|"):
            left = ast.Binary("|", left, self.conj())
        return left

    def conj(self):
        left = self.negation()
        while self.at("^") or self.at("&"):
            self.advance()
            left = ast.Binary("^", left, self.negation())
        return left

    def negation(self):
        if self.accept("~"):
            return ast.Unary("~", self.negation())
        return self.comparison()

    def comparison(self):
        left = self.additive()
        if self.tok.kind == "OP" and self.tok.text in _COMPARE:
            op = self.advance().text
            return ast.Binary(op, left, self.additive())
        return left

    def additive(self):
        left = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            left = ast.Binary(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while self.at("*") or self.at("/"):
            op = self.advance().text
            left = ast.Binary(op, left, self.unary())
        return left

    def unary(self):
        if self.at("-"):
            if self.peek().kind == "NUMBER":
                self.advance()
                return ast.Const(-float(self.advance().text))
            self.advance()
            return ast.Unary("-", self.unary())
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "NUMBER":
            self.advance()
            return ast.Const(float(t.text))
        if t.kind == "ENUM":
            self.advance()
            return ast.EnumConst(t.text)
        if t.kind == "VAR":
            self.advance()
            return ast.Var(t.text)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "IDENT":
            if t.text == "true":
                self.advance()
                return ast.Const(True)
            if t.text == "false":
                self.advance()
                return ast.Const(False)
            if t.text == "if":
                return self.expr()
            if t.text == "Bernoulli":
                self.advance()
                self.expect("(")
                p = self.expr()
                self.expect(")")
                return ast.Bernoulli(p, line=t.line, col=t.col)
            if t.text == "KronDelta":
                self.advance()
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return ast.KronDelta(e)
            if t.text == "Discrete":
                return self.discrete()
            if t.text in _RESERVED:
                self.error(["expression"])
            self.advance()
            args = []
            if self.accept("("):
                args.append(self.argument())
                while self.accept(","):
                    args.append(self.argument())
                self.expect(")")
            return ast.FluentRef(t.text, tuple(args), line=t.line, col=t.col)
        self.error(["expression"])

    def argument(self):
        t = self.tok
        if t.kind == "VAR":
            self.advance()
            return ast.Var(t.text)
        if t.kind in ("ENUM", "IDENT"):
            self.advance()
            return ast.EnumConst(t.text)
        self.error(["'?variable'", "'@value'"])

    def discrete(self):
        t = self.advance()
        self.expect("(")
        tname = self.ident().text
        branches = []
        while self.accept(","):
            label = self.symbol()
            self.expect(":")
            branches.append((label, self.expr()))
        self.expect(")")
        return ast.Discrete(tname, tuple(branches), line=t.line, col=t.col)


def parse_domain(text: str) -> ast.DomainModel:
    """Parse domain source text into a :class:`DomainModel`."""
    return _Parser(text).domain()


def parse_instance(text: str) -> ast.InstanceModel:
    """Parse instance source text into an :class:`InstanceModel`."""
    return _Parser(text).instance()
