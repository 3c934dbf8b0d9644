"""Front end for the domain/instance dialect: AST, parser, validator, printer."""

from .ast import (Assignment, Bernoulli, Binary, Const, Cpf, Discrete,
                  DomainModel, EnumConst, EnumDecl, FluentDecl, FluentRef,
                  IfThenElse, InstanceModel, KronDelta, Unary, Var)
from .parser import parse_domain, parse_instance
from .printer import format_expr, pretty_print
from .validate import CheckedModel, validate

__all__ = [
    "Assignment", "Bernoulli", "Binary", "CheckedModel", "Const", "Cpf",
    "Discrete", "DomainModel", "EnumConst", "EnumDecl", "FluentDecl",
    "FluentRef", "IfThenElse", "InstanceModel", "KronDelta", "Unary", "Var",
    "format_expr", "parse_domain", "parse_instance", "pretty_print", "validate",
]
