"""Tokenizer for the domain/instance dialect."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError

# Hyphenated words are only recognised when listed here; anything else with a
# '-' in it lexes as identifier, minus, identifier.
HYPHEN_WORDS = frozenset({
    "state-fluent", "action-fluent", "non-fluent", "non-fluents",
    "init-state", "action-preconditions", "reward-deterministic",
    "preference-fluents", "serial-actions",
})

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z_][A-Za-z0-9_]*)*)
  | (?P<enum>@[A-Za-z_][A-Za-z0-9_]*)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=>|=>|==|~=|<=|>=|[<>=+\-*/^&|~(){},;:'])
""", re.VERBOSE)

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, NUMBER, ENUM, VAR, OP, EOF
    text: str
    line: int
    col: int

    def describe(self):
        return "end of input" if self.kind == "EOF" else repr(self.text)


def tokenize(text: str):
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError("E-SYNTAX", f"unexpected character {text[pos]!r}",
                             line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        lexeme = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "word":
            if "-" in lexeme and lexeme not in HYPHEN_WORDS:
                # re-lex as identifier followed by the rest
                head = _IDENT_RE.match(lexeme).group()
                tokens.append(Token("IDENT", head, line, col))
                pos += len(head)
                continue
            tokens.append(Token("IDENT", lexeme, line, col))
        elif kind == "number":
            tokens.append(Token("NUMBER", lexeme, line, col))
        elif kind == "enum":
            tokens.append(Token("ENUM", lexeme[1:], line, col))
        elif kind == "var":
            tokens.append(Token("VAR", lexeme[1:], line, col))
        elif kind == "op":
            tokens.append(Token("OP", lexeme, line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens
