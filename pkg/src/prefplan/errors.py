"""Exception types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int = 0
    col: int = 0

    def __str__(self) -> str:
        return f"error[{self.code}]: {self.line}:{self.col}: {self.message}"


class PrefplanError(Exception):
    """Base class for all package errors."""


class LangError(PrefplanError):
    """One or more positioned diagnostics from parsing or validation."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))

    @property
    def codes(self):
        return [d.code for d in self.diagnostics]


class ParseError(LangError):
    def __init__(self, code, message, line, col, expected=()):
        self.expected = tuple(sorted(set(expected)))
        if self.expected:
            message = f"{message}; expected one of: {', '.join(self.expected)}"
        super().__init__([Diagnostic(code, message, line, col)])


class ValidationError(LangError):
    pass


class GroundingError(PrefplanError):
    """Model cannot be compiled to a well-formed factored MDP."""

    def __init__(self, code, message):
        self.code = code
        super().__init__(f"error[{code}]: {message}")


class EvaluationError(PrefplanError):
    pass


class ResourceCapError(PrefplanError):
    """A configured size cap was exceeded. ``count`` is the measured size."""

    def __init__(self, what, count, cap):
        self.what = what
        self.count = count
        self.cap = cap
        super().__init__(f"{what} count {count} exceeds cap {cap}")


class PolicyError(PrefplanError):
    pass


class ConfigError(PrefplanError):
    pass
