"""The four explanation attributes and their closed value sets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass


@dataclass(frozen=True)
class Attribute:
    key: str          # field name on ExplanationAttributes
    fluent: str       # preference state fluent
    type_name: str    # enum type in generated domains
    values: tuple     # (first, second)
    param: str        # profile field: P(fluent == favoured)
    favoured: str


ATTRIBUTES = (
    Attribute("representation", "E_r", "representation_t", ("textual", "visual"),
              "p_textual", "textual"),
    Attribute("detail", "E_dl", "detail_t", ("rich", "poor"), "p_rich", "rich"),
    Attribute("duration", "E_d", "duration_t", ("long", "short"), "p_short", "short"),
    Attribute("scope", "E_s", "scope_t", ("local", "global"), "p_local", "local"),
)

PREFERENCE_FLUENTS = tuple(a.fluent for a in ATTRIBUTES)


@dataclass(frozen=True)
class ExplanationAttributes:
    representation: str
    detail: str
    duration: str
    scope: str

    def __post_init__(self):
        for attr in ATTRIBUTES:
            v = getattr(self, attr.key)
            if v not in attr.values:
                raise ValueError(f"{attr.key} must be one of {attr.values}, got {v!r}")

    def as_tuple(self):
        return (self.representation, self.detail, self.duration, self.scope)

    def __str__(self):
        return ", ".join(self.as_tuple())

    @classmethod
    def all(cls):
        """All 16 combinations, first values first."""
        return [cls(*vals) for vals in itertools.product(*(a.values for a in ATTRIBUTES))]
