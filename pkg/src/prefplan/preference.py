"""Bernoulli preference profiles and the CPFs / non-fluents they generate.

Each attribute stores a single probability (that of its favoured value), so
the two values of an attribute always sum to one. Between steps a preference
fluent keeps its value with probability ``persistence`` and is otherwise
redrawn from that Bernoulli parameter; the stationary marginal of every
fluent is therefore the stored probability itself.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .attributes import ATTRIBUTES, ExplanationAttributes
from .errors import ConfigError
from .lang import ast
from .lang.printer import format_assignments

PARAMS = tuple(a.param for a in ATTRIBUTES)
CONTEXT_FLUENT = "context"
CONTEXT_TYPE = "context_t"


class UserContext(str, enum.Enum):
    CALM = "calm"
    CONFUSED = "confused"
    STRESSED = "stressed"


def _halfway_to_one(p):
    return p + (1.0 - p) / 2.0


def default_context_table(base):
    """Documented defaults: confusion favours rich, textual explanations and
    stress favours short ones. ``base`` maps parameter names to probabilities."""
    confused = dict(base)
    confused["p_rich"] = _halfway_to_one(base["p_rich"])
    confused["p_textual"] = _halfway_to_one(base["p_textual"])
    stressed = dict(base)
    stressed["p_short"] = _halfway_to_one(base["p_short"])
    return {UserContext.CALM: dict(base), UserContext.CONFUSED: confused,
            UserContext.STRESSED: stressed}


@dataclass(frozen=True)
class PreferenceProfile:
    p_textual: float = 0.3
    p_rich: float = 0.4
    p_short: float = 0.4
    p_local: float = 0.3
    persistence: float = 0.9
    # UserContext -> {param: probability}; empty means no context conditioning
    contexts: dict = field(default_factory=dict, compare=True, hash=False)

    def __post_init__(self):
        for name in PARAMS + ("persistence",):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"{name} = {v!r} is not a probability")
        for ctx, table in self.contexts.items():
            UserContext(ctx)
            for name, v in table.items():
                if name not in PARAMS:
                    raise ConfigError(f"unknown context parameter '{name}'")
                if not (0.0 <= v <= 1.0):
                    raise ConfigError(f"contexts.{UserContext(ctx).value}.{name} = "
                                      f"{v!r} is not a probability")

    @property
    def base(self):
        return {p: getattr(self, p) for p in PARAMS}

    def with_contexts(self, overrides=None):
        """Copy with a full context table: defaults, then ``overrides``."""
        table = default_context_table(self.base)
        for ctx, vals in (overrides or {}).items():
            table[UserContext(ctx)].update(vals)
        return replace(self, contexts=table)

    def probabilities(self, context=None):
        """Parameter -> probability, conditioned on ``context`` when tabled."""
        if context is None or not self.contexts:
            return self.base
        return {**self.base, **self.contexts[UserContext(context)]}

    def favoured_probability(self, attr, context=None):
        return self.probabilities(context)[attr.param]

    def value_probability(self, attr, value, context=None):
        """P(preference fluent of ``attr`` == ``value``)."""
        p = self.favoured_probability(attr, context)
        return p if value == attr.favoured else 1.0 - p

    def mode(self, context=None) -> ExplanationAttributes:
        """Most likely value per attribute; ties go to the first listed value."""
        picks = []
        for attr in ATTRIBUTES:
            first, second = attr.values
            p_first = self.value_probability(attr, first, context)
            picks.append(first if p_first >= 0.5 else second)
        return ExplanationAttributes(*picks)


# -- config file --------------------------------------------------------------

def profile_from_dict(doc) -> PreferenceProfile:
    known = set(PARAMS) | {"persistence", "contexts"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown profile key(s): {', '.join(sorted(unknown))}")
    kwargs = {}
    for k in PARAMS + ("persistence",):
        if k in doc:
            v = doc[k]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"profile key '{k}' must be a number")
            kwargs[k] = float(v)
    profile = PreferenceProfile(**kwargs)
    if "contexts" in doc:
        ctxs = doc["contexts"]
        if not isinstance(ctxs, dict):
            raise ConfigError("'contexts' must be an object")
        try:
            overrides = {UserContext(c): {k: float(v) for k, v in vals.items()}
                         for c, vals in ctxs.items()}
        except ValueError as exc:
            raise ConfigError(f"bad contexts entry: {exc}") from None
        profile = profile.with_contexts(overrides)
    return profile


def profile_to_dict(profile: PreferenceProfile):
    doc = {p: getattr(profile, p) for p in PARAMS}
    doc["persistence"] = profile.persistence
    if profile.contexts:
        doc["contexts"] = {UserContext(c).value: dict(v)
                           for c, v in profile.contexts.items()}
    return doc


def load_profile(path) -> PreferenceProfile:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return profile_from_dict(doc)


# -- emitted language fragments -----------------------------------------------

def context_param(param, ctx):
    return f"{param}_{UserContext(ctx).value}"


def nonfluent_names(profile: PreferenceProfile):
    names = list(PARAMS) + ["persistence"]
    if profile.contexts:
        names += [context_param(p, c) for c in UserContext for p in PARAMS]
    return names


def nonfluent_decls(profile: PreferenceProfile):
    """Real-valued non-fluent declarations for every probability parameter."""
    return [ast.FluentDecl(n, ast.NON_FLUENT, "real", (), 0.5 if n != "persistence" else 0.9)
            for n in nonfluent_names(profile)]


def nonfluent_values(profile: PreferenceProfile):
    out = dict(profile.base)
    out["persistence"] = profile.persistence
    for ctx in UserContext if profile.contexts else ():
        for p, v in profile.probabilities(ctx).items():
            out[context_param(p, ctx)] = v
    return out


def emit_nonfluents(profile: PreferenceProfile, indent: int = 4) -> str:
    """A ``non-fluents { ... };`` block assigning every probability parameter."""
    items = [ast.Assignment(n, (), float(v))
             for n, v in nonfluent_values(profile).items()]
    return format_assignments("non-fluents", items, indent)


def profile_from_nonfluents(values) -> PreferenceProfile:
    """Inverse of :func:`nonfluent_values` for a name -> value mapping."""
    base = PreferenceProfile(**{k: float(values[k]) for k in PARAMS + ("persistence",)})
    if not any(context_param(PARAMS[0], c) in values for c in UserContext):
        return base
    table = {c: {p: float(values[context_param(p, c)]) for p in PARAMS}
             for c in UserContext}
    return replace(base, contexts=table)


def _drift(attr, current, prob_ref, persistence):
    """Discrete CPF arm for a fluent currently holding ``current``."""
    first, second = attr.values
    p_first = prob_ref if attr.favoured == first else ast.Binary("-", ast.Const(1.0), prob_ref)
    p_second = ast.Binary("-", ast.Const(1.0), prob_ref) if attr.favoured == first else prob_ref
    resample = ast.Binary("-", ast.Const(1.0), persistence)
    branches = []
    for value, p in ((first, p_first), (second, p_second)):
        term = ast.Binary("*", resample, p)
        if value == current:
            term = ast.Binary("+", persistence, term)
        branches.append((value, term))
    return ast.Discrete(attr.type_name, tuple(branches))


def _attribute_body(attr, prob_ref):
    persistence = ast.FluentRef("persistence")
    first, second = attr.values
    return ast.IfThenElse(
        ast.Binary("==", ast.FluentRef(attr.fluent), ast.EnumConst(first)),
        _drift(attr, first, prob_ref, persistence),
        _drift(attr, second, prob_ref, persistence))


def emit_preference_cpfs(profile: PreferenceProfile):
    """One drift CPF per preference fluent, conditioned on the user context
    fluent when the profile carries a context table."""
    cpfs = []
    for attr in ATTRIBUTES:
        if not profile.contexts:
            body = _attribute_body(attr, ast.FluentRef(attr.param))
        else:
            ctxs = list(UserContext)
            body = _attribute_body(attr, ast.FluentRef(context_param(attr.param, ctxs[-1])))
            for ctx in reversed(ctxs[:-1]):
                body = ast.IfThenElse(
                    ast.Binary("==", ast.FluentRef(CONTEXT_FLUENT), ast.EnumConst(ctx.value)),
                    _attribute_body(attr, ast.FluentRef(context_param(attr.param, ctx))),
                    body)
        cpfs.append(ast.Cpf(attr.fluent, (), body))
    return cpfs


def preference_type_decls():
    return [ast.EnumDecl(a.type_name, a.values) for a in ATTRIBUTES]


def preference_fluent_decls():
    return [ast.FluentDecl(a.fluent, ast.STATE, a.type_name) for a in ATTRIBUTES]


def expected_match_reward(profile: PreferenceProfile, attrs: ExplanationAttributes,
                          bonus_per_attribute: float = 1.0, context=None) -> float:
    """Bonus times the stationary probability that each chosen value matches."""
    return sum(bonus_per_attribute * profile.value_probability(a, getattr(attrs, a.key), context)
               for a in ATTRIBUTES)
