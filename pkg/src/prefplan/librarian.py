"""Parametric generator for the robot-librarian navigation scenario.

The robot starts at ``start``, fetches a book from ``book`` and hands it to a
visitor at ``visitor``. A step counter turns the ``late`` flag on once
``deadline`` steps have elapsed; only while late (and before the hand-over)
may the robot issue a single ``explain`` action, whose four arguments are
rewarded by how many of them match the visitor's current preference fluents.
The step cost accrues on every step until the book has been delivered.
"""

from __future__ import annotations

import collections
import itertools
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .attributes import ATTRIBUTES, ExplanationAttributes
from .errors import ConfigError
from .lang import ast
from .lang.printer import pretty_print
from .preference import (CONTEXT_FLUENT, CONTEXT_TYPE, PreferenceProfile,
                         UserContext, emit_preference_cpfs, nonfluent_decls,
                         nonfluent_values, profile_from_dict, profile_to_dict)

DOMAIN_NAME = "librarian"

A = ast.FluentRef
E = ast.EnumConst
C = ast.Const


def _and(*xs):
    out = xs[0]
    for x in xs[1:]:
        out = ast.Binary("^", out, x)
    return out


def _or(xs):
    out = xs[0]
    for x in xs[1:]:
        out = ast.Binary("|", out, x)
    return out


def _sum(xs):
    out = xs[0]
    for x in xs[1:]:
        out = ast.Binary("+", out, x)
    return out


def _eq(a, b):
    return ast.Binary("==", a, b)


@dataclass(frozen=True)
class LibrarianConfig:
    locations: tuple = ("start_location", "book_location", "visitor")
    start: str = "start_location"
    book: str = "book_location"
    visitor: str = "visitor"
    deadline: int = 3
    horizon: int = 8
    discount: float = 1.0
    profile: PreferenceProfile = field(default_factory=PreferenceProfile)
    hand_over_reward: float = 10.0
    step_cost: float = 0.1
    attribute_bonus: float = 1.0
    # undirected edges; None means fully connected
    adjacency: tuple | None = None
    # None: start from the profile's most likely preferences
    initial_preferences: ExplanationAttributes | None = None
    context: UserContext = UserContext.CALM
    instance_name: str = "librarian_inst"

    def edges(self):
        if self.adjacency is None:
            return [(a, b) for a in self.locations for b in self.locations if a != b]
        out = []
        for a, b in self.adjacency:
            out += [(a, b), (b, a)]
        return sorted(set(out), key=lambda e: (self.locations.index(e[0]),
                                                self.locations.index(e[1])))

    def initial_attributes(self):
        if self.initial_preferences is not None:
            return self.initial_preferences
        return self.profile.mode(self.context if self.profile.contexts else None)

    def distance(self, src, dst):
        nbrs = collections.defaultdict(list)
        for a, b in self.edges():
            nbrs[a].append(b)
        dist = {src: 0}
        queue = collections.deque([src])
        while queue:
            u = queue.popleft()
            for v in nbrs[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist.get(dst)

    def minimal_plan_length(self):
        """Steps for fetch-and-deliver without an explanation."""
        d1, d2 = self.distance(self.start, self.book), self.distance(self.book, self.visitor)
        if d1 is None or d2 is None:
            return None
        return d1 + 1 + d2 + 1

    def check(self):
        locs = self.locations
        if len(locs) < 3 or len(set(locs)) != len(locs):
            raise ConfigError("need at least three distinct locations")
        for role in ("start", "book", "visitor"):
            if getattr(self, role) not in locs:
                raise ConfigError(f"{role} location '{getattr(self, role)}' is not "
                                  "among the locations")
        if len({self.start, self.book, self.visitor}) != 3:
            raise ConfigError("start, book and visitor locations must differ")
        if self.adjacency is not None:
            for a, b in self.adjacency:
                if a not in locs or b not in locs:
                    raise ConfigError(f"adjacency edge ({a}, {b}) names an unknown location")
        if self.deadline < 1:
            raise ConfigError("deadline must be at least 1")
        need = self.minimal_plan_length()
        if need is None:
            raise ConfigError("book or visitor location unreachable")
        if self.horizon < need:
            raise ConfigError(f"horizon {self.horizon} is shorter than the minimal "
                              f"plan length {need}")
        if not (0.0 < self.discount <= 1.0):
            raise ConfigError("discount must lie in (0, 1]")
        UserContext(self.context)
        return self


def late_arrival_config(**overrides) -> LibrarianConfig:
    """Late arrival, frozen visual/poor/long/global preferences, horizon 5."""
    base = LibrarianConfig(
        horizon=5, deadline=3,
        profile=PreferenceProfile(p_textual=0.3, p_rich=0.4, p_short=0.4,
                                  p_local=0.3, persistence=1.0),
        initial_preferences=ExplanationAttributes("visual", "poor", "long", "global"))
    return replace(base, **overrides)


def ground_action_count(config: LibrarianConfig) -> int:
    """moves + pick_up + hand_over + explain variants + no-op."""
    n = len(config.locations)
    explains = 1
    for attr in ATTRIBUTES:
        explains *= len(attr.values)
    return n * n + 1 + 1 + explains + 1


# -- domain -------------------------------------------------------------------

def _explain_refs():
    return [(vals, A("explain", tuple(E(v) for v in vals)))
            for vals in itertools.product(*(a.values for a in ATTRIBUTES))]


def _step_values(deadline):
    return tuple(f"t{k}" for k in range(deadline + 1))


def build_domain(config: LibrarianConfig) -> ast.DomainModel:
    cfg = config
    locs = cfg.locations
    steps = _step_values(cfg.deadline)
    with_ctx = bool(cfg.profile.contexts)

    enums = [ast.EnumDecl("location_t", tuple(locs)), ast.EnumDecl("step_t", steps)]
    enums += [ast.EnumDecl(a.type_name, a.values) for a in ATTRIBUTES]
    if with_ctx:
        enums.append(ast.EnumDecl(CONTEXT_TYPE, tuple(c.value for c in UserContext)))

    S, NF, ACT = ast.STATE, ast.NON_FLUENT, ast.ACTION
    fluents = [
        ast.FluentDecl("loc", S, "location_t", (), locs[0]),
        ast.FluentDecl("holding_book", S, "bool", (), False),
        ast.FluentDecl("delivered", S, "bool", (), False),
        ast.FluentDecl("late", S, "bool", (), False),
        ast.FluentDecl("explained", S, "bool", (), False),
        ast.FluentDecl("step", S, "step_t", (), steps[0]),
    ]
    if with_ctx:
        fluents.append(ast.FluentDecl(CONTEXT_FLUENT, S, CONTEXT_TYPE, (), "calm"))
    fluents += [ast.FluentDecl(a.fluent, S, a.type_name, (), a.values[0])
                for a in ATTRIBUTES]
    fluents += [
        ast.FluentDecl("connected", NF, "bool", ("location_t", "location_t"), False),
        ast.FluentDecl("hand_over_reward", NF, "real", (), 10.0),
        ast.FluentDecl("step_cost", NF, "real", (), 0.1),
        ast.FluentDecl("attribute_bonus", NF, "real", (), 1.0),
    ]
    fluents += nonfluent_decls(cfg.profile)
    fluents += [
        ast.FluentDecl("move", ACT, "bool", ("location_t", "location_t"), False),
        ast.FluentDecl("pick_up", ACT, "bool", (), False),
        ast.FluentDecl("hand_over", ACT, "bool", (), False),
        ast.FluentDecl("explain", ACT, "bool", tuple(a.type_name for a in ATTRIBUTES), False),
    ]

    explain_refs = _explain_refs()
    any_explain = _or([r for _, r in explain_refs])

    loc_body = A("loc")
    for dst in reversed(locs):
        loc_body = ast.IfThenElse(_or([A("move", (E(src), E(dst))) for src in locs]),
                                  E(dst), loc_body)
    step_body = A("step")
    for k in reversed(range(cfg.deadline)):
        step_body = ast.IfThenElse(_eq(A("step"), E(steps[k])), E(steps[k + 1]), step_body)

    cpfs = [
        ast.Cpf("loc", (), loc_body),
        ast.Cpf("holding_book", (),
                _and(ast.Binary("|", A("holding_book"), A("pick_up")),
                     ast.Unary("~", A("hand_over")))),
        ast.Cpf("delivered", (), ast.Binary("|", A("delivered"), A("hand_over"))),
        ast.Cpf("late", (), ast.Binary("|", A("late"),
                                       _eq(A("step"), E(steps[cfg.deadline - 1])))),
        ast.Cpf("explained", (), ast.Binary("|", A("explained"), any_explain)),
        ast.Cpf("step", (), step_body),
    ]
    if with_ctx:
        cpfs.append(ast.Cpf(CONTEXT_FLUENT, (), ast.KronDelta(A(CONTEXT_FLUENT))))
    cpfs += emit_preference_cpfs(cfg.profile)

    f, t = ast.Var("f"), ast.Var("t")
    pre = [
        ast.Binary("=>", A("move", (f, t)), _and(_eq(A("loc"), f), A("connected", (f, t)))),
        ast.Binary("=>", A("pick_up"), _and(_eq(A("loc"), E(cfg.book)),
                                            ast.Unary("~", A("holding_book")),
                                            ast.Unary("~", A("delivered")))),
        ast.Binary("=>", A("hand_over"), _and(_eq(A("loc"), E(cfg.visitor)),
                                              A("holding_book"))),
        ast.Binary("=>", A("explain", tuple(ast.Var(v) for v in ("r", "dl", "d", "s"))),
                   _and(A("late"), ast.Unary("~", A("explained")),
                        ast.Unary("~", A("delivered")), _eq(A("loc"), E(cfg.visitor)))),
    ]

    matches = []
    for vals, ref in explain_refs:
        hits = _sum([_eq(A(attr.fluent), E(v)) for attr, v in zip(ATTRIBUTES, vals)])
        matches.append(ast.Binary("*", ref, hits))
    reward = ast.Binary(
        "+",
        ast.Binary("-", ast.Binary("*", A("hand_over_reward"), A("hand_over")),
                   ast.Binary("*", A("step_cost"), ast.Unary("~", A("delivered")))),
        ast.Binary("*", A("attribute_bonus"), _sum(matches)))

    return ast.DomainModel(
        name=DOMAIN_NAME, requirements=("reward-deterministic", "serial-actions"),
        enum_decls=tuple(enums), object_types=(), fluent_decls=tuple(fluents),
        cpfs=tuple(cpfs), reward=reward, preconditions=tuple(pre),
        preferences=tuple(a.fluent for a in ATTRIBUTES))


def build_instance(config: LibrarianConfig) -> ast.InstanceModel:
    cfg = config
    Asg = ast.Assignment
    nonf = [Asg("connected", (a, b), True) for a, b in cfg.edges()]
    nonf += [Asg("hand_over_reward", (), float(cfg.hand_over_reward)),
             Asg("step_cost", (), float(cfg.step_cost)),
             Asg("attribute_bonus", (), float(cfg.attribute_bonus))]
    nonf += [Asg(k, (), float(v)) for k, v in nonfluent_values(cfg.profile).items()]
    init = [Asg("loc", (), cfg.start)]
    if cfg.profile.contexts:
        init.append(Asg(CONTEXT_FLUENT, (), UserContext(cfg.context).value))
    prefs = cfg.initial_attributes()
    init += [Asg(a.fluent, (), getattr(prefs, a.key)) for a in ATTRIBUTES]
    return ast.InstanceModel(
        name=cfg.instance_name, domain_name=DOMAIN_NAME, objects=(),
        non_fluents=tuple(nonf), init_state=tuple(init), horizon=cfg.horizon,
        discount=float(cfg.discount))


def librarian_models(config: LibrarianConfig | None = None):
    cfg = (config or LibrarianConfig()).check()
    return build_domain(cfg), build_instance(cfg)


def build_librarian(config: LibrarianConfig | None = None):
    """Return ``(domain_text, instance_text)`` for ``config``."""
    dom, inst = librarian_models(config)
    return pretty_print(dom), pretty_print(inst)


def load_librarian(config: LibrarianConfig | None = None, action_cap=None):
    """Generate, parse, validate and ground in one go."""
    from .grounding import DEFAULT_ACTION_CAP, ground
    from .lang import parse_domain, parse_instance, validate
    dom_text, inst_text = build_librarian(config)
    checked = validate(parse_domain(dom_text), parse_instance(inst_text))
    return ground(checked, action_cap or DEFAULT_ACTION_CAP)


# -- config file ----------------------------------------------------------------

_CONFIG_KEYS = {"locations", "start", "book", "visitor", "deadline", "horizon",
                "discount", "rewards", "adjacency", "profile",
                "initial_preferences", "context", "instance_name"}


def config_from_dict(doc) -> LibrarianConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    kw = {}
    for k in ("start", "book", "visitor", "instance_name"):
        if k in doc:
            kw[k] = str(doc[k])
    for k in ("deadline", "horizon"):
        if k in doc:
            if not isinstance(doc[k], int) or isinstance(doc[k], bool):
                raise ConfigError(f"'{k}' must be an integer")
            kw[k] = doc[k]
    if "discount" in doc:
        kw["discount"] = float(doc["discount"])
    if "locations" in doc:
        kw["locations"] = tuple(str(x) for x in doc["locations"])
    if "adjacency" in doc:
        kw["adjacency"] = tuple((str(a), str(b)) for a, b in doc["adjacency"])
    rewards = doc.get("rewards", {})
    bad = set(rewards) - {"hand_over", "step_cost", "attribute_bonus"}
    if bad:
        raise ConfigError(f"unknown reward key(s): {', '.join(sorted(bad))}")
    for src, dst in (("hand_over", "hand_over_reward"), ("step_cost", "step_cost"),
                     ("attribute_bonus", "attribute_bonus")):
        if src in rewards:
            kw[dst] = float(rewards[src])
    if "profile" in doc:
        kw["profile"] = profile_from_dict(doc["profile"])
    if "initial_preferences" in doc:
        ip = doc["initial_preferences"]
        try:
            kw["initial_preferences"] = ExplanationAttributes(
                **{a.key: ip[a.key] for a in ATTRIBUTES})
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad initial_preferences: {exc}") from None
    if "context" in doc:
        try:
            kw["context"] = UserContext(doc["context"])
        except ValueError:
            raise ConfigError(f"unknown context {doc['context']!r}") from None
    return LibrarianConfig(**kw).check()


def config_to_dict(cfg: LibrarianConfig):
    doc = {
        "locations": list(cfg.locations), "start": cfg.start, "book": cfg.book,
        "visitor": cfg.visitor, "deadline": cfg.deadline, "horizon": cfg.horizon,
        "discount": cfg.discount,
        "rewards": {"hand_over": cfg.hand_over_reward, "step_cost": cfg.step_cost,
                    "attribute_bonus": cfg.attribute_bonus},
        "profile": profile_to_dict(cfg.profile),
        "context": UserContext(cfg.context).value,
        "instance_name": cfg.instance_name,
    }
    if cfg.adjacency is not None:
        doc["adjacency"] = [list(e) for e in cfg.adjacency]
    if cfg.initial_preferences is not None:
        doc["initial_preferences"] = {a.key: getattr(cfg.initial_preferences, a.key)
                                      for a in ATTRIBUTES}
    return doc


def load_config(path) -> LibrarianConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(doc)
