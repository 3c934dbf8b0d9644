"""Compile a validated model into an enumerable factored MDP.

States are tuples of small integers, one slot per ground state fluent
(booleans as 0/1, enum values as their declaration index). Actions are
serialized: exactly one :class:`GroundAction` fires per step, index 0 being
the no-op. CPFs are conditionally independent given (state, action), so the
joint successor distribution is the product of the per-fluent ones.
"""

from __future__ import annotations

import bisect
import itertools
import json
import math
import operator
from dataclasses import dataclass

from .attributes import ATTRIBUTES, ExplanationAttributes
from .errors import EvaluationError, GroundingError, ResourceCapError
from .lang import ast
from .lang.printer import format_expr
from .lang.validate import CheckedModel

ROBOT = "robot-state"
PREFERENCE = "preference-state"
ACTION = "action"
NON_FLUENT = "non-fluent"

DEFAULT_ACTION_CAP = 10 ** 5
NORM_TOL = 1e-9

NOOP = "noop"


@dataclass(frozen=True)
class GroundFluent:
    name: str
    args: tuple
    kind: str
    index: int          # dense id within ``kind``
    values: tuple = ()  # value labels (state fluents only)
    slot: int = -1      # position in the state vector (state fluents only)

    @property
    def label(self):
        return f"{self.name}({', '.join(self.args)})" if self.args else self.name


@dataclass(frozen=True)
class GroundAction:
    index: int
    name: str
    args: tuple = ()
    attributes: ExplanationAttributes | None = None

    def __str__(self):
        return f"{self.name}({', '.join(self.args)})" if self.args else self.name


# -- expression folding and compilation --------------------------------------

def _bindings(params, types):
    return itertools.product(*(types[p] for p in params))


class _Compiler:
    def __init__(self, types, fluents, nonfluents, slots, action_ids):
        self.types = types
        self.fluents = fluents          # name -> FluentDecl
        self.nonfluents = nonfluents    # (name, args) -> value
        self.slots = slots              # (name, args) -> (slot, labels)
        self.action_ids = action_ids    # (name, args) -> index

    def fold(self, e, env):
        """Substitute variables and non-fluents, then fold constants."""
        if isinstance(e, ast.Var):
            return ast.EnumConst(env[e.name])
        if isinstance(e, ast.FluentRef):
            args = tuple(env[a.name] if isinstance(a, ast.Var) else a.name
                         for a in e.args)
            f = self.fluents[e.name]
            if f.kind == ast.NON_FLUENT:
                v = self.nonfluents[(e.name, args)]
                return ast.EnumConst(v) if isinstance(v, str) else ast.Const(v)
            return ast.FluentRef(e.name, tuple(ast.EnumConst(a) for a in args))
        if isinstance(e, ast.Unary):
            x = self.fold(e.operand, env)
            if isinstance(x, ast.Const):
                return ast.Const(not x.value if e.op == "~" else -x.value)
            return ast.Unary(e.op, x)
        if isinstance(e, ast.Binary):
            l, r = self.fold(e.left, env), self.fold(e.right, env)
            if _is_literal(l) and _is_literal(r) and not (e.op == "/" and _val(r) == 0):
                return ast.Const(_BINOPS[e.op](_val(l), _val(r)))
            return ast.Binary(e.op, l, r)
        if isinstance(e, ast.IfThenElse):
            c = self.fold(e.cond, env)
            if isinstance(c, ast.Const):
                return self.fold(e.then if c.value else e.orelse, env)
            return ast.IfThenElse(c, self.fold(e.then, env), self.fold(e.orelse, env))
        if isinstance(e, ast.Bernoulli):
            return ast.Bernoulli(self.fold(e.prob, env))
        if isinstance(e, ast.KronDelta):
            return ast.KronDelta(self.fold(e.arg, env))
        if isinstance(e, ast.Discrete):
            return ast.Discrete(e.type_name, tuple((v, self.fold(p, env))
                                                  for v, p in e.branches))
        return e

    def compile(self, e):
        """Deterministic expression -> closure ``f(state, action_index)``."""
        if isinstance(e, ast.Const):
            v = e.value
            return lambda s, a: v
        if isinstance(e, ast.EnumConst):
            v = e.name
            return lambda s, a: v
        if isinstance(e, ast.FluentRef):
            key = (e.name, tuple(x.name for x in e.args))
            if self.fluents[e.name].kind == ast.ACTION:
                k = self.action_ids[key]
                return lambda s, a: a == k
            i, labels = self.slots[key]
            return lambda s, a: labels[s[i]]
        if isinstance(e, ast.Unary):
            f = self.compile(e.operand)
            if e.op == "~":
                return lambda s, a: not f(s, a)
            return lambda s, a: -f(s, a)
        if isinstance(e, ast.Binary):
            return self._binary(e)
        if isinstance(e, ast.IfThenElse):
            c, t, o = self.compile(e.cond), self.compile(e.then), self.compile(e.orelse)
            return lambda s, a: t(s, a) if c(s, a) else o(s, a)
        if isinstance(e, ast.KronDelta):
            return self.compile(e.arg)
        raise GroundingError("E-STOCH", f"stochastic expression in a deterministic "
                             f"position: {format_expr(e)}")

    def _binary(self, e):
        l, r = self.compile(e.left), self.compile(e.right)
        op = e.op
        if op == "^":
            return lambda s, a: bool(l(s, a)) and bool(r(s, a))
        if op == "|":
            return lambda s, a: bool(l(s, a)) or bool(r(s, a))
        if op == "=>":
            return lambda s, a: (not l(s, a)) or bool(r(s, a))
        if op == "/":
            text = format_expr(e)

            def div(s, a):
                d = r(s, a)
                if d == 0:
                    raise EvaluationError(f"division by zero in '{text}'")
                return l(s, a) / d
            return div
        fn = _BINOPS[op]
        return lambda s, a: fn(l(s, a), r(s, a))

    def compile_dist(self, e, fluent_label, labels):
        """CPF body -> closure returning ((value_index, prob), ...)."""
        index = {v: k for k, v in enumerate(labels)}
        if labels == (False, True):
            index = {False: 0, True: 1}
        return self._dist(e, fluent_label, index)

    def _dist(self, e, label, index):
        if isinstance(e, ast.IfThenElse):
            c = self.compile(e.cond)
            t = self._dist(e.then, label, index)
            o = self._dist(e.orelse, label, index)
            return lambda s, a: t(s, a) if c(s, a) else o(s, a)
        if isinstance(e, ast.Bernoulli):
            if isinstance(e.prob, ast.Const):
                d = _bernoulli(float(e.prob.value), label)
                return lambda s, a: d
            p = self.compile(e.prob)
            return lambda s, a: _bernoulli(float(p(s, a)), label)
        if isinstance(e, ast.Discrete):
            order = sorted(e.branches, key=lambda b: index[b[0]])
            ids = [index[v] for v, _ in order]
            if all(isinstance(p, ast.Const) for _, p in order):
                d = _discrete(ids, [float(p.value) for _, p in order], label)
                return lambda s, a: d
            fns = [self.compile(p) for _, p in order]
            return lambda s, a: _discrete(ids, [float(f(s, a)) for f in fns], label)
        if isinstance(e, (ast.Const, ast.EnumConst)):
            d = ((index[e.value if isinstance(e, ast.Const) else e.name], 1.0),)
            return lambda s, a: d
        f = self.compile(e)
        singles = {v: ((k, 1.0),) for v, k in index.items()}
        return lambda s, a: singles[f(s, a)]


def _is_literal(e):
    return isinstance(e, (ast.Const, ast.EnumConst))


def _val(e):
    return e.value if isinstance(e, ast.Const) else e.name


_BINOPS = {
    "+": operator.add, "-": operator.sub, "*": operator.mul,
    "/": operator.truediv,
    "==": operator.eq, "~=": operator.ne, "<": operator.lt, "<=": operator.le,
    ">": operator.gt, ">=": operator.ge,
    "^": lambda x, y: bool(x) and bool(y), "|": lambda x, y: bool(x) or bool(y),
    "=>": lambda x, y: (not x) or bool(y), "<=>": lambda x, y: bool(x) == bool(y),
}


def _bernoulli(p, label):
    if not (0.0 <= p <= 1.0):
        raise GroundingError("E-PROB", f"Bernoulli parameter {p!r} outside [0, 1] "
                             f"for '{label}'")
    out = []
    if p < 1.0:
        out.append((0, 1.0 - p))
    if p > 0.0:
        out.append((1, p))
    return tuple(out)


def _discrete(ids, probs, label):
    if any(p < 0 for p in probs):
        raise GroundingError("E-PROB", f"negative Discrete probability for '{label}'")
    total = math.fsum(probs)
    if abs(total - 1.0) > NORM_TOL:
        raise GroundingError("E-NORM", f"Discrete probabilities for '{label}' sum "
                             f"to {total!r}, not 1.0")
    return tuple((k, p) for k, p in zip(ids, probs) if p != 0.0)


def _check_constant_dists(e, label):
    """Eagerly reject ill-formed probabilities that folded to constants."""
    for node in ast.walk(e):
        if isinstance(node, ast.Bernoulli) and isinstance(node.prob, ast.Const):
            _bernoulli(float(node.prob.value), label)
        elif isinstance(node, ast.Discrete) and all(isinstance(p, ast.Const)
                                                    for _, p in node.branches):
            _discrete(range(len(node.branches)),
                      [float(p.value) for _, p in node.branches], label)


def _var_types(expr, fluents):
    out = {}
    for node in ast.walk(expr):
        if isinstance(node, ast.FluentRef):
            for arg, ptype in zip(node.args, fluents[node.name].params):
                if isinstance(arg, ast.Var):
                    out.setdefault(arg.name, ptype)
    return out


def _mentions_state(expr, fluents):
    return any(isinstance(n, ast.FluentRef) and fluents[n.name].kind == ast.STATE
               for n in ast.walk(expr))


# -- the grounded model --------------------------------------------------------

class GroundedModel:
    """Factored MDP with exact transition distributions.

    The public attributes are fixed after :func:`ground` returns. Transition,
    reward and applicability results are memoized on first use; the memo is
    idempotent, so sharing a model between threads is safe.
    """

    def __init__(self, *, name, instance_name, state_fluents, actions,
                 nonfluent_table, dists, reward_fn, preconditions,
                 initial_state, horizon, discount, preference_fluents):
        self.name = name
        self.instance_name = instance_name
        self.state_fluents = tuple(state_fluents)
        self.actions = tuple(actions)
        self.nonfluents = dict(nonfluent_table)
        self.horizon = horizon
        self.discount = discount
        self.initial_state = tuple(initial_state)
        self.preference_fluents = tuple(preference_fluents)
        self.sizes = tuple(len(f.values) for f in self.state_fluents)
        self._dists = tuple(dists)
        self._reward = reward_fn
        self._pre = preconditions
        self._tcache = {}
        self._rcache = {}
        self._acache = {}
        self._slot = {f.label: f.slot for f in self.state_fluents}

    @property
    def n_states(self):
        return math.prod(self.sizes)

    @property
    def n_actions(self):
        return len(self.actions)

    @property
    def robot_fluents(self):
        return tuple(f for f in self.state_fluents if f.kind == ROBOT)

    def action(self, a):
        return self.actions[a] if isinstance(a, int) else a

    def find_action(self, name, *args):
        for act in self.actions:
            if act.name == name and act.args == tuple(args):
                return act
        raise KeyError(f"no ground action {name}{args}")

    def slot(self, label):
        return self._slot[label]

    def value(self, state, label):
        f = self.state_fluents[self._slot[label]]
        return f.values[state[f.slot]]

    def state_index(self, state):
        idx = 0
        for v, n in zip(state, self.sizes):
            idx = idx * n + v
        return idx

    def state_from_index(self, idx):
        out = []
        for n in reversed(self.sizes):
            idx, v = divmod(idx, n)
            out.append(v)
        return tuple(reversed(out))

    def make_state(self, **overrides):
        """Initial state with some fluents replaced by value labels."""
        s = list(self.initial_state)
        for label, value in overrides.items():
            f = self.state_fluents[self._slot[label]]
            s[f.slot] = f.values.index(value)
        return tuple(s)

    def describe(self, state):
        return {f.label: _json_value(f.values[state[f.slot]])
                for f in self.state_fluents}

    def applicable(self, state):
        """Indices of actions whose preconditions hold in ``state``."""
        got = self._acache.get(state)
        if got is None:
            got = tuple(k for k, checks in enumerate(self._pre)
                        if all(c(state, k) for c in checks))
            self._acache[state] = got
        return got

    def distribution(self, state, a):
        key = (state, a)
        got = self._tcache.get(key)
        if got is None:
            per = [d(state, a) for d in self._dists]
            succ, probs = [], []
            for combo in itertools.product(*per):
                p = 1.0
                for _, q in combo:
                    p *= q
                if p > 0.0:
                    succ.append(tuple(v for v, _ in combo))
                    probs.append(p)
            cum = list(itertools.accumulate(probs))
            got = (tuple(succ), tuple(probs), cum)
            self._tcache[key] = got
        return got

    def reward(self, state, a):
        key = (state, a)
        got = self._rcache.get(key)
        if got is None:
            got = float(self._reward(state, a))
            self._rcache[key] = got
        return got

    def sample(self, state, a, rng):
        succ, _, cum = self.distribution(state, a)
        k = bisect.bisect_right(cum, rng.random() * cum[-1])
        return succ[min(k, len(succ) - 1)]


def _json_value(v):
    return v if isinstance(v, (bool, str)) else float(v)


def _index(a):
    return a if isinstance(a, int) else a.index


def transition_distribution(model: GroundedModel, s, a):
    """Exact successor distribution as ``[(next_state, prob), ...]``."""
    succ, probs, _ = model.distribution(tuple(s), _index(a))
    return list(zip(succ, probs))


def sample_next(model: GroundedModel, s, a, rng):
    """Draw a successor with ``rng`` and return ``(next_state, reward)``."""
    s, k = tuple(s), _index(a)
    return model.sample(s, k, rng), model.reward(s, k)


def reward_of(model: GroundedModel, s, a) -> float:
    return model.reward(tuple(s), _index(a))


def count_ground_actions(domain: ast.DomainModel, types) -> int:
    """Number of ground actions including the no-op, without expanding them."""
    return 1 + sum(math.prod(len(types[p]) for p in f.params)
                   for f in domain.fluents_of_kind(ast.ACTION))


def ground(model: CheckedModel, action_cap: int = DEFAULT_ACTION_CAP) -> GroundedModel:
    """Expand every fluent and action template over its typed arguments."""
    dom, inst, types = model.domain, model.instance, model.types
    fluents = {f.name: f for f in dom.fluent_decls}

    n_actions = count_ground_actions(dom, types)
    if n_actions > action_cap:
        raise ResourceCapError("ground action", n_actions, action_cap)

    # non-fluent table
    nonfluents = {}
    for f in dom.fluents_of_kind(ast.NON_FLUENT):
        default = f.default
        if default is None:
            default = {"bool": False, "real": 0.0}.get(f.value_type)
            if default is None:
                default = types[f.value_type][0]
        for args in _bindings(f.params, types):
            nonfluents[(f.name, args)] = default
    for a in inst.non_fluents:
        nonfluents[(a.fluent, a.args)] = a.value

    # state fluents: robot-state block first, then preferences
    prefs = set(model.preferences)
    ordered = ([f for f in dom.fluents_of_kind(ast.STATE) if f.name not in prefs]
               + [f for f in dom.fluents_of_kind(ast.STATE) if f.name in prefs])
    state_fluents, slots = [], {}
    counters = {ROBOT: 0, PREFERENCE: 0}
    for f in ordered:
        kind = PREFERENCE if f.name in prefs else ROBOT
        labels = (False, True) if f.value_type == "bool" else tuple(types[f.value_type])
        for args in _bindings(f.params, types):
            gf = GroundFluent(f.name, args, kind, counters[kind], labels,
                              slot=len(state_fluents))
            counters[kind] += 1
            slots[(f.name, args)] = (gf.slot, labels)
            state_fluents.append(gf)

    # actions
    actions = [GroundAction(0, NOOP)]
    action_ids = {}
    for f in dom.fluents_of_kind(ast.ACTION):
        for args in _bindings(f.params, types):
            k = len(actions)
            actions.append(GroundAction(k, f.name, args, _attributes(f.name, args)))
            action_ids[(f.name, args)] = k

    comp = _Compiler(types, fluents, nonfluents, slots, action_ids)

    # CPFs, in state-vector order
    cpfs = {c.target: c for c in dom.cpfs}
    dists = []
    for gf in state_fluents:
        c = cpfs[gf.name]
        body = comp.fold(c.body, dict(zip(c.params, gf.args)))
        _check_constant_dists(body, gf.label)
        dists.append(comp.compile_dist(body, gf.label, gf.values))

    reward_fn = comp.compile(comp.fold(dom.reward, {}))

    # preconditions, attached per action where the antecedent allows it
    checks = [[] for _ in actions]
    for pre in dom.preconditions:
        vtypes = _var_types(pre, fluents)
        names = sorted(vtypes)
        for combo in _bindings([vtypes[n] for n in names], types):
            folded = comp.fold(pre, dict(zip(names, combo)))
            if isinstance(folded, ast.Const):
                if folded.value:
                    continue
                for k in range(1, len(actions)):
                    checks[k].append(lambda s, a: False)
                continue
            if (isinstance(folded, ast.Binary) and folded.op == "=>"
                    and not _mentions_state(folded.left, fluents)):
                guard = comp.compile(folded.left)
                body = comp.compile(folded.right)
                for k in range(1, len(actions)):
                    if guard((), k):
                        checks[k].append(body)
            else:
                fn = comp.compile(folded)
                for k in range(1, len(actions)):
                    checks[k].append(fn)

    # initial state
    init = {}
    for gf in state_fluents:
        decl = fluents[gf.name]
        if decl.default is None:
            init[(gf.name, gf.args)] = 0
        else:
            init[(gf.name, gf.args)] = gf.values.index(decl.default)
    for a in inst.init_state:
        slot, labels = slots[(a.fluent, a.args)]
        init[(a.fluent, a.args)] = labels.index(a.value)
    initial = tuple(init[(gf.name, gf.args)] for gf in state_fluents)

    return GroundedModel(
        name=dom.name, instance_name=inst.name, state_fluents=state_fluents,
        actions=actions, nonfluent_table=nonfluents, dists=dists,
        reward_fn=reward_fn, preconditions=checks, initial_state=initial,
        horizon=inst.horizon, discount=inst.discount,
        preference_fluents=[gf.label for gf in state_fluents if gf.kind == PREFERENCE])


def _attributes(name, args):
    if name != "explain" or len(args) != len(ATTRIBUTES):
        return None
    if all(v in attr.values for v, attr in zip(args, ATTRIBUTES)):
        return ExplanationAttributes(*args)
    return None


def ground_fluent_table(model: GroundedModel):
    """All ground fluents, including actions and non-fluents, with kind tags."""
    out = list(model.state_fluents)
    for act in model.actions[1:]:
        out.append(GroundFluent(act.name, act.args, ACTION, act.index - 1))
    for k, (name, args) in enumerate(sorted(model.nonfluents)):
        out.append(GroundFluent(name, args, NON_FLUENT, k))
    return out


def reachable_states(model: GroundedModel, s0=None, horizon=None, cap=None):
    """States reachable from ``s0`` within ``horizon`` steps, in discovery order."""
    s0 = model.initial_state if s0 is None else tuple(s0)
    horizon = model.horizon if horizon is None else horizon
    seen = {s0: None}
    frontier = [s0]
    for _ in range(horizon):
        nxt = []
        for s in frontier:
            for a in model.applicable(s):
                for s2 in model.distribution(s, a)[0]:
                    if s2 not in seen:
                        seen[s2] = None
                        nxt.append(s2)
                        if cap is not None and len(seen) > cap:
                            raise ResourceCapError("reachable state", len(seen), cap)
        frontier = nxt
    return list(seen)


def dump_json(model: GroundedModel, max_states: int = 2000) -> str:
    """Debug dump: ground fluents, actions and per-(s, a) distributions."""
    states = reachable_states(model, cap=max_states)
    doc = {
        "domain": model.name,
        "instance": model.instance_name,
        "n_states": model.n_states,
        "fluents": [{"name": f.name, "args": list(f.args), "kind": f.kind,
                     "index": f.index,
                     "values": [_json_value(v) for v in f.values]}
                    for f in ground_fluent_table(model)],
        "actions": [{"index": a.index, "action": str(a)} for a in model.actions],
        "initial_state": model.state_index(model.initial_state),
        "transitions": [
            {"state": model.state_index(s), "action": a,
             "reward": model.reward(s, a),
             "successors": [[model.state_index(s2), p]
                            for s2, p in zip(*model.distribution(s, a)[:2])]}
            for s in states for a in model.applicable(s)],
    }
    return json.dumps(doc, indent=1, sort_keys=True)
