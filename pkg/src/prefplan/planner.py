"""Solvers for grounded models.

* :func:`value_iteration` -- exact finite-horizon backups over the states
  reachable from the initial state.
* :func:`expectimax_oracle` -- exhaustive max/expectation recursion, used as
  an independent check on value iteration.
* :func:`sampling_plan` -- UCT for models too large to enumerate.
* :func:`extract_plan` -- roll a policy (or any actor) forward into a trace.

Stages are counted as *steps to go*: ``values[k]`` holds the optimal value with
``k`` decisions left, so ``values[0]`` is identically zero and the initial
state lives at ``values[horizon]``. Argmax ties go to the lowest action index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PolicyError, ResourceCapError
from .grounding import GroundedModel

DEFAULT_STATE_CAP = 10 ** 6
DEFAULT_NODE_CAP = 10 ** 7
TIE_TOL = 1e-12


def as_rng(rng):
    """Accept a Generator, a SeedSequence, or an int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass
class ValueTable:
    values: list  # values[k]: {state: value} with k steps to go
    discount: float

    @property
    def horizon(self):
        return len(self.values) - 1

    def value(self, state, steps_to_go=None):
        k = self.horizon if steps_to_go is None else steps_to_go
        return self.values[k][tuple(state)]

    def to_json(self, model: GroundedModel) -> str:
        return json.dumps({
            "horizon": self.horizon,
            "discount": self.discount,
            "stages": [{"steps_to_go": k,
                        "values": {str(model.state_index(s)): v
                                   for s, v in sorted(layer.items())}}
                       for k, layer in enumerate(self.values)],
        }, indent=1, sort_keys=True)


@dataclass
class Policy:
    actions: list  # actions[k]: {state: action index}; actions[0] == {}

    @property
    def horizon(self):
        return len(self.actions) - 1

    def action_index(self, state, stage, horizon=None):
        k = (horizon if horizon is not None else self.horizon) - stage
        try:
            return self.actions[k][tuple(state)]
        except (IndexError, KeyError):
            raise PolicyError(f"policy undefined at stage {stage} for state "
                              f"{tuple(state)}") from None

    def act(self, model, state, stage, rng=None):
        return model.actions[self.action_index(state, stage)]

    def to_json(self, model: GroundedModel) -> str:
        return json.dumps({
            "horizon": self.horizon,
            "stages": [{"steps_to_go": k,
                        "actions": {str(model.state_index(s)): str(model.actions[a])
                                    for s, a in sorted(layer.items())}}
                       for k, layer in enumerate(self.actions)],
        }, indent=1, sort_keys=True)


def q_value(model, state, a, next_values):
    succ, probs, _ = model.distribution(state, a)
    ev = 0.0
    for s2, p in zip(succ, probs):
        ev += p * next_values[s2]
    return model.reward(state, a) + model.discount * ev


def backup(model, state, next_values):
    """One Bellman backup; returns ``(value, best action index, q-values)``."""
    qs = {a: q_value(model, state, a, next_values) for a in model.applicable(state)}
    best = max(qs.values())
    for a in sorted(qs):
        if qs[a] >= best - TIE_TOL:
            return best, a, qs
    raise AssertionError("unreachable")


def reachable_layers(model, s0=None, horizon=None, state_cap=DEFAULT_STATE_CAP):
    """States reachable at each time step ``0..horizon``."""
    s0 = model.initial_state if s0 is None else tuple(s0)
    horizon = model.horizon if horizon is None else horizon
    layers = [[s0]]
    total = 1
    for _ in range(horizon):
        nxt = {}
        for s in layers[-1]:
            for a in model.applicable(s):
                for s2 in model.distribution(s, a)[0]:
                    nxt[s2] = None
        total += len(nxt)
        if total > state_cap:
            raise ResourceCapError("state-stage entry", total, state_cap)
        layers.append(list(nxt))
    return layers


def value_iteration(model: GroundedModel, s0=None, horizon=None,
                    state_cap=DEFAULT_STATE_CAP):
    """Exact finite-horizon values and a greedy policy over reachable states."""
    horizon = model.horizon if horizon is None else horizon
    layers = reachable_layers(model, s0, horizon, state_cap)
    values = [None] * (horizon + 1)
    policy = [None] * (horizon + 1)
    values[0] = {s: 0.0 for s in layers[horizon]}
    policy[0] = {}
    for k in range(1, horizon + 1):
        layer = layers[horizon - k]
        vk, pk = {}, {}
        for s in layer:
            vk[s], pk[s], _ = backup(model, s, values[k - 1])
        values[k], policy[k] = vk, pk
    return ValueTable(values, model.discount), Policy(policy)


def optimal_actions(model, values: ValueTable, state, steps_to_go, tol=1e-9):
    """All action indices whose Q-value is within ``tol`` of the optimum."""
    _, _, qs = backup(model, tuple(state), values.values[steps_to_go - 1])
    best = max(qs.values())
    return sorted(a for a, q in qs.items() if q >= best - tol)


def expectimax_oracle(model: GroundedModel, s0=None, horizon=None,
                      node_cap=DEFAULT_NODE_CAP, memo=False) -> float:
    """Optimal expected return by full recursion over the outcome tree."""
    s0 = model.initial_state if s0 is None else tuple(s0)
    horizon = model.horizon if horizon is None else horizon
    nodes = 0
    table = {} if memo else None

    def value(s, k):
        nonlocal nodes
        if table is not None and (s, k) in table:
            return table[(s, k)]
        nodes += 1
        if nodes > node_cap:
            raise ResourceCapError("expectimax node", nodes, node_cap)
        if k == 0:
            return 0.0
        best = -math.inf
        for a in model.applicable(s):
            succ, probs, _ = model.distribution(s, a)
            ev = 0.0
            for s2, p in zip(succ, probs):
                ev += p * value(s2, k - 1)
            q = model.reward(s, a) + model.discount * ev
            if q > best:
                best = q
        if table is not None:
            table[(s, k)] = best
        return best

    return value(s0, horizon)


# -- UCT -----------------------------------------------------------------------

class _Node:
    __slots__ = ("visits", "counts", "totals", "actions")

    def __init__(self, actions):
        self.visits = 0
        self.actions = actions
        self.counts = [0] * len(actions)
        self.totals = [0.0] * len(actions)

    def select(self, c, lo, span):
        for i, n in enumerate(self.counts):
            if n == 0:
                return i
        log_n = math.log(self.visits)
        best_i, best = 0, -math.inf
        for i, (n, tot) in enumerate(zip(self.counts, self.totals)):
            score = (tot / n - lo) / span + c * math.sqrt(log_n / n)
            if score > best:
                best_i, best = i, score
        return best_i


def _rollout(model, state, t, horizon, rng):
    ret, scale = 0.0, 1.0
    while t < horizon:
        acts = model.applicable(state)
        a = acts[int(rng.random() * len(acts))]
        ret += scale * model.reward(state, a)
        state = model.sample(state, a, rng)
        scale *= model.discount
        t += 1
    return ret


def sampling_plan(model: GroundedModel, s, stage: int, budget: int, rng,
                  c: float = math.sqrt(2.0)):
    """UCT from ``(s, stage)``; returns the most visited root action.

    The tree is keyed by (time step, state), one node is added per iteration
    and leaves are valued by uniformly random rollouts to the horizon. Mean
    returns are rescaled to [0, 1] by the range of returns seen so far, so
    ``c`` has its usual UCB1 meaning whatever the reward scale.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rng = as_rng(rng)
    s = tuple(s)
    horizon = model.horizon
    root_actions = model.applicable(s)
    if stage >= horizon or len(root_actions) == 1:
        return model.actions[root_actions[0]]
    root = _Node(root_actions)
    tree = {(stage, s): root}
    gamma = model.discount
    lo, hi = math.inf, -math.inf
    for _ in range(budget):
        node, state, t = root, s, stage
        path = []
        span = hi - lo if hi > lo else 1.0
        while True:
            i = node.select(c, lo, span)
            a = node.actions[i]
            r = model.reward(state, a)
            state = model.sample(state, a, rng)
            t += 1
            path.append((node, i, r))
            if t >= horizon:
                ret = 0.0
                break
            child = tree.get((t, state))
            if child is None:
                tree[(t, state)] = _Node(model.applicable(state))
                ret = _rollout(model, state, t, horizon, rng)
                break
            node = child
        for node, i, r in reversed(path):
            ret = r + gamma * ret
            if ret < lo:
                lo = ret
            if ret > hi:
                hi = ret
            node.visits += 1
            node.counts[i] += 1
            node.totals[i] += ret
    best = max(range(len(root_actions)), key=lambda i: (root.counts[i], -i))
    return model.actions[root_actions[best]]


@dataclass
class SamplingActor:
    """Replans with UCT at every step."""
    budget: int = 1000
    c: float = math.sqrt(2.0)

    def act(self, model, state, stage, rng):
        return sampling_plan(model, state, stage, self.budget, rng, self.c)


class RandomActor:
    """Uniform choice among applicable actions."""

    def act(self, model, state, stage, rng):
        acts = model.applicable(tuple(state))
        return model.actions[acts[int(rng.random() * len(acts))]]


# -- traces --------------------------------------------------------------------

@dataclass(frozen=True)
class PlanStep:
    stage: int
    state: tuple
    action: object  # GroundAction
    reward: float
    next_state: tuple


@dataclass
class PlanTrace:
    steps: list = field(default_factory=list)
    discount: float = 1.0

    @property
    def total_return(self):
        ret, scale = 0.0, 1.0
        for st in self.steps:
            ret += scale * st.reward
            scale *= self.discount
        return ret

    @property
    def actions(self):
        return [st.action for st in self.steps]

    def action_strings(self):
        return [str(a) for a in self.actions]

    def to_records(self, model):
        return [{"stage": st.stage,
                 "state": model.state_index(st.state),
                 "action": str(st.action),
                 "reward": st.reward,
                 "next_state": model.state_index(st.next_state),
                 "fluents": model.describe(st.state)}
                for st in self.steps]

    def to_jsonl(self, model) -> str:
        header = {"domain": model.name, "instance": model.instance_name,
                  "horizon": model.horizon, "discount": self.discount,
                  "steps": len(self.steps), "return": self.total_return}
        lines = [json.dumps(header, sort_keys=True)]
        lines += [json.dumps(r, sort_keys=True) for r in self.to_records(model)]
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        lines = [f"# {len(self.steps)} steps, return {self.total_return:.6f}"]
        for st in self.steps:
            lines.append(f"t={st.stage:<3d} r={st.reward:+9.4f}  {st.action}")
        return "\n".join(lines) + "\n"


def split_streams(seed):
    """Independent (dynamics, actor) generators derived from one seed."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    dyn, act = ss.spawn(2)
    return np.random.default_rng(dyn), np.random.default_rng(act)


def extract_plan(model: GroundedModel, policy, s0=None, mode="most-likely",
                 seed=None) -> PlanTrace:
    """Follow ``policy`` (a :class:`Policy` or any actor with ``act``) from ``s0``.

    ``mode="most-likely"`` moves to the most probable successor (ties by state
    index); ``mode="sampled"`` draws successors from a generator seeded with
    ``seed``. Actors that need randomness get their own derived stream.
    """
    if mode not in ("most-likely", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "sampled" and seed is None:
        raise ValueError("sampled mode needs a seed")
    dyn_rng, act_rng = split_streams(0 if seed is None else seed)
    s = model.initial_state if s0 is None else tuple(s0)
    trace = PlanTrace(discount=model.discount)
    for t in range(model.horizon):
        action = policy.act(model, s, t, act_rng)
        r = model.reward(s, action.index)
        if mode == "sampled":
            s2 = model.sample(s, action.index, dyn_rng)
        else:
            succ, probs, _ = model.distribution(s, action.index)
            s2 = min(zip(succ, probs),
                     key=lambda sp: (-sp[1], model.state_index(sp[0])))[0]
        trace.steps.append(PlanStep(t, s, action, r, s2))
        s = s2
    return trace
