"""Seeded episode simulation and batch statistics."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .attributes import ATTRIBUTES
from .grounding import GroundedModel
from .planner import PlanTrace, extract_plan

SEED_SCHEME = "numpy.random.SeedSequence([base_seed, episode_index])"


def episode_seed(base_seed: int, episode: int) -> np.random.SeedSequence:
    """Seed for episode ``episode`` of a batch started from ``base_seed``."""
    return np.random.SeedSequence([int(base_seed), int(episode)])


@dataclass
class EpisodeReport:
    episode: int
    trace: PlanTrace
    # attribute key -> chosen value matched the preference fluent; None if
    # the episode contained no explain action
    matches: dict | None

    @property
    def total_return(self):
        return self.trace.total_return

    def to_dict(self, model):
        return {"episode": self.episode, "return": self.total_return,
                "matches": self.matches,
                "actions": self.trace.action_strings()}


def _matches(model, trace):
    for st in trace.steps:
        attrs = st.action.attributes
        if attrs is None:
            continue
        return {a.key: getattr(attrs, a.key) == model.value(st.state, a.fluent)
                for a in ATTRIBUTES}
    return None


def run_episode(model: GroundedModel, actor, seed, episode: int = 0) -> EpisodeReport:
    """One horizon-length rollout of ``actor`` with sampled dynamics."""
    trace = extract_plan(model, actor, mode="sampled", seed=seed)
    return EpisodeReport(episode, trace, _matches(model, trace))


@dataclass
class BatchReport:
    base_seed: int
    episodes: list

    @property
    def n(self):
        return len(self.episodes)

    @property
    def returns(self):
        return [e.total_return for e in self.episodes]

    @property
    def mean_return(self):
        return math.fsum(self.returns) / self.n

    @property
    def std_return(self):
        """Sample standard deviation (0 for a single episode)."""
        if self.n < 2:
            return 0.0
        m = self.mean_return
        return math.sqrt(math.fsum((r - m) ** 2 for r in self.returns) / (self.n - 1))

    @property
    def explain_episodes(self):
        return sum(1 for e in self.episodes if e.matches is not None)

    @property
    def match_rates(self):
        explained = [e.matches for e in self.episodes if e.matches is not None]
        if not explained:
            return {a.key: None for a in ATTRIBUTES}
        return {a.key: sum(m[a.key] for m in explained) / len(explained)
                for a in ATTRIBUTES}

    def to_json(self) -> str:
        return json.dumps({
            "episodes": self.n,
            "mean_return": self.mean_return,
            "std_return": self.std_return,
            "explain_episodes": self.explain_episodes,
            "match_rates": self.match_rates,
            "seed_schedule": {"base_seed": self.base_seed, "scheme": SEED_SCHEME},
            "returns": self.returns,
        }, indent=1, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["episode", "return", "explained"]
                   + [f"match_{a.key}" for a in ATTRIBUTES])
        for e in self.episodes:
            m = e.matches or {}
            w.writerow([e.episode, repr(e.total_return), int(e.matches is not None)]
                       + ["" if a.key not in m else int(m[a.key]) for a in ATTRIBUTES])
        return buf.getvalue()

    def summary(self) -> str:
        rates = self.match_rates
        shown = " ".join(f"{k}={'-' if v is None else f'{v:.3f}'}" for k, v in rates.items())
        return (f"episodes={self.n} mean_return={self.mean_return:.6f} "
                f"std={self.std_return:.6f} explained={self.explain_episodes} {shown}")


def evaluate_policy(model: GroundedModel, actor, n: int, seed: int,
                    threads: int = 1) -> BatchReport:
    """Run ``n`` independently seeded episodes and aggregate them.

    Episode ``i`` always uses :func:`episode_seed` ``(seed, i)``, so the report
    is the same for any ``threads`` value.
    """
    if n < 1:
        raise ValueError("need at least one episode")

    def one(i):
        return run_episode(model, actor, episode_seed(seed, i), episode=i)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            episodes = list(pool.map(one, range(n)))
    else:
        episodes = [one(i) for i in range(n)]
    return BatchReport(int(seed), episodes)


def write_traces_jsonl(model, batch: BatchReport) -> str:
    return "".join(json.dumps(e.to_dict(model), sort_keys=True) + "\n"
                   for e in batch.episodes)
