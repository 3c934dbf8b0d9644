"""
Exact and sampling planners side by side
========================================

Value iteration enumerates every reachable state. UCT only samples, so its
root decision should converge to the exact one as the budget grows.
"""

import time

import numpy as np

from prefplan import planner
from prefplan.librarian import LibrarianConfig, load_librarian
from prefplan.preference import PreferenceProfile, UserContext

model = load_librarian(LibrarianConfig())
t0 = time.perf_counter()
values, policy = planner.value_iteration(model)
print(f"value iteration: V = {values.value(model.initial_state):.4f} "
      f"in {time.perf_counter() - t0:.3f}s")

best = planner.optimal_actions(model, values, model.initial_state, model.horizon)
print("optimal first actions:", [str(model.actions[a]) for a in best])

for budget in (10, 100, 1000):
    picks = [planner.sampling_plan(model, model.initial_state, 0, budget,
                                   np.random.default_rng(seed)).index for seed in range(20)]
    agree = np.mean([a in best for a in picks])
    print(f"UCT budget {budget:5d}: agreement {agree:.2f}")

# A confused visitor prefers rich, textual explanations. With contexts the
# generated domain carries a context fluent and the preference CPFs branch
# on it.
profile = PreferenceProfile(persistence=1.0).with_contexts()
for ctx in UserContext:
    m = load_librarian(LibrarianConfig(profile=profile, context=ctx))
    _, pi = planner.value_iteration(m)
    trace = planner.extract_plan(m, pi)
    said = [a for a in trace.action_strings() if a.startswith("explain")]
    print(f"{ctx.value:9s} -> {said}")
