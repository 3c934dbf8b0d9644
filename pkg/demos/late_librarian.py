"""
A late robot librarian
======================

Generate the librarian scenario, solve it exactly and read off the plan.
Run from the repository root:  python3 demos/late_librarian.py
"""

from prefplan import planner
from prefplan.librarian import build_librarian, late_arrival_config, load_librarian

# The late-arrival configuration: the deadline falls before the hand-over and
# the visitor's preferences are frozen at visual / poor / long / global.
cfg = late_arrival_config()
domain_text, instance_text = build_librarian(cfg)
print(instance_text)

model = load_librarian(cfg)
print(f"{model.n_states} states, {model.n_actions} ground actions")

# Exact finite-horizon value iteration from the initial state.
values, policy = planner.value_iteration(model)
print("optimal value:", values.value(model.initial_state))

trace = planner.extract_plan(model, policy)
print(trace.to_text())

# Why that explanation?  Compare every explain variant at the moment the
# robot reaches the visitor late, holding the book.
step = next(st for st in trace.steps if st.action.name == "explain")
k = model.horizon - step.stage
_, _, q = planner.backup(model, step.state, values.values[k - 1])
ranked = sorted(((v, str(model.actions[a])) for a, v in q.items()), reverse=True)
for v, name in ranked[:6]:
    print(f"  {v:7.3f}  {name}")

# The same plan through the exact oracle, as a cross-check.
print("expectimax:", planner.expectimax_oracle(model, memo=True))
