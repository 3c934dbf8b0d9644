"""
Preferences that drift
======================

Each preference fluent keeps its value with probability ``persistence`` and
is otherwise redrawn from its profile probability. This script looks at the
resulting two-state chain with numpy, then at what the drift does to a
simulated robot.
"""

import numpy as np

from prefplan import planner, simulator
from prefplan.librarian import LibrarianConfig, load_librarian
from prefplan.preference import PreferenceProfile

p_textual, persistence = 0.3, 0.9

# Transition matrix over (textual, visual).
keep, redraw = persistence, 1 - persistence
P = np.array([[keep + redraw * p_textual, redraw * (1 - p_textual)],
              [redraw * p_textual, keep + redraw * (1 - p_textual)]])
print(P)
print("rows sum to", P.sum(axis=1))

# Starting from visual, the chance of textual after n steps approaches p_textual.
start = np.array([0.0, 1.0])
for n in (1, 3, 10, 50):
    print(n, (start @ np.linalg.matrix_power(P, n))[0].round(4))

# The stationary distribution is the left eigenvector for eigenvalue 1.
w, v = np.linalg.eig(P.T)
stat = np.real(v[:, np.argmax(np.real(w))])
print("stationary:", (stat / stat.sum()).round(6))

# Because the robot observes the preference fluents, the optimal policy still
# matches every attribute; drift only changes which explanation it gives.
for pers in (1.0, 0.9, 0.5):
    model = load_librarian(LibrarianConfig(profile=PreferenceProfile(persistence=pers)))
    _, policy = planner.value_iteration(model)
    batch = simulator.evaluate_policy(model, policy, 2000, seed=1)
    chosen = {}
    for ep in batch.episodes:
        for st in ep.trace.steps:
            if st.action.attributes is not None:
                chosen[str(st.action.attributes)] = chosen.get(str(st.action.attributes), 0) + 1
    top = sorted(chosen.items(), key=lambda kv: -kv[1])[:3]
    print(f"persistence {pers}: {batch.summary()}")
    print("   most common explanations:", top)

# A uniformly random robot for contrast.
model = load_librarian(LibrarianConfig())
print("random:", simulator.evaluate_policy(model, planner.RandomActor(), 2000, seed=1).summary())
