"""Seeded generator of small random domain/instance pairs for property tests.

Every distribution uses constant probabilities that sum to one, and the
state space stays under 10^3 states.
"""

import numpy as np

from prefplan.grounding import ground
from prefplan.lang import parse_domain, parse_instance, validate


def _p(rng):
    return float(np.round(rng.uniform(0.05, 0.95), 3))


def _weights(rng, k):
    w = rng.integers(1, 10, size=k)
    probs = [float(x) / float(w.sum()) for x in w[:-1]]
    probs.append(1.0 - sum(probs))
    return probs


def random_pair(seed, max_bools=5, horizon=None):
    """Return (domain_text, instance_text) for a random small model."""
    rng = np.random.default_rng(seed)
    n_bool = int(rng.integers(1, max_bools + 1))
    n_vals = int(rng.integers(2, 4))
    n_obj = int(rng.integers(1, 3))
    bools = [f"b{i}" for i in range(n_bool)]
    vals = [f"@v{i}" for i in range(n_vals)]
    objs = [f"o{i}" for i in range(n_obj)]

    any_poke = " | ".join(f"poke(@{o})" for o in objs)
    cpfs = []
    for i, b in enumerate(bools):
        other = bools[(i + 1) % n_bool]
        cpfs.append(
            f"{b}' = if (flip) then Bernoulli({_p(rng)})\n"
            f"        else if ({other} ^ poke(@o0)) then Bernoulli({_p(rng)})\n"
            f"        else if ({any_poke}) then KronDelta(~{b})\n"
            f"        else KronDelta({b});")
    # the enum fluent cycles under 'turn' and otherwise drifts at random
    branches = ", ".join(f"{v} : {p!r}" for v, p in zip(vals, _weights(rng, n_vals)))
    cycle = " else ".join(f"if (e == {vals[i]}) then {vals[(i + 1) % n_vals]}"
                          for i in range(n_vals - 1)) + f" else {vals[0]}"
    cpfs.append(f"e' = if (turn) then ({cycle})\n"
                f"        else if (flip) then Discrete(e_t, {branches})\n"
                f"        else e;")

    terms = [f"{np.round(rng.normal(), 2)} * {b}" for b in bools]
    terms.append(f"{np.round(rng.normal(), 2)} * (e == {vals[-1]})")
    terms.append(f"{np.round(rng.uniform(-1, 0.5), 2)} * flip")
    terms.append("bonus(@o0) * poke(@o0)")
    reward = " + ".join(terms)

    h = int(rng.integers(1, 5)) if horizon is None else horizon
    discount = [1.0, 0.9, 0.5][int(rng.integers(0, 3))]
    dom = f"""domain rnd{seed} {{
    requirements = {{ serial-actions }};
    types {{
        e_t : {{ {", ".join(vals)} }};
        obj_t : object;
    }};
    pvariables {{
{chr(10).join(f"        {b} : {{ state-fluent, bool, default = false }};" for b in bools)}
        e : {{ state-fluent, e_t, default = {vals[0]} }};
        bonus(obj_t) : {{ non-fluent, real, default = 0.0 }};
        flip : {{ action-fluent, bool, default = false }};
        turn : {{ action-fluent, bool, default = false }};
        poke(obj_t) : {{ action-fluent, bool, default = false }};
    }};
    cpfs {{
        {chr(10).join("        " + c for c in cpfs).strip()}
    }};
    action-preconditions {{
        turn => ~{bools[0]};
    }};
    reward = {reward};
}}
"""
    bonus = "\n".join(f"        bonus(@{o}) = {np.round(rng.uniform(-1, 2), 2)};" for o in objs)
    inst = f"""instance rnd{seed}_inst {{
    domain = rnd{seed};
    objects {{ obj_t : {{ {", ".join(objs)} }}; }};
    non-fluents {{
{bonus}
    }};
    init-state {{
        {bools[0]} = {"true" if rng.random() < 0.5 else "false"};
    }};
    horizon = {h};
    discount = {discount};
}}
"""
    return dom, inst


def random_model(seed, **kw):
    dom, inst = random_pair(seed, **kw)
    return ground(validate(parse_domain(dom), parse_instance(inst)))
