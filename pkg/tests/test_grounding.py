import itertools
import math

import numpy as np
import pytest
from scipy import stats

from prefplan import grounding
from prefplan.attributes import ATTRIBUTES
from prefplan.errors import EvaluationError, ResourceCapError
from prefplan.grounding import ground, reward_of, sample_next, transition_distribution
from prefplan.lang import ast, parse_domain, parse_instance, validate
from prefplan.librarian import LibrarianConfig, ground_action_count, librarian_models, load_librarian
from prefplan.preference import PreferenceProfile

import randmodels

COIN = """
domain coin {
    types { c_t : {@a, @b, @c}; };
    pvariables {
        f : { state-fluent, bool, default = false };
        g : { state-fluent, c_t, default = @a };
        r : { non-fluent, real, default = 0.0 };
        go : { action-fluent, bool, default = false };
    };
    cpfs {
        f' = FBODY;
        g' = g;
    };
    reward = REWARD;
}
"""


def coin(fbody="Bernoulli(0.5)", reward="0", inst="horizon = 2;"):
    dom = parse_domain(COIN.replace("FBODY", fbody).replace("REWARD", reward))
    return ground(validate(dom, parse_instance(f"instance ci {{ domain = coin; {inst} }}")))


@pytest.fixture(scope="module")
def lib():
    return load_librarian(LibrarianConfig())


def count_by_expansion(domain, instance):
    """Independent oracle: size of every action template's binding set."""
    sizes = {e.name: len(e.values) for e in domain.enum_decls}
    sizes.update({t: len(objs) for t, objs in instance.objects})
    return 1 + sum(math.prod(sizes[p] for p in f.params)
                   for f in domain.fluents_of_kind(ast.ACTION))


def test_action_count_matches_expansion_oracle(lib):
    cfg = LibrarianConfig()
    dom, inst = librarian_models(cfg)
    expected = count_by_expansion(dom, inst)
    assert expected == 28
    assert lib.n_actions == expected == ground_action_count(cfg)
    assert grounding.count_ground_actions(dom, validate(dom, inst).types) == expected


def test_action_count_other_location_counts():
    for n in (2, 4, 5):
        locs = ("start_location", "book_location", "visitor") + tuple(f"x{i}" for i in range(n - 3))
        cfg = LibrarianConfig(locations=locs[:max(n, 3)])
        dom, inst = librarian_models(cfg)
        assert load_librarian(cfg).n_actions == count_by_expansion(dom, inst)


def test_ground_actions_are_distinct(lib):
    names = [str(a) for a in lib.actions]
    assert len(set(names)) == len(names)
    assert names[0] == "noop"
    assert [a.index for a in lib.actions] == list(range(lib.n_actions))


def test_preference_partition(lib):
    prefs = set(lib.preference_fluents)
    assert prefs == {"E_r", "E_dl", "E_d", "E_s"}
    robot = [f.label for f in lib.state_fluents if f.label not in prefs]
    assert "loc" in robot and not any(r.startswith("E_") for r in robot)
    assert math.prod(len(f.values) for f in lib.state_fluents if f.label in prefs) == 16


def test_zero_action_templates_only_noop():
    dom = parse_domain("""domain z { pvariables { f : { state-fluent, bool, default = false }; };
        cpfs { f' = f; }; reward = 0; }""")
    g = ground(validate(dom, parse_instance("instance zi { domain = z; }")))
    assert [str(a) for a in g.actions] == ["noop"]


def test_deterministic_single_successor():
    m = coin("KronDelta(~f)")
    assert transition_distribution(m, m.initial_state, 0) == [((1, 0), 1.0)]
    m = coin("Bernoulli(1.0)")
    assert transition_distribution(m, m.initial_state, 0) == [((1, 0), 1.0)]


def test_bernoulli_half_two_successors():
    m = coin()
    dist = transition_distribution(m, m.initial_state, 0)
    assert sorted(dist) == [((0, 0), 0.5), ((1, 0), 0.5)]


def test_zero_probability_pruned():
    m = coin("Bernoulli(0.0)")
    assert transition_distribution(m, m.initial_state, 0) == [((0, 0), 1.0)]


def drift_oracle(profile, current):
    """Brute-force product of per-fluent drift laws for one noop step."""
    per = []
    for attr in ATTRIBUTES:
        cur = current[attr.fluent]
        per.append([(v, profile.persistence * (v == cur)
                     + (1 - profile.persistence) * profile.value_probability(attr, v))
                    for v in attr.values])
    return {tuple(v for v, _ in combo): math.prod(p for _, p in combo)
            for combo in itertools.product(*per)}


def test_sixteen_successor_convolution(lib):
    s = lib.initial_state
    current = {a.fluent: lib.value(s, a.fluent) for a in ATTRIBUTES}
    want = drift_oracle(PreferenceProfile(), current)
    got = {}
    for s2, p in transition_distribution(lib, s, 0):
        key = tuple(lib.value(s2, a.fluent) for a in ATTRIBUTES)
        got[key] = got.get(key, 0.0) + p
    assert len(got) == 16
    for k, p in want.items():
        assert got[k] == pytest.approx(p, abs=1e-12)
    # every factor is a persistence-weighted mix of {0.9, 0.1}
    assert max(got.values()) == pytest.approx(math.prod(
        0.9 + 0.1 * PreferenceProfile().value_probability(a, current[a.fluent])
        for a in ATTRIBUTES))


def test_normalization_librarian_all_pairs(lib):
    for s in grounding.reachable_states(lib):
        for a in lib.applicable(s):
            probs = [p for _, p in transition_distribution(lib, s, a)]
            assert min(probs) >= 0.0
            assert abs(math.fsum(probs) - 1.0) <= 1e-9


def test_sample_frequency_bernoulli_half():
    m = coin()
    rng = np.random.default_rng(12345)
    hits = sum(sample_next(m, m.initial_state, 0, rng)[0][0] for _ in range(10 ** 5))
    assert abs(hits / 10 ** 5 - 0.5) <= 0.01


def test_sample_chi_square(lib):
    s = lib.initial_state
    dist = transition_distribution(lib, s, 0)
    index = {s2: k for k, (s2, _) in enumerate(dist)}
    counts = np.zeros(len(dist))
    rng = np.random.default_rng(2024)
    for _ in range(10 ** 5):
        counts[index[lib.sample(s, 0, rng)]] += 1
    expected = np.array([p for _, p in dist]) * 10 ** 5
    assert stats.chisquare(counts, expected).pvalue > 0.001


def test_sampling_deterministic_for_seed(lib):
    def trace(seed):
        rng = np.random.default_rng(seed)
        s, out = lib.initial_state, []
        for _ in range(20):
            s, r = sample_next(lib, s, 0, rng)
            out.append((s, r))
        return out
    assert trace(5) == trace(5)
    m = coin("KronDelta(~f)")
    assert {sample_next(m, m.initial_state, 0, np.random.default_rng(k))[0]
            for k in range(10)} == {(1, 0)}


def test_reward_literal_zero():
    m = coin()
    assert all(reward_of(m, (f, g), a) == 0.0 for f in (0, 1) for g in (0, 1, 2)
               for a in range(m.n_actions))


def _late_at_visitor(lib, **prefs):
    return lib.make_state(loc="visitor", late=True, holding_book=True, **prefs)


def test_librarian_reward_single_match(lib):
    s = _late_at_visitor(lib, E_r="textual", E_dl="poor", E_d="long", E_s="global")
    a = lib.find_action("explain", "textual", "rich", "short", "local")
    # one matching attribute, minus the step cost before delivery
    assert reward_of(lib, s, a) == pytest.approx(1.0 - 0.1)


def test_librarian_reward_full_match(lib):
    s = _late_at_visitor(lib, E_r="textual", E_dl="poor", E_d="long", E_s="global")
    a = lib.find_action("explain", "textual", "poor", "long", "global")
    assert reward_of(lib, s, a) == pytest.approx(4.0 - 0.1)
    assert reward_of(lib, s, lib.find_action("hand_over")) == pytest.approx(10.0 - 0.1)


def test_explain_gated_on_late(lib):
    s = lib.make_state(loc="visitor", holding_book=True)
    names = {lib.actions[a].name for a in lib.applicable(s)}
    assert "explain" not in names and "hand_over" in names
    names = {lib.actions[a].name for a in lib.applicable(_late_at_visitor(lib))}
    assert "explain" in names


def test_state_index_round_trip(lib):
    for k in (0, 1, 77, lib.n_states - 1):
        assert lib.state_index(lib.state_from_index(k)) == k


def test_action_cap():
    dom, inst = librarian_models(LibrarianConfig())
    with pytest.raises(ResourceCapError) as info:
        ground(validate(dom, inst), action_cap=10)
    assert info.value.count == 28


def test_division_by_zero_reported():
    m = coin(reward="1 / r")
    with pytest.raises(EvaluationError):
        reward_of(m, m.initial_state, 0)


@pytest.mark.parametrize("seed", range(10))
def test_random_models_normalized(seed):
    m = randmodels.random_model(seed)
    for s in grounding.reachable_states(m):
        for a in m.applicable(s):
            probs = [p for _, p in transition_distribution(m, s, a)]
            assert min(probs) >= 0.0 and abs(math.fsum(probs) - 1.0) <= 1e-9


def test_dump_json_lists_everything():
    import json
    m = coin()
    doc = json.loads(grounding.dump_json(m))
    assert [a["action"] for a in doc["actions"]] == ["noop", "go"]
    kinds = sorted(f["kind"] for f in doc["fluents"])
    assert kinds == ["action", "non-fluent", "robot-state", "robot-state"]
    assert all(abs(sum(p for _, p in t["successors"]) - 1) < 1e-12 for t in doc["transitions"])
