import json
import subprocess
import sys

import pytest

from prefplan.cli import main
from prefplan.librarian import config_to_dict, late_arrival_config


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def pair(tmp_path, capsys):
    code, _, _ = run(capsys, "gen-librarian", "--out", tmp_path / "lib")
    assert code == 0
    return tmp_path / "lib" / "librarian.xrddl", tmp_path / "lib" / "librarian_inst.xrddl"


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def gen(capsys, tmp_path, doc, sub):
    cfg = write_config(tmp_path, doc, f"{sub}.json")
    assert run(capsys, "gen-librarian", "--config", cfg, "--out", tmp_path / sub)[0] == 0
    return tmp_path / sub / "librarian.xrddl", tmp_path / sub / "librarian_inst.xrddl"


def test_gen_then_validate_silent(pair, capsys):
    dom, inst = pair
    assert run(capsys, "validate", "--domain", dom, "--instance", inst) == (0, "", "")


def test_missing_cpf(pair, capsys, tmp_path):
    dom, inst = pair
    text = dom.read_text()
    start = text.index("        delivered' =")
    end = text.index(";", start) + 2
    bad = tmp_path / "bad.xrddl"
    bad.write_text(text[:start] + text[end:])
    code, out, err = run(capsys, "validate", "--domain", bad, "--instance", inst)
    assert code == 2 and out == ""
    lines = err.splitlines()
    assert len(lines) == 1 and lines[0].startswith("error[E-CPF]: ")


def test_discrete_sum_reported(pair, capsys, tmp_path):
    dom, inst = pair
    bad = tmp_path / "bad.xrddl"
    bad.write_text(dom.read_text().replace(
        "E_r' = if (E_r == @textual)",
        "E_r' = if (false) then Discrete(representation_t, @textual : 0.6, @visual : 0.5)"
        " else if (E_r == @textual)"))
    code, _, err = run(capsys, "validate", "--domain", bad, "--instance", inst)
    assert code == 2
    assert err.startswith("error[E-NORM]: ") and "E_r" in err


def test_missing_file_distinct_code(pair, capsys, tmp_path):
    _, inst = pair
    code, _, err = run(capsys, "validate", "--domain", tmp_path / "nope.xrddl", "--instance", inst)
    assert code == 4 and err.startswith("error[E-IO]")


def test_plan_vi_outputs(pair, capsys, tmp_path):
    dom, inst = pair
    code, out, _ = run(capsys, "plan", "--domain", dom, "--instance", inst, "--out", tmp_path / "p")
    assert code == 0 and out.startswith("plan: 8 steps, return 13.5")
    for f in ("plan.jsonl", "plan.txt", "policy.json", "values.json"):
        assert (tmp_path / "p" / f).exists()


def test_plan_late_arrival_text(capsys, tmp_path):
    dom, inst = gen(capsys, tmp_path, config_to_dict(late_arrival_config()), "late")
    assert run(capsys, "plan", "--domain", dom, "--instance", inst, "--out", tmp_path / "p")[0] == 0
    actions = [ln for ln in (tmp_path / "p" / "plan.txt").read_text().splitlines()
               if ln.startswith("t=")]
    assert actions[3].endswith("explain(visual, poor, long, global)")
    assert actions[4].endswith("hand_over")


def test_plan_horizon_zero(pair, capsys, tmp_path):
    dom, inst = pair
    code, out, _ = run(capsys, "plan", "--domain", dom, "--instance", inst,
                       "--horizon", 0, "--out", tmp_path / "p")
    assert code == 0 and "0 steps, return 0.000000" in out
    assert len((tmp_path / "p" / "plan.jsonl").read_text().splitlines()) == 1


def test_plan_sample_repeatable(pair, capsys, tmp_path):
    dom, inst = pair
    outs = []
    for k in range(2):
        d = tmp_path / f"s{k}"
        assert run(capsys, "plan", "--domain", dom, "--instance", inst, "--planner", "sample",
                   "--budget", 10000, "--seed", 7, "--out", d)[0] == 0
        outs.append([(d / f).read_bytes() for f in ("plan.jsonl", "plan.txt")])
    assert outs[0] == outs[1]


@pytest.mark.parametrize("cmd", [["plan", "--planner", "sample"], ["simulate"]])
def test_seed_required(pair, capsys, tmp_path, cmd):
    dom, inst = pair
    code, _, err = run(capsys, *cmd, "--domain", dom, "--instance", inst, "--out", tmp_path / "x")
    assert code == 2 and "--seed" in err


def test_simulate_outputs(pair, capsys, tmp_path):
    dom, inst = pair
    code, out, _ = run(capsys, "simulate", "--domain", dom, "--instance", inst,
                       "--episodes", 50, "--seed", 1, "--policy", "random", "--out", tmp_path / "r")
    assert code == 0 and out.startswith("episodes=50 ") and out.count("\n") == 1
    doc = json.loads((tmp_path / "r" / "report.json").read_text())
    assert doc["episodes"] == 50
    assert len((tmp_path / "r" / "traces.jsonl").read_text().splitlines()) == 50


def test_caps_exit_three(pair, capsys, tmp_path):
    dom, inst = pair
    code, _, err = run(capsys, "oracle", "--domain", dom, "--instance", inst, "--node-cap", 100)
    assert code == 3 and "exceeds cap 100" in err
    code, _, _ = run(capsys, "plan", "--domain", dom, "--instance", inst,
                     "--state-cap", 10, "--out", tmp_path / "p")
    assert code == 3
    code, _, _ = run(capsys, "ground", "--domain", dom, "--instance", inst,
                     "--action-cap", 5, "--out", tmp_path / "g")
    assert code == 3


def test_oracle_value(pair, capsys):
    dom, inst = pair
    code, out, _ = run(capsys, "oracle", "--domain", dom, "--instance", inst,
                       "--horizon", 3, "--memo")
    assert code == 0 and float(out) == pytest.approx(-0.3)


def test_ground_dump(pair, capsys, tmp_path):
    dom, inst = pair
    code, out, _ = run(capsys, "ground", "--domain", dom, "--instance", inst, "--out", tmp_path / "g")
    assert code == 0 and "28 actions" in out
    doc = json.loads((tmp_path / "g" / "ground.json").read_text())
    assert len(doc["actions"]) == 28


def test_bad_config_exit_two(capsys, tmp_path):
    cfg = write_config(tmp_path, {"deadline": "soon"})
    code, _, err = run(capsys, "gen-librarian", "--config", cfg, "--out", tmp_path / "o")
    assert code == 2 and "deadline" in err
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    assert run(capsys, "gen-librarian", "--config", bad, "--out", tmp_path / "o")[0] == 2


def test_late_gate_closed_config(capsys, tmp_path):
    dom, inst = gen(capsys, tmp_path, {"deadline": 9, "horizon": 8}, "closed")
    assert run(capsys, "plan", "--domain", dom, "--instance", inst, "--out", tmp_path / "p")[0] == 0
    assert "explain" not in (tmp_path / "p" / "plan.txt").read_text()


def test_nonfluent_config_keeps_domain(pair, capsys, tmp_path):
    dom0, inst0 = pair
    dom1, inst1 = gen(capsys, tmp_path, {"rewards": {"step_cost": 0.5},
                                         "profile": {"p_rich": 0.9}}, "tuned")
    assert dom0.read_bytes() == dom1.read_bytes()
    assert inst0.read_bytes() != inst1.read_bytes()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "prefplan", "gen-librarian", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and (tmp_path / "librarian.xrddl").exists()
