"""Command-line front end.

Exit codes: 0 success, 1 internal error, 2 input or validation error,
3 resource cap exceeded, 4 file I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import grounding, librarian, planner, simulator
from .errors import (ConfigError, EvaluationError, GroundingError, LangError,
                     PolicyError, ResourceCapError)
from .lang import parse_domain, parse_instance, validate

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_CAP, EXIT_IO = 0, 1, 2, 3, 4


class _InputError(Exception):
    pass


def _read(path):
    return Path(path).read_text(encoding="utf-8")


def _write(out_dir, name, text):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8")


def _checked(args):
    dom = parse_domain(_read(args.domain))
    inst = parse_instance(_read(args.instance))
    horizon = getattr(args, "horizon", None)
    if horizon is not None:
        inst = dataclasses.replace(inst, horizon=horizon)
    return validate(dom, inst)


def _model(args):
    return grounding.ground(_checked(args), args.action_cap)


def _need_seed(args):
    if args.seed is None:
        raise _InputError("this command is randomized; pass an explicit --seed")


def cmd_validate(args):
    _checked(args)
    return EXIT_OK


def cmd_ground(args):
    model = _model(args)
    _write(args.out, "ground.json", grounding.dump_json(model, args.state_cap))
    print(f"ground: {len(model.state_fluents)} state fluents, {model.n_actions} "
          f"actions, {model.n_states} states")
    return EXIT_OK


def cmd_plan(args):
    model = _model(args)
    if args.planner == "vi":
        values, policy = planner.value_iteration(model, state_cap=args.state_cap)
        trace = planner.extract_plan(model, policy)
        _write(args.out, "policy.json", policy.to_json(model))
        _write(args.out, "values.json", values.to_json(model))
    else:
        _need_seed(args)
        actor = planner.SamplingActor(args.budget)
        trace = planner.extract_plan(model, actor, seed=args.seed)
    _write(args.out, "plan.jsonl", trace.to_jsonl(model))
    _write(args.out, "plan.txt", trace.to_text())
    print(f"plan: {len(trace.steps)} steps, return {trace.total_return:.6f}")
    return EXIT_OK


def cmd_simulate(args):
    _need_seed(args)
    model = _model(args)
    if args.policy == "vi":
        _, actor = planner.value_iteration(model, state_cap=args.state_cap)
    elif args.policy == "sample":
        actor = planner.SamplingActor(args.budget)
    else:
        actor = planner.RandomActor()
    batch = simulator.evaluate_policy(model, actor, args.episodes, args.seed,
                                      threads=args.threads)
    _write(args.out, "report.json", batch.to_json())
    _write(args.out, "report.csv", batch.to_csv())
    _write(args.out, "traces.jsonl", simulator.write_traces_jsonl(model, batch))
    print(batch.summary())
    return EXIT_OK


def cmd_oracle(args):
    model = _model(args)
    v = planner.expectimax_oracle(model, node_cap=args.node_cap, memo=args.memo)
    print(repr(v))
    return EXIT_OK


def cmd_gen_librarian(args):
    cfg = librarian.load_config(args.config) if args.config else librarian.LibrarianConfig()
    dom, inst = librarian.build_librarian(cfg)
    _write(args.out, f"{librarian.DOMAIN_NAME}.xrddl", dom)
    _write(args.out, f"{cfg.instance_name}.xrddl", inst)
    print(f"wrote {librarian.DOMAIN_NAME}.xrddl and {cfg.instance_name}.xrddl to {args.out}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="prefplan", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def model_args(sp, out=False):
        sp.add_argument("--domain", required=True)
        sp.add_argument("--instance", required=True)
        sp.add_argument("--action-cap", type=int, default=grounding.DEFAULT_ACTION_CAP)
        if out:
            sp.add_argument("--out", required=True)

    sp = sub.add_parser("validate", help="parse and check a domain/instance pair")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--instance", required=True)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("ground", help="write a JSON dump of the ground model")
    model_args(sp, out=True)
    sp.add_argument("--state-cap", type=int, default=2000)
    sp.set_defaults(func=cmd_ground)

    sp = sub.add_parser("plan", help="solve and write the extracted plan")
    model_args(sp, out=True)
    sp.add_argument("--planner", choices=("vi", "sample"), default="vi")
    sp.add_argument("--budget", type=int, default=1000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--state-cap", type=int, default=planner.DEFAULT_STATE_CAP)
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("simulate", help="run seeded episodes and report statistics")
    model_args(sp, out=True)
    sp.add_argument("--policy", choices=("vi", "sample", "random"), default="vi")
    sp.add_argument("--episodes", type=int, default=1000)
    sp.add_argument("--budget", type=int, default=1000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--state-cap", type=int, default=planner.DEFAULT_STATE_CAP)
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("oracle", help="exact optimal value by expectimax")
    model_args(sp)
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--node-cap", type=int, default=planner.DEFAULT_NODE_CAP)
    sp.add_argument("--memo", action="store_true")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("gen-librarian", help="emit the librarian domain and instance")
    sp.add_argument("--config")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_librarian)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LangError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return EXIT_INPUT
    except (GroundingError, EvaluationError, ConfigError, _InputError) as exc:
        msg = str(exc)
        print(msg if msg.startswith("error[") else f"error[E-INPUT]: {msg}",
              file=sys.stderr)
        return EXIT_INPUT
    except ResourceCapError as exc:
        print(f"error[E-CAP]: {exc}", file=sys.stderr)
        return EXIT_CAP
    except OSError as exc:
        print(f"error[E-IO]: {exc}", file=sys.stderr)
        return EXIT_IO
    except PolicyError as exc:
        print(f"error[E-POLICY]: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
