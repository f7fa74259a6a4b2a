"""Command-line front end: generate environments, train the learned policy,
evaluate and compare policies, export the rule base.

All commands are reproducible from their input files and seeds alone.
Exit codes: 0 success, 2 config error, 3 parse error, 4 infeasible config.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from .defuzz import ConsequentScale
from .engine import make_policy
from .fuzzy import fit_partitions
from .features import build_feature_matrix
from .implication import (NetworkShape, TrainConfig, init_weights,
                          load_checkpoint, save_checkpoint)
from .rules import RuleBase, render_rulebase
from .simulation import (decision_accuracy, ledger_to_jsonl, report_to_csv,
                         run_simulation, train_policy)
from .topology import (ConfigError, GeneratorConfig, TopologyParseError,
                       UnsatisfiableConfigError, generate_substrate,
                       generate_vnrs, read_substrate, read_vnr,
                       write_substrate, write_vnr)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_INFEASIBLE = 4

GENERATOR_KEYS = set(GeneratorConfig.__dataclass_fields__)
TRAIN_KEYS = set(TrainConfig.__dataclass_fields__)


def load_config(path: str | None, seed: int | None = None) -> dict:
    data: dict = {}
    if path:
        with open(path) as fh:
            data = json.load(fh)
        unknown = set(data) - GENERATOR_KEYS - TRAIN_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if seed is not None:
        data["seed"] = seed
    return data


def generator_config(data: dict) -> GeneratorConfig:
    kwargs = {k: v for k, v in data.items() if k in GENERATOR_KEYS}
    for key in ("node_resource_range", "link_resource_range",
                "vnr_nodes_range", "vnr_resource_range"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    cfg = GeneratorConfig(**kwargs)
    cfg.validate()
    return cfg


def train_config(data: dict, args) -> TrainConfig:
    kwargs = {k: v for k, v in data.items() if k in TRAIN_KEYS}
    if getattr(args, "iterations", None) is not None:
        kwargs["max_iterations"] = args.iterations
    if getattr(args, "lr", None) is not None:
        kwargs["learning_rate"] = args.lr
    if getattr(args, "seed", None) is not None:
        kwargs["seed"] = args.seed
    if getattr(args, "target_mode", None) is not None:
        kwargs["target_mode"] = args.target_mode
    cfg = TrainConfig(**kwargs)
    cfg.validate()
    return cfg


def _workload_paths(env_dir: str) -> list[str]:
    names = sorted(f for f in os.listdir(env_dir)
                   if f.startswith("vnr_") and f.endswith(".txt"))
    return [os.path.join(env_dir, f) for f in names]


def load_environment(env_dir: str):
    substrate = read_substrate(os.path.join(env_dir, "substrate.txt"))
    vnrs = [read_vnr(p) for p in _workload_paths(env_dir)]
    return substrate, vnrs


def _split(vnrs, which: str):
    half = len(vnrs) // 2
    if which == "train":
        return vnrs[:half]
    if which == "test":
        return vnrs[half:]
    return vnrs


def _build_policy(name: str, checkpoint: str | None, seed: int):
    if name == "dnfs":
        if checkpoint:
            network = load_checkpoint(checkpoint)
        else:
            network = init_weights(NetworkShape(), seed)
        return make_policy("dnfs", network=network, seed=seed)
    return make_policy(name)


def cmd_generate(args) -> int:
    cfg = generator_config(load_config(args.config, args.seed))
    os.makedirs(args.out, exist_ok=True)
    substrate = generate_substrate(cfg)
    vnrs = generate_vnrs(cfg)
    write_substrate(substrate, os.path.join(args.out, "substrate.txt"))
    width = max(4, len(str(max(len(vnrs) - 1, 0))))
    for vnr in vnrs:
        write_vnr(vnr, os.path.join(args.out, f"vnr_{vnr.vnr_id:0{width}d}.txt"))
    with open(os.path.join(args.out, "config.json"), "w") as fh:
        json.dump(asdict(cfg), fh, indent=2)
    print(f"substrate: {substrate.node_count} nodes, {len(substrate.links)} links, "
          f"{substrate.domain_count} domains")
    print(f"workload: {len(vnrs)} VNRs -> {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    data = load_config(args.config, args.seed)
    cfg = train_config(data, args)
    substrate, vnrs = load_environment(args.env)
    train_set = _split(vnrs, "train")
    network = init_weights(NetworkShape(), cfg.seed)
    policy = make_policy("dnfs", network=network, seed=cfg.seed)
    rulebase = RuleBase()
    curves = train_policy(substrate, train_set, policy, cfg, rulebase)

    os.makedirs(args.out, exist_ok=True)
    save_checkpoint(network, os.path.join(args.out, "checkpoint.json"))
    with open(os.path.join(args.out, "rules.json"), "w") as fh:
        fh.write(rulebase.to_json())
    with open(os.path.join(args.out, "training_curves.csv"), "w", newline="\n") as fh:
        fh.write("iteration,avg_revenue,revenue_cost_ratio,acceptance_rate\n")
        for c in curves:
            fh.write(f"{c.iteration},{c.avg_revenue},{c.revenue_cost},"
                     f"{c.acceptance}\n")
    last = curves[-1] if curves else None
    if last:
        print(f"trained {cfg.max_iterations} iterations on {len(train_set)} VNRs; "
              f"final acceptance {last.acceptance:.3f}, rules {len(rulebase)}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    substrate, vnrs = load_environment(args.env)
    subset = _split(vnrs, args.split)
    policy = _build_policy(args.policy, args.checkpoint, args.seed or 0)
    ledger, report = run_simulation(substrate.copy(), subset, policy,
                                    mode=args.mode)
    os.makedirs(args.out, exist_ok=True)
    report_to_csv(report, os.path.join(args.out, f"{args.policy}_timeseries.csv"))
    ledger_to_jsonl(ledger, os.path.join(args.out, f"{args.policy}_ledger.jsonl"))
    phi, psi, count = decision_accuracy(ledger, substrate.node_count)
    summary = {"policy": args.policy, "vnrs": len(subset),
               "accepted": ledger.accepted_count,
               "acceptance_rate": ledger.accepted_count / max(len(subset), 1),
               "phi": phi, "psi": psi, "scored_vnrs": count}
    with open(os.path.join(args.out, f"{args.policy}_summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_compare(args) -> int:
    substrate, vnrs = load_environment(args.env)
    subset = _split(vnrs, args.split)
    policies = args.policies.split(",")
    os.makedirs(args.out, exist_ok=True)

    reports, accuracy = {}, {}
    for name in sorted(policies):
        policy = _build_policy(name, args.checkpoint if name == "dnfs" else None,
                               args.seed or 0)
        ledger, report = run_simulation(substrate.copy(), subset, policy)
        reports[name] = report
        phi, psi, _ = decision_accuracy(ledger, substrate.node_count)
        accuracy[name] = {"phi": phi, "psi": psi}
    accuracy["cdrl"] = None  # baseline not implemented; column marked absent

    names = sorted(reports)
    times = reports[names[0]].times
    header = ["t"]
    for name in names:
        header += [f"{name}_avg_revenue", f"{name}_revenue_cost_ratio",
                   f"{name}_acceptance_rate"]
    lines = [",".join(header)]
    for i, t in enumerate(times):
        row = [str(t)]
        for name in names:
            r = reports[name]
            row += [str(r.avg_revenue[i]), str(r.revenue_cost[i]),
                    str(r.acceptance[i])]
        lines.append(",".join(row))
    with open(os.path.join(args.out, "compare.csv"), "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(os.path.join(args.out, "accuracy.json"), "w") as fh:
        json.dump(accuracy, fh, indent=2)
    print(f"compared {', '.join(names)} over {len(subset)} VNRs -> {args.out}")
    return EXIT_OK


def cmd_rules(args) -> int:
    with open(args.rules) as fh:
        text = fh.read()
    rb = RuleBase.from_json(text)
    rendered = render_rulebase(rb)
    print(rendered)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "rules.txt"), "w", newline="\n") as fh:
            fh.write(rendered + "\n")
        with open(os.path.join(args.out, "rules.json"), "w") as fh:
            fh.write(rb.to_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vnesim",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a substrate and VNR workload")
    g.add_argument("--config", help="JSON config file")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train the learned policy on the first half")
    t.add_argument("--env", required=True)
    t.add_argument("--config", help="JSON config file")
    t.add_argument("--seed", type=int)
    t.add_argument("--iterations", type=int)
    t.add_argument("--lr", type=float)
    t.add_argument("--target-mode", choices=["literal-eq20", "one-hot"],
                   default="one-hot",
                   help="training target (default one-hot; the literal mode "
                        "sits at a stationary point and does not learn)")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="run one policy and export metrics")
    e.add_argument("--env", required=True)
    e.add_argument("--checkpoint")
    e.add_argument("--policy", choices=["dnfs", "noderank", "nrm"],
                   required=True)
    e.add_argument("--mode", choices=["train", "eval"], default="eval")
    e.add_argument("--split", choices=["all", "train", "test"], default="all")
    e.add_argument("--seed", type=int)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_evaluate)

    c = sub.add_parser("compare", help="run several policies on one workload")
    c.add_argument("--env", required=True)
    c.add_argument("--checkpoint")
    c.add_argument("--policies", default="dnfs,noderank,nrm")
    c.add_argument("--split", choices=["all", "train", "test"], default="all")
    c.add_argument("--seed", type=int)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_compare)

    r = sub.add_parser("rules", help="render a rule dump as readable text")
    r.add_argument("--rules", required=True, help="rules.json from training")
    r.add_argument("--out")
    r.set_defaults(func=cmd_rules)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnsatisfiableConfigError as exc:
        print(f"infeasible config: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TopologyParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
