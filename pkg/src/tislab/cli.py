"""Command-line entry point.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime
failure (infeasible network, degenerate population, plotting), 3 file
input/output failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys

from .agent import Agent, expected_ability
from .config import PRESETS, preset, read_config, serialize_config
from .errors import ConfigError, ParameterError, StorageError, TislabError
from .metrics import MetricsReport, score_run
from .network import generate_network
from .oracle import max_info_path, min_info_complete_path, optimal_planning_path
from .policies import PolicyKind, Trajectory, run_policy
from .rng import derive_seed

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _load_config(args):
    cfg = read_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    if getattr(args, "out", None):
        cfg = cfg.with_output(args.out)
    if getattr(args, "format", None):
        cfg = dataclasses.replace(cfg, output=dataclasses.replace(cfg.output, formats=(args.format,)))
    return cfg


def _run(cfg, out):
    from .experiment import run_experiment

    bundle = run_experiment(cfg)
    print(f"wrote {cfg.output.directory}", file=out)
    print(json.dumps(bundle.summary, sort_keys=True), file=out)
    return EXIT_OK


def cmd_simulate(args, out):
    cfg = _load_config(args)
    if args.policy:
        text = args.policy
        if args.policy == "planner":
            if args.horizon is None:
                raise ConfigError("policy.variants", "--policy planner needs --horizon")
            text = f"planner:{args.horizon}:{args.replan or 1}"
        elif args.horizon is not None or args.replan is not None:
            raise ConfigError("policy.variants", "--horizon and --replan apply to the planner only")
        PolicyKind.parse(text)
        cfg = dataclasses.replace(cfg, policy=dataclasses.replace(cfg.policy, variants=(text,)))
    return _run(cfg, out)


def cmd_evolve(args, out):
    cfg = _load_config(args)
    if cfg.evolution is None:
        raise ConfigError("evolution", "missing required section for evolve")
    return _run(dataclasses.replace(cfg, mode="evolution"), out)


def cmd_preset(args, out):
    cfg = preset(args.name)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.out:
        cfg = cfg.with_output(args.out)
    if args.format:
        cfg = dataclasses.replace(cfg, output=dataclasses.replace(cfg.output, formats=(args.format,)))
    if not args.run:
        out.write(serialize_config(cfg))
        return EXIT_OK
    return _run(cfg, out)


def _network_arg(args):
    from .experiment import load_network

    if args.network:
        return load_network(args.network)
    if args.config:
        cfg = _load_config(args)
        return generate_network(cfg.network, derive_seed(cfg.seed, "network", 0))
    raise ConfigError("network", "pass --network FILE or --config FILE")


def cmd_oracle(args, out):
    net = _network_arg(args)
    results = {"max_info": max_info_path(net), "complexity": min_info_complete_path(net),
               "optimal": optimal_planning_path(net)}
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["oracle", "path", "total_info", "normalized_info", "complete"])
        for name, res in results.items():
            w.writerow([name, " ".join(map(str, res.path)), repr(res.total_info),
                        repr(res.normalized_info), int(res.complete)])
    else:
        json.dump({k: v.to_dict() for k, v in results.items()}, out, indent=1, sort_keys=True)
        out.write("\n")
    return EXIT_OK


def _read_trajectories(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise StorageError(path, f"cannot read trajectories: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("trajectory", f"{path}: not JSON ({exc})") from None
    if isinstance(data, dict) and "trajectories" in data:
        data = data["trajectories"]
    if isinstance(data, dict):
        data = [data]
    try:
        return [(d.get("seed", 0), Trajectory.from_dict(d)) for d in data]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("trajectory", f"{path}: malformed trajectory ({exc})") from None


def cmd_metrics(args, out):
    from .experiment import load_network

    net = load_network(args.network)
    agent, alpha, beta, budget = Agent(), 0.5, 0.5, 1000
    if args.config:
        cfg = read_config(args.config)
        agent, alpha, beta = cfg.agent, cfg.metrics.alpha, cfg.metrics.beta
        budget = cfg.policy.step_budget
    q = expected_ability(agent, net.feature_vector)
    reports = []
    for seed, traj in _read_trajectories(args.trajectory):
        for v in traj.visits:
            if not 0 <= v.node < len(net.nodes):
                raise ConfigError("trajectory", f"node {v.node} is not in the network")
        opt_traj = run_policy(net, agent, PolicyKind.oracle(), seed, budget)
        reports.append(score_run(net, traj, opt_traj, q, alpha=alpha, beta=beta))
    if args.format == "json":
        json.dump([r.to_dict() for r in reports], out, indent=1, sort_keys=True)
        out.write("\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(MetricsReport.columns())
        for r in reports:
            w.writerow(r.csv_row())
    return EXIT_OK


def cmd_plot(args, out):
    from .experiment import load_bundle
    from .plotting import emit_plot

    svg = emit_plot(load_bundle(args.bundle), args.kind)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(svg)
        except OSError as exc:
            raise StorageError(args.out, f"cannot write: {exc.strerror}") from None
    else:
        out.write(svg)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="tislab", description="Goal-network intelligence simulations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, metavar="PATH")
        sp.add_argument("--seed", type=int, metavar="N", help="overrides the config seed")
        sp.add_argument("--out", metavar="DIR")
        sp.add_argument("--format", choices=("csv", "json"))

    sp = sub.add_parser("simulate", help="run an experiment config")
    common(sp)
    sp.add_argument("--policy", choices=("random", "greedy", "planner", "oracle"),
                    help="run this single policy instead of the configured ones")
    sp.add_argument("--horizon", type=int, metavar="H")
    sp.add_argument("--replan", type=int, metavar="P")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("evolve", help="run the evolution section of a config")
    common(sp)
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("preset", help="print a preset config, or run it with --run")
    sp.add_argument("name", help=f"one of: {', '.join(PRESETS)}")
    sp.add_argument("--run", action="store_true")
    sp.add_argument("--seed", type=int, metavar="N")
    sp.add_argument("--out", metavar="DIR")
    sp.add_argument("--format", choices=("csv", "json"))
    sp.set_defaults(func=cmd_preset)

    sp = sub.add_parser("oracle", help="optimal paths of a network, as JSON or CSV")
    sp.add_argument("--network", metavar="FILE")
    common(sp, config_required=False)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("metrics", help="score trajectories from a JSON file")
    sp.add_argument("--network", required=True, metavar="FILE")
    sp.add_argument("--trajectory", required=True, metavar="FILE")
    sp.add_argument("--config", metavar="PATH", help="agent and alpha/beta to score with")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("plot", help="render a plot from a bundle as SVG")
    sp.add_argument("--bundle", required=True, metavar="PATH")
    sp.add_argument("--kind", required=True, choices=("fig1b", "fig4", "fig5", "proxy", "evolution"))
    sp.add_argument("--out", metavar="FILE")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except StorageError as exc:
        print(f"tislab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ParameterError) as exc:
        print(f"tislab: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except TislabError as exc:
        print(f"tislab: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"tislab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
