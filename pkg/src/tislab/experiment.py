"""Config-driven experiment runs and their on-disk bundle.

:func:`run_experiment` does all computation first, then a single writer
lays the bundle out in the output directory.  Tables are plain column
lists plus rows, written as CSV with ``repr`` floats so that identical
configs give byte-identical files.

Output files (per mode):

``runs.csv``
    one row per (replicate, size, scenario, policy) run with every index
``steps.csv``
    one row per visited node (trajectories mode)
``sweep_summary.csv``
    mean intelligence with bootstrap intervals per size and policy (sweep mode)
``proxy_sweep.csv``, ``proxy_h_sweep.csv``
    proxy-modified intelligence over proxy strength and over ``h`` (proxy-sweep mode)
``evolution.csv``
    one row per generation (evolution mode)
``bundle.json``
    config, tables, trajectories, oracle results and a summary
``provenance.json``
    seed, package version and wall-clock timestamp (the only non-deterministic file)
"""
from __future__ import annotations

import csv
import dataclasses
import datetime
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .agent import expected_ability
from .config import ExperimentConfig, parse_config, serialize_config
from .errors import InfeasibleError, ParameterError, StorageError
from .evolution import run_evolution
from .metrics import MetricsReport, prefix_series, score_run
from .network import generate_network, parse_network, serialize_network, validate_network
from .oracle import max_info_path, min_info_complete_path, optimal_planning_path
from .policies import PolicyKind, run_policy
from .proxy import ProxyModel, break_even_h, break_even_points, net_effect_ratio
from .proxy import sweep as proxy_sweep_rows
from .rng import derive_seed, substream

RUN_COLUMNS = ["replicate", "size", "scenario", "policy", "seed", "stop_reason", "steps",
               *MetricsReport.columns()]
STEP_COLUMNS = ["replicate", "size", "scenario", "policy", "step", "node", "u_realized", "u_hat", "r",
                "t_elapsed", "time_cum", "x_cum", "solving_u_r_prefix", "planning_a_global_raw_prefix"]
SWEEP_COLUMNS = ["size", "scenario", "policy", "n", "mean_intelligence", "ci_low", "ci_high",
                 "mean_diff_vs_first", "diff_ci_low", "diff_ci_high"]
PROXY_COLUMNS = ["strength_p", "intelligence_boosted", "intelligence_hat", "intelligence_hat_proxy",
                 "difference", "net_effect_ratio"]
PROXY_H_COLUMNS = ["h_coeff", "strength_p", "intelligence_hat_proxy", "difference"]

BOOTSTRAP_RESAMPLES = 2000


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)

    def column(self, name):
        j = self.columns.index(name)
        return [row[j] for row in self.rows]

    def records(self):
        return [dict(zip(self.columns, row)) for row in self.rows]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(x) for x in row])
        return buf.getvalue()


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


@dataclass
class RunBundle:
    config: ExperimentConfig
    tables: dict = field(default_factory=dict)
    trajectories: list = field(default_factory=list)
    oracles: list = field(default_factory=list)
    networks: list = field(default_factory=list)  # (label, GoalNetwork)
    summary: dict = field(default_factory=dict)
    evolution: object = None
    provenance: dict = field(default_factory=dict)

    def to_dict(self):
        """Everything but provenance, in a JSON-ready form."""
        return {
            "config": serialize_config(self.config),
            "tables": {k: {"columns": t.columns, "rows": [[_json_value(x) for x in r] for r in t.rows]}
                       for k, t in self.tables.items()},
            "trajectories": self.trajectories,
            "oracles": self.oracles,
            "summary": self.summary,
        }

    @classmethod
    def from_dict(cls, d):
        tables = {k: Table(list(t["columns"]), [list(r) for r in t["rows"]])
                  for k, t in d.get("tables", {}).items()}
        return cls(parse_config(d["config"]), tables, d.get("trajectories", []), d.get("oracles", []),
                   summary=d.get("summary", {}))


def _json_value(x):
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def load_bundle(path):
    """Read ``bundle.json`` (or a directory holding one)."""
    if os.path.isdir(path):
        path = os.path.join(path, "bundle.json")
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise StorageError(path, f"cannot read bundle: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise StorageError(path, f"not a bundle: {exc}") from None
    return RunBundle.from_dict(data)


# -- computation ------------------------------------------------------------

def load_network(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise StorageError(path, f"cannot read network: {exc.strerror}") from None
    try:
        net = parse_network(text)
    except (ValueError, TypeError) as exc:
        raise ParameterError("network.file", f"{path}: {exc}") from None
    report = validate_network(net)
    if not report.ok:
        raise ParameterError("network.file", f"{path}: invalid network ({', '.join(report.rules)})")
    return net


def _network_for(config, size, replicate):
    if config.network_file is not None:
        net = load_network(config.network_file)
    else:
        params = config.network if size is None else dataclasses.replace(config.network, nodes=size)
        key = ("network", replicate) if size is None else ("network", size, replicate)
        net = generate_network(params, derive_seed(config.seed, *key))
    if config.metrics.w is not None:
        net = net.with_threshold(config.metrics.w)
    return net


def _oracles(net):
    complexity = min_info_complete_path(net)
    optimal = optimal_planning_path(net)
    return {"max_info": max_info_path(net), "complexity": complexity, "optimal": optimal}


def _run_network(config, net, size, replicate, bundle, keep_steps):
    """Every scenario and policy on one network; appends rows to ``bundle``."""
    orc = _oracles(net)
    label = f"rep{replicate}" if size is None else f"n{size}-rep{replicate}"
    bundle.oracles.append({"network": label, **{k: v.to_dict() for k, v in orc.items()}})
    proxy = None
    if config.proxy is not None:
        proxy = ProxyModel(config.proxy.p_max, config.proxy.h, config.proxy.gamma)
    agents = config.agents()
    q_bench = float(np.mean([expected_ability(a, net.feature_vector) for _, a in agents]))
    runs = bundle.tables["runs"]
    steps = bundle.tables.get("steps")
    for scenario, agent in agents:
        q = expected_ability(agent, net.feature_vector)
        key = ("run", replicate, scenario) if size is None else ("run", size, replicate, scenario)
        seed = derive_seed(config.seed, *key)
        opt_traj = run_policy(net, agent, PolicyKind.oracle(), seed, config.policy.step_budget)
        for kind in config.policy.kinds():
            traj = run_policy(net, agent, kind, seed, config.policy.step_budget)
            rep = score_run(net, traj, opt_traj, q, alpha=config.metrics.alpha, beta=config.metrics.beta,
                            q_bench=q_bench, proxy=proxy,
                            oracles={"optimal": orc["optimal"], "complexity": orc["complexity"]})
            runs.rows.append([replicate, size if size is not None else len(net.nodes), scenario,
                              kind.label, seed, traj.stop_reason.value, len(traj),
                              *[getattr(rep, c) for c in MetricsReport.columns()]])
            if keep_steps:
                bundle.trajectories.append({"network": label, "scenario": scenario, "policy": kind.label,
                                            "seed": seed, **traj.to_dict()})
                t_cum = 0.0
                x_cum = 0.0
                for k, (v, (ur, ag)) in enumerate(zip(traj.visits, prefix_series(traj, orc["optimal"]))):
                    t_cum += v.t_elapsed
                    x_cum += v.r * v.u_realized
                    steps.rows.append([replicate, len(net.nodes), scenario, kind.label, k, v.node,
                                       v.u_realized, v.u_hat, v.r, v.t_elapsed, t_cum, x_cum, ur, ag])
    return orc


def _bootstrap_ci(values, rng, level=0.95):
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        m = float(values.mean()) if values.size else float("nan")
        return m, m
    idx = rng.integers(0, values.size, size=(BOOTSTRAP_RESAMPLES, values.size))
    means = values[idx].mean(axis=1)
    lo, hi = np.percentile(means, [100 * (1 - level) / 2, 100 * (1 + level) / 2])
    return float(lo), float(hi)


def sweep_summary(runs, seed):
    """Per (size, scenario, policy): mean intelligence and paired differences against the first policy."""
    table = Table(list(SWEEP_COLUMNS))
    recs = runs.records()
    policies = list(dict.fromkeys(r["policy"] for r in recs))
    scenarios = list(dict.fromkeys(r["scenario"] for r in recs))
    sizes = sorted({r["size"] for r in recs})
    for size in sizes:
        for scen in scenarios:
            by_policy = {}
            for p in policies:
                rows = sorted((r for r in recs if r["size"] == size and r["scenario"] == scen
                               and r["policy"] == p), key=lambda r: r["replicate"])
                by_policy[p] = np.array([r["intelligence_i"] for r in rows])
            base = by_policy[policies[0]]
            for p in policies:
                vals = by_policy[p]
                lo, hi = _bootstrap_ci(vals, substream(seed, "bootstrap", size, scen, p))
                diff = vals - base
                dlo, dhi = _bootstrap_ci(diff, substream(seed, "bootstrap-diff", size, scen, p))
                table.rows.append([size, scen, p, int(vals.size), float(vals.mean()), lo, hi,
                                   float(diff.mean()), dlo, dhi])
    return table


def _sign_change(xs, ys):
    """First grid interval [x_k, x_k+1] where ``ys`` changes sign or touches zero."""
    for k in range(len(xs) - 1):
        a, b = ys[k], ys[k + 1]
        if a == 0:
            return xs[k], xs[k]
        if a * b < 0:
            return xs[k], xs[k + 1]
    if ys and ys[-1] == 0:
        return xs[-1], xs[-1]
    return None


def _proxy_tables(config, report, bundle):
    """Proxy sweeps around the base run's complexity, ability and intelligence."""
    c, q, i = report.complexity_c, report.ability_q, report.intelligence_i
    h, gamma = config.proxy.h, config.proxy.gamma
    strengths = np.linspace(0.0, config.proxy.p_max, config.proxy.p_steps)
    t = Table(list(PROXY_COLUMNS))
    for p, ib, ih, ip, d in proxy_sweep_rows(c, q, i, h, gamma, strengths):
        t.rows.append([p, ib, ih, ip, d, net_effect_ratio(q, ProxyModel(p, h, gamma))])
    bundle.tables["proxy_sweep"] = t

    # at fixed strength the break-even coefficient is h = gamma * Q
    p_fix = config.proxy.p_max
    h_star = break_even_h(q, gamma)
    hs = np.linspace(0.0, 2.0 * h_star if h_star > 0 else 1.0, config.proxy.p_steps)
    th = Table(list(PROXY_H_COLUMNS))
    for hv in hs.tolist():
        (_, _, ih, ip, d), = proxy_sweep_rows(c, q, i, hv, gamma, [p_fix])
        th.rows.append([hv, p_fix, ip, d])
    bundle.tables["proxy_h_sweep"] = th

    diffs = t.column("difference")
    # the P = 0 row is exactly zero; the crossing is where the sign settles
    located = _sign_change(strengths.tolist(), diffs)
    h_located = _sign_change(hs.tolist(), th.column("difference"))
    roots = break_even_points(q, h, gamma)
    bundle.summary["proxy"] = {
        "complexity_c": c, "ability_q": q, "intelligence_i": i, "h_coeff": h, "boost_gamma": gamma,
        "break_even_p": None if roots is None else list(roots),
        "located_p_interval": None if located is None else list(located),
        "p_step": float(strengths[1] - strengths[0]),
        "break_even_h": h_star,
        "located_h_interval": None if h_located is None else list(h_located),
        "h_step": float(hs[1] - hs[0]),
        "proxy_raises_intelligence": gamma * q > h,
    }


def compute(config):
    """Run ``config`` and return its bundle without touching the filesystem."""
    bundle = RunBundle(config)
    bundle.summary = {"name": config.name, "mode": config.mode, "seed": config.seed}
    if config.mode == "evolution":
        trace = run_evolution(config.evolution, config.network, config.agent, config.seed,
                              alpha=config.metrics.alpha, beta=config.metrics.beta)
        bundle.evolution = trace
        bundle.tables["evolution"] = Table(trace.columns(), [list(r) for r in trace.rows()])
        x = trace.mean_x()
        ih = trace.mean_i_hat()
        bundle.summary["evolution"] = {
            "generations": len(trace), "mean_x_first": float(x[0]), "mean_x_last": float(x[-1]),
            "mean_i_hat_first": float(ih[0]), "mean_i_hat_last": float(ih[-1]),
            "mean_i_hat_max": float(ih.max()),
        }
        return bundle

    bundle.tables["runs"] = Table(list(RUN_COLUMNS))
    keep_steps = config.mode != "sweep"
    if keep_steps:
        bundle.tables["steps"] = Table(list(STEP_COLUMNS))
    sizes = config.sizes if config.mode == "sweep" else (None,)
    for size in sizes:
        for rep in range(config.replicates):
            net = _network_for(config, size, rep)
            if keep_steps:
                bundle.networks.append((f"rep{rep}", net))
            try:
                _run_network(config, net, size, rep, bundle, keep_steps)
            except InfeasibleError as exc:
                raise InfeasibleError(f"replicate {rep}: {exc}") from None

    if config.mode == "sweep":
        bundle.tables["sweep_summary"] = sweep_summary(bundle.tables["runs"], config.seed)
    if config.mode == "proxy-sweep":
        first = bundle.tables["runs"].records()[0]
        _proxy_tables(config, _report_from_record(first), bundle)
    runs = bundle.tables["runs"].records()
    bundle.summary["runs"] = len(runs)
    bundle.summary["stop_reasons"] = {
        k: sum(1 for r in runs if r["stop_reason"] == k)
        for k in sorted({r["stop_reason"] for r in runs})
    }
    return bundle


def _report_from_record(rec):
    return MetricsReport(**{c: rec[c] for c in MetricsReport.columns()})


# -- writing ----------------------------------------------------------------

def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise StorageError(path, f"cannot write: {exc.strerror}") from None


def write_bundle(bundle, directory, formats=None, plots=None):
    """Lay out ``bundle`` under ``directory``; returns the written paths."""
    from .plotting import emit_plot

    formats = bundle.config.output.formats if formats is None else formats
    plots = bundle.config.output.plots if plots is None else plots
    # render before creating anything so a plotting failure leaves no partial output
    svgs = {kind: emit_plot(bundle, kind) for kind in plots}
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise StorageError(directory, f"cannot create output directory: {exc.strerror}") from None
    if not os.path.isdir(directory):
        raise StorageError(directory, "output path is not a directory")
    written = []

    def put(name, text):
        path = os.path.join(directory, name)
        _write(path, text)
        written.append(path)

    put("config.ini", serialize_config(bundle.config))
    if "csv" in formats:
        for name in sorted(bundle.tables):
            put(f"{name}.csv", bundle.tables[name].to_csv())
    if "json" in formats:
        put("bundle.json", json.dumps(bundle.to_dict(), indent=1, sort_keys=True) + "\n")
    for label, net in bundle.networks:
        put(f"network-{label}.tisnet", serialize_network(net))
    for kind, svg in svgs.items():
        put(f"{kind}.svg", svg)
    put("provenance.json", json.dumps(bundle.provenance, indent=1, sort_keys=True) + "\n")
    return written


def run_experiment(config, directory=None, write=True):
    """Compute the experiment, then write every declared output."""
    bundle = compute(config)
    bundle.provenance = {
        "seed": config.seed, "version": __version__, "config": config.name,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }
    if write:
        write_bundle(bundle, directory or config.output.directory)
    return bundle
