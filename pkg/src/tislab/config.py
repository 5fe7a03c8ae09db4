"""Experiment configuration: an INI-style text format and the named presets.

A config file is a set of ``[section]`` blocks with ``key = value`` lines::

    [experiment]
    schema_version = 1
    mode = trajectories
    seed = 7

    [network]
    nodes = 12

    [agent]
    base_ability = 4.0

    [agent.noisy]
    noise_sigma = 2.0

``[agent]`` holds the default agent; every ``[agent.NAME]`` section is a
scenario that overrides some of its fields.  Lists are comma separated.
:func:`serialize_config` writes a canonical form, so parsing and
re-serializing canonical text reproduces it byte for byte.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field, fields

from .agent import Agent
from .errors import ConfigError, ParameterError, StorageError
from .evolution import EvolutionParams
from .network import GeneratorParams
from .policies import PolicyKind

SCHEMA_VERSION = "1"
MODES = ("trajectories", "sweep", "proxy-sweep", "evolution")
FORMATS = ("csv", "json")
PLOT_KINDS = ("fig1b", "fig4", "fig5", "proxy", "evolution")


@dataclass(frozen=True)
class PolicySection:
    variants: tuple = ("greedy",)
    step_budget: int = 1000

    def kinds(self):
        return [PolicyKind.parse(v) for v in self.variants]


@dataclass(frozen=True)
class MetricsSection:
    alpha: float = 0.5
    beta: float = 0.5
    w: float | None = None


@dataclass(frozen=True)
class ProxySection:
    h: float = 0.5
    gamma: float = 0.25
    p_max: float = 4.0
    p_steps: int = 41


@dataclass(frozen=True)
class OutputSection:
    directory: str = "out"
    formats: tuple = ("csv", "json")
    plots: tuple = ()


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    mode: str = "trajectories"
    seed: int = 0
    replicates: int = 1
    schema_version: str = SCHEMA_VERSION
    network: GeneratorParams = field(default_factory=GeneratorParams)
    network_file: str | None = None
    sizes: tuple = ()
    agent: Agent = field(default_factory=Agent)
    scenarios: tuple = ()  # (name, Agent) pairs
    policy: PolicySection = field(default_factory=PolicySection)
    metrics: MetricsSection = field(default_factory=MetricsSection)
    proxy: ProxySection | None = None
    evolution: EvolutionParams | None = None
    output: OutputSection = field(default_factory=OutputSection)

    def agents(self):
        """Scenario name and agent pairs; the default agent alone when none are named."""
        return list(self.scenarios) if self.scenarios else [("default", self.agent)]

    def with_seed(self, seed):
        return dataclasses.replace(self, seed=int(seed))

    def with_output(self, directory):
        return dataclasses.replace(self, output=dataclasses.replace(self.output, directory=str(directory)))


# -- value formatting -------------------------------------------------------

def _fmt(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def _section_items(obj, skip=()):
    return [(f.name, _fmt(getattr(obj, f.name))) for f in fields(obj) if f.name not in skip]


def serialize_config(cfg):
    """Canonical text form of ``cfg``."""
    blocks = [("experiment", [("schema_version", cfg.schema_version), ("name", cfg.name),
                              ("mode", cfg.mode), ("seed", str(cfg.seed)),
                              ("replicates", str(cfg.replicates))])]
    net = _section_items(cfg.network)
    if cfg.network_file is not None:
        net.append(("file", cfg.network_file))
    if cfg.sizes:
        net.append(("sizes", _fmt(cfg.sizes)))
    blocks.append(("network", net))
    blocks.append(("agent", _section_items(cfg.agent)))
    for name, agent in cfg.scenarios:
        diff = [(f.name, _fmt(getattr(agent, f.name))) for f in fields(agent)
                if getattr(agent, f.name) != getattr(cfg.agent, f.name)]
        blocks.append((f"agent.{name}", diff))
    blocks.append(("policy", _section_items(cfg.policy)))
    blocks.append(("metrics", _section_items(cfg.metrics)))
    if cfg.proxy is not None:
        blocks.append(("proxy", _section_items(cfg.proxy)))
    if cfg.evolution is not None:
        blocks.append(("evolution", _section_items(cfg.evolution)))
    blocks.append(("output", _section_items(cfg.output)))
    out = []
    for head, items in blocks:
        out.append(f"[{head}]")
        out.extend(f"{k} = {v}" for k, v in items)
        out.append("")
    return "\n".join(out)


# -- parsing ----------------------------------------------------------------

def _convert(path, raw, kind):
    """Parse ``raw`` into the type described by ``kind``."""
    text = raw.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        if kind == "opt_float":
            return None if text.lower() in ("none", "") else float(text)
        if kind == "floats":
            return tuple(float(x) for x in text.split(",") if x.strip())
        if kind == "ints":
            return tuple(int(x) for x in text.split(",") if x.strip())
        if kind == "strs":
            return tuple(x.strip() for x in text.split(",") if x.strip())
        return text
    except ValueError:
        raise ConfigError(path, f"cannot parse {raw!r}") from None


_NETWORK_KINDS = {
    "nodes": int, "branching": int, "u_hat_min": float, "u_hat_max": float,
    "relevance_budget": float, "decoy_fraction": float, "decoy_scale": float, "min_depth": int,
    "max_branch_len": int, "skip_prob": float, "threshold_w": "opt_float", "features": "floats",
    "feature_spread": float,
}
_AGENT_KINDS = {
    "expertise": "floats", "base_ability": float, "kappa": float, "noise_sigma": float,
    "env_penalty": float, "planning_horizon": int, "replan_period": int,
}
_POLICY_KINDS = {"variants": "strs", "step_budget": int}
_METRICS_KINDS = {"alpha": float, "beta": float, "w": "opt_float"}
_PROXY_KINDS = {"h": float, "gamma": float, "p_max": float, "p_steps": int}
_EVOLUTION_KINDS = {
    "population": int, "generations": int, "p_y": float, "selection_scale": float,
    "mutation_sigma": float, "initial_trait": "floats", "initial_sd": float, "replicates": int,
    "horizon_trait": bool, "ability_floor": float, "step_budget": int,
}
_OUTPUT_KINDS = {"directory": str, "formats": "strs", "plots": "strs"}


def _read_section(parser, name, kinds, extra=()):
    values = {}
    for key, raw in parser.items(name):
        if key in extra:
            continue
        if key not in kinds:
            raise ConfigError(f"{name}.{key}", "unknown field")
        values[key] = _convert(f"{name}.{key}", raw, kinds[key])
    return values


def _build(path, cls, values, base=None):
    """Construct ``cls``, mapping parameter errors onto a config path."""
    try:
        obj = dataclasses.replace(base, **values) if base is not None else cls(**values)
        if hasattr(obj, "check"):
            obj.check()
        return obj
    except ParameterError as exc:
        raise ConfigError(f"{path}.{exc.field}", str(exc)) from None


def parse_config(text, source="<config>"):
    parser = configparser.ConfigParser(interpolation=None, default_section="\0defaults")
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(source, f"malformed config: {exc}") from None

    sections = parser.sections()
    known = {"experiment", "network", "agent", "policy", "metrics", "proxy", "evolution", "output"}
    for s in sections:
        if s not in known and not s.startswith("agent."):
            raise ConfigError(s, "unknown section")
    for required in ("experiment", "network"):
        if required not in sections:
            raise ConfigError(required, "missing required section")

    exp = _read_section(parser, "experiment",
                        {"schema_version": str, "name": str, "mode": str, "seed": int, "replicates": int})
    version = exp.get("schema_version")
    if version is None:
        raise ConfigError("experiment.schema_version", "missing")
    if version != SCHEMA_VERSION:
        raise ConfigError("experiment.schema_version", f"unsupported version {version!r}")
    mode = exp.get("mode", "trajectories")
    if mode not in MODES:
        raise ConfigError("experiment.mode", f"must be one of {', '.join(MODES)}")
    replicates = exp.get("replicates", 1)
    if replicates < 1:
        raise ConfigError("experiment.replicates", "must be >= 1")
    seed = exp.get("seed", 0)
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("experiment.seed", "must be a 64-bit unsigned integer")

    net_vals = _read_section(parser, "network", _NETWORK_KINDS, extra=("file", "sizes"))
    network = _build("network", GeneratorParams, net_vals)
    network_file = parser.get("network", "file", fallback=None)
    sizes = _convert("network.sizes", parser.get("network", "sizes", fallback=""), "ints")
    for n in sizes:
        if not 2 <= n <= 10000:
            raise ConfigError("network.sizes", f"size {n} outside [2, 10000]")
    if mode == "sweep" and not sizes:
        raise ConfigError("network.sizes", "sweep mode needs at least one size")

    agent = Agent()
    if "agent" in sections:
        agent = _build("agent", Agent, _read_section(parser, "agent", _AGENT_KINDS))
    scenarios = []
    for s in sections:
        if s.startswith("agent."):
            name = s[len("agent."):]
            if not name:
                raise ConfigError(s, "scenario needs a name")
            scenarios.append((name, _build(s, Agent, _read_section(parser, s, _AGENT_KINDS), agent)))

    policy = PolicySection()
    if "policy" in sections:
        policy = PolicySection(**{**dataclasses.asdict(policy),
                                  **_read_section(parser, "policy", _POLICY_KINDS)})
    if not policy.variants:
        raise ConfigError("policy.variants", "at least one policy is required")
    for v in policy.variants:
        try:
            PolicyKind.parse(v)
        except ParameterError as exc:
            raise ConfigError("policy.variants", str(exc)) from None
    if policy.step_budget < 1:
        raise ConfigError("policy.step_budget", "must be >= 1")

    metrics = MetricsSection()
    if "metrics" in sections:
        metrics = MetricsSection(**{**dataclasses.asdict(metrics),
                                    **_read_section(parser, "metrics", _METRICS_KINDS)})
    if metrics.alpha < 0 or metrics.beta < 0 or abs(metrics.alpha + metrics.beta - 1) > 1e-9:
        raise ConfigError("metrics.alpha", "alpha and beta must be >= 0 and sum to 1")
    if metrics.w is not None and metrics.w < 0:
        raise ConfigError("metrics.w", "must be >= 0")

    proxy = None
    if "proxy" in sections:
        proxy = ProxySection(**{**dataclasses.asdict(ProxySection()),
                                **_read_section(parser, "proxy", _PROXY_KINDS)})
        for name in ("h", "gamma", "p_max"):
            if getattr(proxy, name) < 0:
                raise ConfigError(f"proxy.{name}", "must be >= 0")
        if proxy.p_steps < 2:
            raise ConfigError("proxy.p_steps", "must be >= 2")
    if mode == "proxy-sweep" and proxy is None:
        raise ConfigError("proxy", "missing required section for proxy-sweep mode")

    evolution = None
    if "evolution" in sections:
        evolution = _build("evolution", EvolutionParams, _read_section(parser, "evolution", _EVOLUTION_KINDS))
    if mode == "evolution" and evolution is None:
        raise ConfigError("evolution", "missing required section for evolution mode")

    output = OutputSection()
    if "output" in sections:
        output = OutputSection(**{**dataclasses.asdict(output),
                                  **_read_section(parser, "output", _OUTPUT_KINDS)})
    for f in output.formats:
        if f not in FORMATS:
            raise ConfigError("output.formats", f"unknown format {f!r}")
    for p in output.plots:
        if p not in PLOT_KINDS:
            raise ConfigError("output.plots", f"unknown plot kind {p!r}")

    return ExperimentConfig(
        name=exp.get("name", "experiment"), mode=mode, seed=seed, replicates=replicates,
        schema_version=version, network=network, network_file=network_file, sizes=sizes,
        agent=agent, scenarios=tuple(scenarios), policy=policy, metrics=metrics, proxy=proxy,
        evolution=evolution, output=output,
    )


def read_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise StorageError(path, f"cannot read config: {exc.strerror}") from None
    return parse_config(text, source=str(path))


# -- presets ----------------------------------------------------------------

def _fig1b():
    base = Agent(base_ability=4.0)
    return ExperimentConfig(
        name="fig1b-timecourses", mode="trajectories", seed=11, replicates=1,
        network=GeneratorParams(nodes=12, threshold_w=12.0),
        agent=base,
        scenarios=(("steady", base), ("noisy", base.evolve(noise_sigma=2.0)),
                   ("able", base.evolve(base_ability=12.0))),
        policy=PolicySection(("greedy",), 1000),
        output=OutputSection("out/fig1b", ("csv", "json"), ("fig1b",)),
    )


def _fig4():
    return ExperimentConfig(
        name="fig4-achievement-vs-complexity", mode="sweep", seed=4, replicates=200,
        network=GeneratorParams(nodes=16, decoy_fraction=0.4, skip_prob=0.0),
        sizes=(4, 8, 16, 32, 64),
        agent=Agent(base_ability=4.0),
        policy=PolicySection(("greedy", "planner:3:1"), 1000),
        output=OutputSection("out/fig4", ("csv", "json"), ("fig4",)),
    )


def _fig5():
    return ExperimentConfig(
        name="fig5-trajectories", mode="trajectories", seed=1, replicates=1,
        network=GeneratorParams(nodes=16, decoy_fraction=0.3),
        agent=Agent(base_ability=4.0),
        policy=PolicySection(("random", "greedy", "planner:3:1", "oracle"), 1000),
        output=OutputSection("out/fig5", ("csv", "json"), ("fig5",)),
    )


def _proxy():
    return ExperimentConfig(
        name="proxy-sweep", mode="proxy-sweep", seed=3, replicates=1,
        network=GeneratorParams(nodes=12),
        agent=Agent(base_ability=4.0),
        policy=PolicySection(("greedy",), 1000),
        proxy=ProxySection(h=0.5, gamma=0.25, p_max=4.0, p_steps=41),
        output=OutputSection("out/proxy", ("csv", "json"), ("proxy",)),
    )


def _evolution():
    return ExperimentConfig(
        name="evolution-run", mode="evolution", seed=1, replicates=1,
        network=GeneratorParams(nodes=8, u_hat_min=2.0, u_hat_max=8.0),
        agent=Agent(base_ability=1.0),
        evolution=EvolutionParams(population=2000, generations=200, p_y=1.0, mutation_sigma=0.1,
                                  initial_trait=(0.5,), initial_sd=0.1),
        output=OutputSection("out/evolution", ("csv", "json"), ("evolution",)),
    )


PRESETS = {
    "fig1b-timecourses": _fig1b,
    "fig4-achievement-vs-complexity": _fig4,
    "fig5-trajectories": _fig5,
    "proxy-sweep": _proxy,
    "evolution-run": _evolution,
}


def preset(name):
    """A complete experiment config by preset name."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError("preset", f"unknown preset {name!r}; valid names: {', '.join(PRESETS)}") from None
