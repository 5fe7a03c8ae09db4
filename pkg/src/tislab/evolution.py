"""Selection on a heritable intelligence trait.

Each generation every member is scored on freshly sampled goal networks.
Member fitness is ``1 + k * p_y * I_hat / mean(I_hat)`` where ``I_hat`` is
intelligence benchmarked against the population-mean expected ability,
``p_y`` is the share of fitness riding on the task and ``k`` a scale
constant (default 1).  Offspring are drawn fitness-proportionally with
replacement and inherit the parent trait plus Gaussian mutation.

Trait coordinate 0 is the agent's base ability; with ``horizon_trait`` the
second coordinate, rounded and clamped at 0, is its planning horizon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .agent import expected_ability
from .errors import DegenerateError, ParameterError
from .metrics import intelligence, planning_index_global
from .network import generate_network
from .oracle import min_info_complete_path, optimal_planning_path
from .policies import PolicyKind, run_policy
from .rng import derive_seed, substream


@dataclass(frozen=True)
class EvolutionParams:
    population: int = 60
    generations: int = 100
    p_y: float = 1.0
    selection_scale: float = 1.0
    mutation_sigma: float = 0.05
    initial_trait: tuple = (1.0,)
    initial_sd: float = 0.1
    replicates: int = 1
    horizon_trait: bool = False
    ability_floor: float = 1e-3
    step_budget: int = 200

    def check(self):
        if self.population < 1:
            raise ParameterError("population", "must be >= 1")
        if self.generations < 1:
            raise ParameterError("generations", "must be >= 1")
        if not 0 <= self.p_y <= 1:
            raise ParameterError("p_y", "must be in [0, 1]")
        if self.selection_scale < 0:
            raise ParameterError("selection_scale", "must be >= 0")
        if self.mutation_sigma < 0:
            raise ParameterError("mutation_sigma", "must be >= 0")
        if self.initial_sd < 0:
            raise ParameterError("initial_sd", "must be >= 0")
        if self.replicates < 1:
            raise ParameterError("replicates", "must be >= 1")
        if not self.initial_trait:
            raise ParameterError("initial_trait", "needs at least one coordinate")
        if self.horizon_trait and len(self.initial_trait) < 2:
            raise ParameterError("initial_trait", "horizon_trait needs a second coordinate")


@dataclass(frozen=True, eq=False)
class Population:
    traits: np.ndarray
    generation: int = 0
    benchmark_q: float = 1.0
    selection_weight_p: float = 1.0
    mutation_sigma: float = 0.0
    rng_seed: int = 0
    fitness: np.ndarray | None = None
    i_hat: np.ndarray | None = None
    ability: np.ndarray | None = None
    parents: np.ndarray | None = None

    def __post_init__(self):
        traits = np.atleast_2d(np.asarray(self.traits, dtype=float))
        object.__setattr__(self, "traits", traits)
        if traits.shape[0] == 0:
            raise ParameterError("members", "population must be non-empty")
        if not self.benchmark_q > 0:
            raise ParameterError("benchmark_q", "must be > 0")
        if not 0 <= self.selection_weight_p <= 1:
            raise ParameterError("selection_weight_p", "must be in [0, 1]")
        if self.mutation_sigma < 0:
            raise ParameterError("mutation_sigma", "must be >= 0")

    @property
    def size(self):
        return self.traits.shape[0]

    @property
    def members(self):
        fit = self.fitness if self.fitness is not None else [None] * self.size
        return [(tuple(t), None if f is None else float(f)) for t, f in zip(self.traits.tolist(), fit)]

    def mean_trait(self):
        return self.traits.mean(axis=0)


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    mean_x: tuple
    benchmark_q: float
    mean_i_hat: float
    var_x: tuple


@dataclass
class EvolutionTrace:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def mean_x(self, coord=0):
        return np.array([r.mean_x[coord] for r in self.records])

    def mean_i_hat(self):
        return np.array([r.mean_i_hat for r in self.records])

    def benchmark(self):
        return np.array([r.benchmark_q for r in self.records])

    def columns(self):
        d = len(self.records[0].mean_x) if self.records else 1
        return (["generation"] + [f"mean_x{j}" for j in range(d)] + ["benchmark_q", "mean_I_hat"]
                + [f"var_x{j}" for j in range(d)])

    def rows(self):
        for r in self.records:
            yield [r.generation, *r.mean_x, r.benchmark_q, r.mean_i_hat, *r.var_x]

    def to_dict(self):
        return {"columns": self.columns(), "rows": [list(map(float, row)) for row in self.rows()]}


def phenotype(template, trait, horizon_trait=False, ability_floor=1e-3):
    """Agent expressed by a trait vector."""
    changes = {"base_ability": max(float(trait[0]), ability_floor)}
    if horizon_trait:
        changes["planning_horizon"] = max(0, int(round(float(trait[1]))))
    return replace(template, **changes)


def initial_population(params, seed):
    params.check()
    rng = substream(seed, "initial")
    base = np.asarray(params.initial_trait, dtype=float)
    traits = base + rng.normal(0.0, params.initial_sd, size=(params.population, base.size))
    bench = max(float(np.mean(np.maximum(traits[:, 0], params.ability_floor))), params.ability_floor)
    return Population(traits, 0, bench, params.p_y, params.mutation_sigma, int(seed))


def evaluate_generation(pop, goal_sampler, agent_template, replicates=1, *, alpha=0.5, beta=0.5,
                        selection_scale=1.0, horizon_trait=False, ability_floor=1e-3,
                        step_budget=200):
    """Score every member and set fitness, I_hat, ability and the benchmark.

    All members face the same ``replicates`` networks, sampled fresh for
    this generation.
    """
    if replicates < 1:
        raise ParameterError("replicates", "must be >= 1")
    gen = pop.generation
    nets = [generate_network(goal_sampler, derive_seed(pop.rng_seed, "network", gen, k))
            for k in range(replicates)]
    opts = [optimal_planning_path(net) for net in nets]
    comps = [min_info_complete_path(net).total_info for net in nets]

    n = pop.size
    agents = [phenotype(agent_template, t, horizon_trait, ability_floor) for t in pop.traits]
    q = np.array([[expected_ability(a, net.feature_vector) for net in nets] for a in agents])
    if _shared_path(agents, nets):
        ci = _solver_scores(nets, opts, comps, agents, q, alpha, beta, step_budget)
    else:
        ci = np.empty((n, replicates))
        for i, agent in enumerate(agents):
            kind = PolicyKind.for_agent(agent)
            for k, net in enumerate(nets):
                traj = run_policy(net, agent, kind, derive_seed(pop.rng_seed, "run", gen, i, k),
                                  step_budget)
                ci[i, k] = comps[k] * intelligence(traj, opts[k], alpha, beta)

    bench = float(q.mean())
    i_hat = (ci / (bench * bench)).mean(axis=1)
    fitness = fitness_from(i_hat, pop.selection_weight_p, selection_scale, gen)
    return replace(pop, benchmark_q=bench, fitness=fitness, i_hat=i_hat, ability=q.mean(axis=1))


def fitness_from(i_hat, p_y, selection_scale=1.0, generation=None):
    """max(0, 1 + k * p_y * I_hat / mean(I_hat)); all ones when p_y is 0."""
    i_hat = np.asarray(i_hat, dtype=float)
    if p_y == 0:
        return np.ones(i_hat.size)
    mean_i = float(i_hat.mean())
    if mean_i == 0 or not math.isfinite(mean_i):
        raise DegenerateError("population mean intelligence is zero", generation)
    return np.maximum(0.0, 1.0 + selection_scale * p_y * i_hat / mean_i)


def _shared_path(agents, nets):
    """True when every member provably walks the same path on each network.

    Greedy choice ranks successors by u_hat * Q / (Q + u_hat) * (1 - env),
    which orders nodes by u_hat for every Q > 0, so noise-free pure solvers
    sharing an environment penalty all take the same walk.  A threshold
    would make the stopping point ability-dependent.
    """
    first = agents[0]
    return (all(a.planning_horizon == 0 and a.noise_sigma == 0 and a.env_penalty == first.env_penalty
                for a in agents)
            and all(net.goal_threshold_w is None for net in nets))


def _solver_scores(nets, opts, comps, agents, q, alpha, beta, step_budget):
    """C * I for every member and network, vectorized over members."""
    env = agents[0].env_penalty
    out = np.empty_like(q)
    for k, net in enumerate(nets):
        traj = run_policy(net, agents[0], PolicyKind.greedy(), 0, step_budget)
        u_hat = np.array([v.u_hat for v in traj.visits])
        r = np.array([v.r for v in traj.visits])
        qk = q[:, k:k + 1]
        gain = np.minimum(u_hat, u_hat * (qk / (qk + u_hat)) * (1.0 - env))
        u_r = (r * gain / u_hat).mean(axis=1)
        # the planning index depends on the path only
        a_glob = planning_index_global(traj, opts[k])
        out[:, k] = comps[k] * u_r * (alpha + beta * a_glob)
    return out


def reproduce(pop):
    """Next generation by fitness-proportional sampling with replacement plus mutation."""
    if pop.fitness is None:
        raise ParameterError("fitness", "evaluate the generation before reproducing")
    total = float(pop.fitness.sum())
    if not total > 0:
        raise DegenerateError("total fitness is zero", pop.generation)
    rng = substream(pop.rng_seed, "reproduce", pop.generation)
    n = pop.size
    idx = rng.choice(n, size=n, replace=True, p=pop.fitness / total)
    traits = pop.traits[idx]
    if pop.mutation_sigma > 0:
        traits = traits + rng.normal(0.0, pop.mutation_sigma, size=traits.shape)
    return Population(traits, pop.generation + 1, pop.benchmark_q, pop.selection_weight_p,
                      pop.mutation_sigma, pop.rng_seed, parents=idx)


def run_evolution(params, goal_sampler, agent_template, seed, *, alpha=0.5, beta=0.5,
                  keep_populations=False):
    """Alternate evaluation and reproduction for ``params.generations`` generations.

    Returns the trace, plus the list of evaluated populations when
    ``keep_populations`` is set.
    """
    params.check()
    pop = initial_population(params, seed)
    trace = EvolutionTrace()
    kept = []
    for _ in range(params.generations):
        pop = evaluate_generation(pop, goal_sampler, agent_template, params.replicates,
                                  alpha=alpha, beta=beta, selection_scale=params.selection_scale,
                                  horizon_trait=params.horizon_trait,
                                  ability_floor=params.ability_floor, step_budget=params.step_budget)
        trace.records.append(GenerationRecord(
            pop.generation, tuple(pop.traits.mean(axis=0).tolist()), pop.benchmark_q,
            float(pop.i_hat.mean()), tuple(pop.traits.var(axis=0).tolist())))
        if keep_populations:
            kept.append(pop)
        pop = reproduce(pop)
    return (trace, kept) if keep_populations else trace
