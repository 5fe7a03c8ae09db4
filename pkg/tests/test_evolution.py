import numpy as np
import pytest
from scipy import stats

from tislab import evolution as evo
from tislab.agent import Agent
from tislab.errors import DegenerateError, ParameterError
from tislab.evolution import (
    EvolutionParams,
    Population,
    evaluate_generation,
    fitness_from,
    initial_population,
    reproduce,
    run_evolution,
)
from tislab.network import GeneratorParams

SAMPLER = GeneratorParams(nodes=8, u_hat_min=2.0, u_hat_max=8.0)
TEMPLATE = Agent(base_ability=1.0)


def test_neutral_fitness_is_one():
    pop = initial_population(EvolutionParams(population=20, p_y=0.0), 0)
    pop = evaluate_generation(pop, SAMPLER, TEMPLATE)
    assert np.all(pop.fitness == 1.0)


def test_identical_traits_give_fitness_one_plus_p():
    pop = Population(np.full((10, 1), 2.0), selection_weight_p=0.6, rng_seed=3)
    pop = evaluate_generation(pop, SAMPLER, TEMPLATE)
    assert np.allclose(pop.fitness, 1.6, rtol=1e-12)


def test_twice_the_mean_gives_fitness_three():
    fitness = fitness_from([2.0, 0.0, 1.0], 1.0)
    assert fitness[0] == 3.0
    assert np.all(fitness_from([2.0, 0.0, 1.0], 0.0) == 1.0)


def test_all_zero_intelligence_is_degenerate():
    with pytest.raises(DegenerateError):
        fitness_from([0.0, 0.0], 1.0, generation=4)


def test_benchmark_is_mean_expected_ability():
    pop = Population(np.array([[1.0], [2.0], [4.0]]), rng_seed=1)
    pop = evaluate_generation(pop, SAMPLER, TEMPLATE, replicates=2)
    assert pop.benchmark_q == pytest.approx(7.0 / 3.0, rel=1e-15)
    assert np.allclose(pop.ability, [1.0, 2.0, 4.0])


def test_replicates_must_be_positive():
    with pytest.raises(ParameterError):
        evaluate_generation(Population(np.ones((2, 1))), SAMPLER, TEMPLATE, replicates=0)


def test_one_member_with_all_fitness_is_cloned():
    pop = Population(np.arange(5.0).reshape(5, 1), fitness=np.array([0, 0, 1.0, 0, 0]))
    nxt = reproduce(pop)
    assert np.all(nxt.traits == 2.0)
    assert nxt.generation == 1


def test_equal_fitness_without_mutation_resamples_parents():
    traits = np.arange(6.0).reshape(6, 1)
    nxt = reproduce(Population(traits, fitness=np.ones(6), rng_seed=4))
    assert set(nxt.traits[:, 0]) <= set(traits[:, 0])
    assert np.array_equal(nxt.traits[:, 0], traits[nxt.parents, 0])


def test_reproduction_is_deterministic():
    pop = Population(np.arange(6.0).reshape(6, 1), fitness=np.arange(1.0, 7.0), mutation_sigma=0.3, rng_seed=9)
    assert np.array_equal(reproduce(pop).traits, reproduce(pop).traits)


def test_zero_total_fitness_is_degenerate():
    with pytest.raises(DegenerateError):
        reproduce(Population(np.ones((3, 1)), fitness=np.zeros(3)))


def test_offspring_mean_matches_weighted_parent_mean():
    traits = np.array([[1.0], [2.0], [5.0], [7.0]])
    fitness = np.array([1.0, 3.0, 0.5, 2.5])
    means = [reproduce(Population(traits, fitness=fitness, rng_seed=s)).traits.mean() for s in range(10_000)]
    p = fitness / fitness.sum()
    expected = float(p @ traits[:, 0])
    # a single offspring has variance sum p (x - mu)^2; the mean of 4 has a quarter of it
    se = np.sqrt(float(p @ (traits[:, 0] - expected) ** 2) / 4 / len(means))
    assert abs(np.mean(means) - expected) < 3 * se


def test_no_selection_no_mutation_keeps_mean_constant():
    # a monomorphic start: resampling identical traits cannot move the mean
    params = EvolutionParams(population=30, generations=25, p_y=0.0, mutation_sigma=0.0,
                             initial_trait=(1.5,), initial_sd=0.0)
    trace = run_evolution(params, SAMPLER, TEMPLATE, 2)
    assert np.all(trace.mean_x() == 1.5)


def test_trace_benchmark_is_mean_ability():
    params = EvolutionParams(population=15, generations=6, mutation_sigma=0.05, initial_trait=(1.0,))
    trace, pops = run_evolution(params, SAMPLER, TEMPLATE, 3, keep_populations=True)
    assert [r.generation for r in trace.records] == list(range(6))
    for rec, pop in zip(trace.records, pops):
        assert rec.benchmark_q == pytest.approx(float(pop.ability.mean()), rel=1e-12)


def test_trace_columns():
    trace = run_evolution(EvolutionParams(population=5, generations=2), SAMPLER, TEMPLATE, 0)
    assert trace.columns() == ["generation", "mean_x0", "benchmark_q", "mean_I_hat", "var_x0"]
    assert len(list(trace.rows())) == 2


def test_vectorized_scoring_matches_per_member_runs(monkeypatch):
    sampler = GeneratorParams(nodes=10, decoy_fraction=0.3, skip_prob=0.4)
    pop = Population(np.linspace(0.3, 6.0, 25).reshape(25, 1), rng_seed=8)
    fast = evaluate_generation(pop, sampler, TEMPLATE, replicates=3)
    monkeypatch.setattr(evo, "_shared_path", lambda agents, nets: False)
    slow = evaluate_generation(pop, sampler, TEMPLATE, replicates=3)
    assert np.allclose(fast.i_hat, slow.i_hat, rtol=1e-12, atol=0)


def test_horizon_trait_maps_to_planner():
    agent = evo.phenotype(TEMPLATE, [2.0, 2.6], horizon_trait=True)
    assert agent.base_ability == 2.0 and agent.planning_horizon == 3
    assert evo.phenotype(TEMPLATE, [-1.0, -2.0], horizon_trait=True).planning_horizon == 0


def test_selection_favours_higher_intelligence():
    params = EvolutionParams(population=80, generations=15, mutation_sigma=0.05, initial_trait=(1.0,),
                             initial_sd=0.3)
    _, pops = run_evolution(params, SAMPLER, TEMPLATE, 5, keep_populations=True)
    rel, counts = [], []
    for pop in pops:
        # reproduction is seeded, so this replays the draw that made the next generation
        offspring = np.bincount(reproduce(pop).parents, minlength=pop.size)
        rel.extend(pop.i_hat / pop.i_hat.mean())
        counts.extend(offspring)
    rho, p = stats.spearmanr(rel, counts)
    assert rho > 0 and p < 0.01


def test_evolution_params_validation():
    with pytest.raises(ParameterError):
        EvolutionParams(p_y=1.5).check()
    with pytest.raises(ParameterError):
        EvolutionParams(horizon_trait=True, initial_trait=(1.0,)).check()
