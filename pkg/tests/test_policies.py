import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tislab.agent import Agent, predicted_gain
from tislab.errors import ParameterError
from tislab.metrics import realized_complexity
from tislab.network import GeneratorParams, GoalNetwork, generate_network, validate_path
from tislab.oracle import max_relevance_weighted_path
from tislab.policies import PolicyKind, StopReason, Trajectory, run_policy, stopping_check

ALL_KINDS = [PolicyKind.random_walk(), PolicyKind.greedy(), PolicyKind.planner(2), PolicyKind.oracle()]


def y_network():
    # branch 1 is a decoy worth 9 bits, branch 2 relevant with 4 bits
    return GoalNetwork.from_arrays([4.0, 9.0, 4.0], [1.0, 0.0, 1.0], [(0, 1), (0, 2)])


def test_chain_is_identical_for_every_policy():
    net = GoalNetwork.from_arrays([3.0, 5.0, 2.0], [1.0, 1.0, 1.0], [(0, 1), (1, 2)])
    trajs = [run_policy(net, Agent(noise_sigma=0.5), k, seed=3) for k in ALL_KINDS]
    assert all(t.visits == trajs[0].visits for t in trajs)
    assert trajs[0].nodes == (0, 1, 2)


def test_greedy_takes_decoy_and_planner_does_not():
    net = y_network()
    assert run_policy(net, Agent(), PolicyKind.greedy(), 0).nodes == (0, 1)
    assert run_policy(net, Agent(), PolicyKind.planner(2), 0).nodes == (0, 2)


def test_y_network_choice_matches_exhaustive_score():
    net = y_network()
    agent = Agent()
    weights = [predicted_gain(agent, n.u_hat, agent.base_ability) for n in net.nodes]
    assert max_relevance_weighted_path(net, weights) == (0, 2)


def test_budget_of_one():
    traj = run_policy(y_network(), Agent(), PolicyKind.greedy(), 0, step_budget=1)
    assert len(traj) == 1
    assert traj.stop_reason == StopReason.STEP_BUDGET_EXHAUSTED


def test_bad_budget():
    with pytest.raises(ParameterError):
        run_policy(y_network(), Agent(), PolicyKind.greedy(), 0, step_budget=0)


def test_dead_end_start():
    net = GoalNetwork.from_arrays([2.0, 2.0], [1.0, 1.0], [(1, 0)], start=0, terminals=(1,))
    traj = run_policy(net, Agent(), PolicyKind.greedy(), 0)
    assert traj.stop_reason == StopReason.DEAD_END
    assert traj.nodes == (0,)


def test_threshold_stops_the_walk():
    net = GoalNetwork.from_arrays([4.0] * 5, [1.0] * 5, [(i, i + 1) for i in range(4)], goal_threshold_w=3.0)
    traj = run_policy(net, Agent(base_ability=4.0), PolicyKind.greedy(), 0)
    # each node yields 2 bits, so X = 4 > 3 after the second node
    assert traj.nodes == (0, 1)
    assert traj.stop_reason == StopReason.THRESHOLD_MET


def test_stopping_check_examples():
    from tislab.policies import Visit

    visits = [Visit(0, 2.0, 4.0, 1.0, 1.0), Visit(1, 3.0, 4.0, 1.0, 1.0)]
    s = stopping_check(visits, 4.0)
    assert s.met and s.margin == 1.0
    assert not stopping_check([], 0.0).met
    decoys = [Visit(0, 2.0, 4.0, 0.0, 1.0)]
    assert not stopping_check(decoys, 0.5).met


def test_policy_parse_and_label():
    assert PolicyKind.parse("planner:3:2") == PolicyKind.planner(3, 2)
    assert PolicyKind.parse("greedy").label == "greedy"
    assert PolicyKind.planner(3).label == "planner:3:1"
    with pytest.raises(ParameterError):
        PolicyKind.parse("planner")
    with pytest.raises(ParameterError):
        PolicyKind.parse("teleport")


def test_trajectory_dict_round_trip():
    net = generate_network(GeneratorParams(nodes=10, decoy_fraction=0.3), 4)
    traj = run_policy(net, Agent(noise_sigma=1.0), PolicyKind.planner(3, 2), 9)
    assert Trajectory.from_dict(traj.to_dict()) == traj


networks = st.builds(
    lambda n, d, s, seed: generate_network(GeneratorParams(nodes=n, decoy_fraction=d, skip_prob=s), seed),
    st.integers(2, 14), st.floats(0, 0.6), st.floats(0, 0.6), st.integers(0, 2**32))
kinds = st.sampled_from(ALL_KINDS + [PolicyKind.planner(3, 2), PolicyKind.planner(1)])


@settings(max_examples=150, deadline=None)
@given(networks, kinds, st.floats(0, 3), st.integers(0, 2**32))
def test_trajectories_are_valid_walks(net, kind, sigma, seed):
    traj = run_policy(net, Agent(noise_sigma=sigma), kind, seed)
    assert validate_path(net, traj.nodes).ok
    assert all(v.u_realized <= v.u_hat for v in traj.visits)
    # plan segments partition the visit order
    starts = [s.start_index for s in traj.plan_segments]
    assert starts[0] == 0 and starts == sorted(set(starts)) and starts[-1] < len(traj)


@settings(max_examples=60, deadline=None)
@given(networks, kinds, st.integers(0, 2**32))
def test_runs_are_deterministic(net, kind, seed):
    agent = Agent(noise_sigma=1.0)
    assert run_policy(net, agent, kind, seed) == run_policy(net, agent, kind, seed)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 20), st.integers(0, 2**32))
def test_random_and_greedy_agree_without_branches(n, seed):
    net = GoalNetwork.from_arrays(np.linspace(1, 5, n), [1.0] * n, [(i, i + 1) for i in range(n - 1)])
    agent = Agent(noise_sigma=1.0)
    assert run_policy(net, agent, PolicyKind.random_walk(), seed) == run_policy(net, agent, PolicyKind.greedy(), seed)


def test_unbounded_planner_matches_exhaustive_search():
    agent = Agent(base_ability=3.0)
    rng = np.random.default_rng(5)
    for seed in range(300):
        net = generate_network(GeneratorParams(nodes=int(rng.integers(2, 13)),
                                               decoy_fraction=float(rng.uniform(0, 0.5))), seed)
        weights = [predicted_gain(agent, n.u_hat, agent.base_ability) for n in net.nodes]
        big = len(net.nodes)
        traj = run_policy(net, agent, PolicyKind.planner(big, big), seed)
        assert traj.nodes == max_relevance_weighted_path(net, weights), seed


def test_planner_collects_more_relevant_information_than_greedy():
    agent = Agent(base_ability=4.0)
    xs = {"greedy": [], "planner": []}
    for seed in range(150):
        net = generate_network(GeneratorParams(nodes=16, decoy_fraction=0.3), seed)
        xs["greedy"].append(realized_complexity(run_policy(net, agent, PolicyKind.greedy(), seed)))
        xs["planner"].append(realized_complexity(run_policy(net, agent, PolicyKind.planner(2), seed)))
    assert np.mean(xs["planner"]) >= np.mean(xs["greedy"])
