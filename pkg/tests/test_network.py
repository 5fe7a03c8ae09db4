import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tislab.errors import ParameterError
from tislab.network import (
    GeneratorParams,
    GoalNetwork,
    SubgoalNode,
    decoy_count,
    generate_network,
    parse_network,
    serialize_network,
    validate_network,
    validate_path,
)


def chain(u=(4.0, 4.0), r=(1.0, 1.0)):
    n = len(u)
    return GoalNetwork.from_arrays(u, r, [(i, i + 1) for i in range(n - 1)])


def test_two_node_chain_is_valid():
    assert validate_network(chain()).ok


def test_cycle_is_reported():
    net = GoalNetwork((SubgoalNode(0, 4.0, 1.0), SubgoalNode(1, 4.0, 1.0)), ((0, 1), (1, 0)), 0, (1,))
    assert "acyclic" in validate_network(net).rules


def test_negative_u_hat_is_reported():
    net = GoalNetwork.from_arrays([-1.0, 4.0], [1.0, 1.0], [(0, 1)])
    assert "u_hat >= 0" in validate_network(net).rules


def test_bad_edge_endpoint():
    net = GoalNetwork.from_arrays([1.0, 1.0, 1.0], [1.0, 1.0, 1.0], [(0, 1), (1, 7)], terminals=(1,))
    assert "edge endpoints" in validate_network(net).rules


def test_unreachable_node():
    net = GoalNetwork.from_arrays([1.0, 1.0, 1.0], [1.0, 1.0, 1.0], [(0, 1)], terminals=(1,))
    assert "reachable" in validate_network(net).rules


def test_path_at_relevance_boundary_is_ok():
    assert validate_path(chain(), [0, 1]).ok


def test_path_over_relevance_budget():
    net = chain(r=(2.0, 1.0))
    assert "relevance condition" in validate_path(net, [0, 1]).rules


def test_repeated_node_path():
    assert "no repeated node" in validate_path(chain(), [0, 0]).rules


def test_generator_is_deterministic():
    p = GeneratorParams(nodes=6, branching=2)
    assert serialize_network(generate_network(p, 42)) == serialize_network(generate_network(p, 42))


def test_generator_rejects_one_node():
    with pytest.raises(ParameterError) as exc:
        generate_network(GeneratorParams(nodes=1), 0)
    assert exc.value.field == "nodes"


@pytest.mark.parametrize("field,value", [("branching", 0), ("decoy_fraction", 1.5),
                                         ("u_hat_min", -1.0), ("relevance_budget", 0.0)])
def test_generator_names_bad_field(field, value):
    with pytest.raises(ParameterError) as exc:
        GeneratorParams(**{field: value}).check()
    assert exc.value.field == field


def test_decoy_fraction_half_gives_about_six_of_twelve():
    p = GeneratorParams(nodes=12, decoy_fraction=0.5)
    counts = [int(np.sum(generate_network(p, s).relevance == 0)) for s in range(1000)]
    assert decoy_count(p) == 6
    assert abs(np.mean(counts) - 6) <= 0.6


def test_generated_networks_validate_over_many_seeds():
    rng = np.random.default_rng(0)
    for seed in range(10_000):
        p = GeneratorParams(nodes=int(rng.integers(2, 30)), branching=int(rng.integers(1, 4)),
                            decoy_fraction=float(rng.uniform(0, 0.6)), skip_prob=float(rng.uniform(0, 0.5)))
        assert validate_network(generate_network(p, seed)).ok, (p, seed)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 40), st.floats(0, 0.7), st.integers(0, 2**32))
def test_serialization_round_trip(nodes, decoy, seed):
    net = generate_network(GeneratorParams(nodes=nodes, decoy_fraction=decoy, threshold_w=3.5), seed)
    text = serialize_network(net)
    back = parse_network(text)
    assert back == net
    assert serialize_network(back) == text


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32))
def test_topological_order_respects_edges(nodes, seed):
    net = generate_network(GeneratorParams(nodes=nodes, skip_prob=0.5), seed)
    order = net.topological_order()
    pos = {v: k for k, v in enumerate(order)}
    assert sorted(order) == list(range(len(net.nodes)))
    assert all(pos[a] < pos[b] for a, b in net.edges)


def test_generated_spine_is_goal_complete():
    from tislab.oracle import min_info_complete_path

    for seed in range(200):
        net = generate_network(GeneratorParams(nodes=20, decoy_fraction=0.4), seed)
        assert min_info_complete_path(net).complete
