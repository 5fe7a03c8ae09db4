import pytest
from hypothesis import given, settings, strategies as st

from tislab.config import PRESETS, parse_config, preset, serialize_config
from tislab.errors import ConfigError

MINIMAL = """
[experiment]
schema_version = 1
seed = 5

[network]
nodes = 9
"""


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.seed == 5 and cfg.network.nodes == 9 and cfg.mode == "trajectories"
    assert cfg.policy.variants == ("greedy",)


def test_missing_network_section_is_named():
    with pytest.raises(ConfigError) as exc:
        parse_config("[experiment]\nschema_version = 1\n")
    assert exc.value.path == "network"


@pytest.mark.parametrize("extra,path", [
    ("[agent]\nbase_ability = -2\n", "agent.base_ability"),
    ("[agent]\nwings = 2\n", "agent.wings"),
    ("[policy]\nvariants = teleport\n", "policy.variants"),
    ("[metrics]\nalpha = 0.9\nbeta = 0.9\n", "metrics.alpha"),
    ("[output]\nformats = xml\n", "output.formats"),
    ("[evolution]\np_y = 2\n", "evolution.p_y"),
    ("[bogus]\nx = 1\n", "bogus"),
])
def test_errors_carry_section_and_field(extra, path):
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL + extra)
    assert exc.value.path == path


def test_bad_network_value_names_field():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL.replace("nodes = 9", "nodes = 1"))
    assert exc.value.path == "network.nodes"


def test_unsupported_schema_version():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL.replace("schema_version = 1", "schema_version = 7"))
    assert exc.value.path == "experiment.schema_version"


def test_mode_requires_its_section():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL.replace("seed = 5", "seed = 5\nmode = evolution"))
    assert exc.value.path == "evolution"


def test_scenarios_override_default_agent():
    cfg = parse_config(MINIMAL + "[agent]\nbase_ability = 3.0\n[agent.fast]\nnoise_sigma = 1.5\n")
    (name, agent), = cfg.scenarios
    assert name == "fast" and agent.base_ability == 3.0 and agent.noise_sigma == 1.5


@pytest.mark.parametrize("name", list(PRESETS))
def test_presets_round_trip_byte_identical(name):
    text = serialize_config(preset(name))
    assert serialize_config(parse_config(text)) == text
    assert parse_config(text) == preset(name)


def test_fig5_preset_has_four_policies():
    cfg = preset("fig5-trajectories")
    assert {k.variant for k in cfg.policy.kinds()} == {"random_walk", "greedy_solver", "horizon_planner",
                                                      "oracle_follower"}
    assert cfg.replicates == 1 and cfg.network_file is None


def test_unknown_preset_lists_names():
    with pytest.raises(ConfigError) as exc:
        preset("fig9")
    assert all(name in str(exc.value) for name in PRESETS)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(2, 500), st.floats(0.1, 20), st.floats(0, 1),
       st.sampled_from(["greedy", "planner:2:1", "random", "oracle"]), st.integers(1, 50))
def test_generated_configs_round_trip(seed, nodes, ability, decoy, policy, reps):
    text = serialize_config(parse_config(
        f"[experiment]\nschema_version = 1\nseed = {seed}\nreplicates = {reps}\n"
        f"[network]\nnodes = {nodes}\ndecoy_fraction = {decoy!r}\n"
        f"[agent]\nbase_ability = {ability!r}\n[policy]\nvariants = {policy}\n"))
    assert serialize_config(parse_config(text)) == text
