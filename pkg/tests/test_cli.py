import io
import json
import subprocess
import sys

import pytest

from tislab.cli import main
from tislab.config import parse_config, serialize_config
from tislab.network import GeneratorParams, GoalNetwork, generate_network, serialize_network

CONFIG = """
[experiment]
schema_version = 1
seed = 2
replicates = 2

[network]
nodes = 9

[policy]
variants = greedy, oracle

[output]
plots = fig5
"""


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def cfg_path(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(CONFIG)
    return path


@pytest.fixture
def net_path(tmp_path):
    path = tmp_path / "net.tisnet"
    path.write_text(serialize_network(generate_network(GeneratorParams(nodes=9), 3)))
    return path


def test_simulate_writes_outputs(tmp_path, cfg_path):
    code, text = run("simulate", "--config", str(cfg_path), "--out", str(tmp_path / "o"))
    assert code == 0
    assert (tmp_path / "o" / "runs.csv").exists() and (tmp_path / "o" / "fig5.svg").exists()
    assert json.loads(text.splitlines()[1])["runs"] == 4


def test_simulate_single_planner(tmp_path, cfg_path):
    code, _ = run("simulate", "--config", str(cfg_path), "--out", str(tmp_path / "o"), "--policy", "planner",
                  "--horizon", "2", "--format", "json")
    assert code == 0
    assert not (tmp_path / "o" / "runs.csv").exists()
    bundle = json.loads((tmp_path / "o" / "bundle.json").read_text())
    assert {row[3] for row in bundle["tables"]["runs"]["rows"]} == {"planner:2:1"}


def test_planner_without_horizon_is_invalid(tmp_path, cfg_path):
    assert run("simulate", "--config", str(cfg_path), "--out", str(tmp_path), "--policy", "planner")[0] == 1


def test_missing_config_is_io_error(tmp_path):
    assert run("simulate", "--config", str(tmp_path / "none.ini"))[0] == 3


def test_output_onto_a_file_is_io_error(tmp_path, cfg_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert run("simulate", "--config", str(cfg_path), "--out", str(blocker))[0] == 3


def test_invalid_config_value(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text(CONFIG.replace("nodes = 9", "nodes = -4"))
    assert run("simulate", "--config", str(path))[0] == 1


def test_bad_flag_exits_one(cfg_path):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--config", str(cfg_path), "--policy", "telepathy"])
    assert exc.value.code == 1


def test_evolve_needs_section(cfg_path):
    assert run("evolve", "--config", str(cfg_path))[0] == 1


def test_preset_prints_a_parseable_config():
    code, text = run("preset", "fig5-trajectories", "--seed", "9")
    assert code == 0
    cfg = parse_config(text)
    assert cfg.seed == 9 and serialize_config(cfg) == text


def test_unknown_preset():
    assert run("preset", "nope")[0] == 1


def test_preset_run(tmp_path):
    code, _ = run("preset", "proxy-sweep", "--run", "--out", str(tmp_path))
    assert code == 0 and (tmp_path / "proxy_sweep.csv").exists()


def test_oracle_json_has_three_results(net_path):
    code, text = run("oracle", "--network", str(net_path))
    assert code == 0
    data = json.loads(text)
    assert set(data) == {"max_info", "complexity", "optimal"}
    assert data["max_info"]["total_info"] >= data["complexity"]["total_info"]


def test_oracle_csv_from_config(cfg_path):
    code, text = run("oracle", "--config", str(cfg_path), "--format", "csv")
    assert code == 0 and len(text.strip().splitlines()) == 4


def test_oracle_needs_a_network():
    assert run("oracle")[0] == 1


def test_infeasible_network_is_runtime_error(tmp_path):
    path = tmp_path / "dead.tisnet"
    path.write_text(serialize_network(GoalNetwork.from_arrays([1.0, 1.0], [1.0, 0.0], [(0, 1)])))
    assert run("oracle", "--network", str(path))[0] == 2


def test_metrics_scores_bundle_trajectories(tmp_path, cfg_path):
    run("simulate", "--config", str(cfg_path), "--out", str(tmp_path / "o"), "--format", "json")
    code, text = run("metrics", "--network", str(tmp_path / "o" / "network-rep0.tisnet"),
                     "--trajectory", str(tmp_path / "o" / "bundle.json"), "--format", "json")
    assert code == 0
    reports = json.loads(text)
    assert reports and all(0 <= r["solving_u"] <= 1 for r in reports)


def test_metrics_rejects_malformed_trajectory(tmp_path, net_path):
    path = tmp_path / "t.json"
    path.write_text('{"visits": 3}')
    assert run("metrics", "--network", str(net_path), "--trajectory", str(path))[0] == 1


def test_plot_command(tmp_path, cfg_path):
    run("simulate", "--config", str(cfg_path), "--out", str(tmp_path / "o"))
    code, _ = run("plot", "--bundle", str(tmp_path / "o"), "--kind", "fig1b", "--out", str(tmp_path / "p.svg"))
    assert code == 0 and (tmp_path / "p.svg").read_text().lstrip().startswith("<?xml")
    # the trajectories config has no sweep series
    assert run("plot", "--bundle", str(tmp_path / "o"), "--kind", "fig4")[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tislab", "preset", "proxy-sweep"], capture_output=True, text=True)
    assert res.returncode == 0 and "[proxy]" in res.stdout
