import pytest
import yaml

from iomt_cluster.config import PRESETS, dump_config, env_overrides, load_config, preset
from iomt_cluster.errors import ConfigError


def test_presets():
    d = preset("desk")
    assert (d.network.node_count, d.network.max_rounds) == (100, 100)
    p = preset("full-scale")
    assert (p.network.node_count, p.network.max_rounds, p.network.packet_size_bits) == (1000, 500, 1500)
    assert p.network.area == (500.0, 500.0) and p.network.bs_position == (500.0, 500.0)
    assert p.network.initial_energy == 2.0
    with pytest.raises(ConfigError):
        preset("huge")
    assert sorted(PRESETS) == ["desk", "full-scale"]


def test_yaml_round_trip(tmp_path):
    cfg = load_config(environ={})
    path = tmp_path / "c.yaml"
    path.write_text(dump_config(cfg))
    again = load_config(path, environ={})
    assert again == cfg


def test_file_values_and_preset_key(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump({
        "preset": "full-scale", "selector": "pso",
        "network": {"node_count": 200, "radio": {"fs_amp": 2e-11}},
        "fitness": {"weights": {"w1": 0.6, "w2": 0.1, "w3": 0.1, "w4": 0.1, "w5": 0.1}},
    }))
    cfg = load_config(path, environ={})
    assert cfg.selector == "pso" and cfg.network.node_count == 200
    assert cfg.network.max_rounds == 500
    assert cfg.network.radio.fs_amp == 2e-11
    assert cfg.fitness.weights.w1 == 0.6


def test_env_overrides(tmp_path):
    env = {"SIM_SELECTOR": "random", "SIM_NETWORK__NODE_COUNT": "50", "OTHER": "x"}
    assert env_overrides(env) == {"selector": "random", "network": {"node_count": 50}}
    cfg = load_config(environ=env)
    assert cfg.selector == "random" and cfg.network.node_count == 50


@pytest.mark.parametrize("doc", [
    {"network": {"nodes": 4}},
    {"selector": "aco"},
    {"network": {"node_count": 3, "cluster_count": 5}},
    {"fitness": {"weights": {"w1": 0.9, "w2": 0.9, "w3": 0, "w4": 0, "w5": 0}}},
    {"fitness": {"mode": "weird"}},
    {"sleep_probability": 2},
    {"tx_power_dbm": 35},
    {"rank_order": "zigzag"},
    {"network": 5},
    {"network": {"node_count": "many"}},
])
def test_bad_files_rejected(tmp_path, doc):
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(doc))
    with pytest.raises(ConfigError):
        load_config(path, environ={})


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="nope.yaml"):
        load_config(tmp_path / "nope.yaml", environ={})
    bad = tmp_path / "m.yaml"
    bad.write_text("a: [1, 2\n")
    with pytest.raises(ConfigError):
        load_config(bad, environ={})
