import json

import pytest
import yaml

from hybridid.cli import ExperimentConfig, default_config, load_config, main
from hybridid.exceptions import ConfigError

TINY = {
    "system": "pendulum", "seed": 3, "output_dir": "tiny", "seeds": 1,
    "experiment": {"sim_episodes": 3, "hist_episodes": 2, "eval_episodes": 2,
                   "episode_length": 250, "stage1_iterations": 5, "hist_only_iterations": 5,
                   "ssm_orders": [2]},
    "retrain": [{"algorithm": "full", "delta_max": 0.2, "n_max": 10, "p_eval": 1,
                 "batch_size": 4, "lr": 0.001}],
    "pendulum_ppo": {"n_iterations": 1, "rollout_length": 50, "minibatch_size": 25,
                     "n_updates": 1, "n_workers": 2},
}


def write(path, data):
    path.write_text(yaml.safe_dump(data))
    return path


def test_missing_required_key_exits_2(tmp_path, capsys):
    data = dict(TINY)
    del data["seed"]
    cfg = write(tmp_path / "c.yaml", data)
    assert main(["simulate", str(cfg)]) == 2
    assert "seed" in capsys.readouterr().err


def test_unknown_keys_are_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path / "c.yaml", {**TINY, "typo": 1}))
    with pytest.raises(ConfigError):
        load_config(write(tmp_path / "c.yaml", {**TINY, "experiment": {"nope": 1}})) \
            .experiment_for()


def test_malformed_yaml_exits_2(tmp_path):
    bad = tmp_path / "c.yaml"
    bad.write_text("system: [unclosed")
    assert main(["simulate", str(bad)]) == 2


def test_config_round_trip(tmp_path):
    cfg = load_config(write(tmp_path / "c.yaml", TINY), ["experiment.encode_length=8", "seed=9"])
    assert cfg.seed == 9 and cfg.experiment["encode_length"] == 8
    cfg.dump(tmp_path / "d.yaml")
    assert load_config(tmp_path / "d.yaml") == cfg
    exp = cfg.experiment_for()
    assert exp.encode_length == 8 and exp.seed == 9 and exp.retrain.n_max == 10


def test_output_root_env(tmp_path, monkeypatch):
    monkeypatch.setenv("HYBRIDID_OUTPUT_ROOT", str(tmp_path))
    assert default_config("pendulum").output_path == tmp_path / "pendulum"
    with pytest.raises(ConfigError):
        default_config("unknown")


def test_stage_refuses_to_overwrite(tmp_path, monkeypatch):
    monkeypatch.setenv("HYBRIDID_OUTPUT_ROOT", str(tmp_path))
    cfg = write(tmp_path / "c.yaml", TINY)
    assert main(["simulate", str(cfg)]) == 0
    assert main(["simulate", str(cfg)]) == 2
    assert main(["simulate", str(cfg), "--overwrite"]) == 0


def test_stage_needs_its_inputs(tmp_path, monkeypatch):
    monkeypatch.setenv("HYBRIDID_OUTPUT_ROOT", str(tmp_path))
    assert main(["retrain", str(write(tmp_path / "c.yaml", TINY))]) == 2


def test_tiny_reproduce_is_deterministic(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("HYBRIDID_OUTPUT_ROOT", str(tmp_path))
    outputs = []
    for name in ("a", "b"):
        cfg = write(tmp_path / f"{name}.yaml", {**TINY, "output_dir": name})
        code = main(["reproduce", "pendulum", "--config", str(cfg)])
        assert code in (0, 4)
        root = tmp_path / name
        outputs.append(((root / "seed_3" / "evaluate" / "metrics.csv").read_bytes(),
                        (root / "ppo" / "returns.csv").read_bytes(),
                        (root / "summary" / "criteria.csv").read_bytes()))
    assert outputs[0] == outputs[1]
    printed = capsys.readouterr().out
    assert "identification-ordering" in printed and "ppo-pendulum" in printed
    checks = json.loads((tmp_path / "a" / "seed_3" / "evaluate" / "checks.json").read_text())
    assert set(checks) >= {"beats_ssm", "delta1_bound"}
