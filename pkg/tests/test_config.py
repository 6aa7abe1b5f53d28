"""Experiment configuration: defaults, validation and the JSON format."""
import pytest

from swpemux.config import ExperimentConfig


def test_defaults():
    cfg = ExperimentConfig()
    assert cfg.m == 19
    assert cfg.chi == 0.01
    assert cfg.theta == 45.0
    assert cfg.eta_d == 0.1
    assert cfg.eta_as == 0.5
    assert cfg.gamma == 0.3
    assert cfg.v1 == 0.937
    assert cfg.beta == 0.85
    assert cfg.tau_c == 235.0
    assert cfg.tau_ref == 0.7
    assert cfg.dark_rate == 0.0
    assert cfg.delta_t_train == 7.0
    assert cfg.rep_rate == 4.6e4


@pytest.mark.parametrize(
    "changes",
    [
        {"m": 0},
        {"m": -3},
        {"m": True},
        {"chi": 0.0},
        {"chi": 1.0},
        {"theta": -1.0},
        {"theta": 90.5},
        {"eta_d": 1.5},
        {"eta_as": -0.1},
        {"gamma": 2.0},
        {"v1": 0.0},
        {"v1": 1.5},
        {"beta": -0.2},
        {"tau_c": 0.0},
        {"tau_c": -5.0},
        {"tau_ref": -0.1},
        {"dark_rate": -1e-6},
        {"delta_t_train": 0.0},
        {"rep_rate": 0.0},
    ],
)
def test_validation_rejects(changes):
    with pytest.raises(ValueError):
        ExperimentConfig(**changes)


def test_infinite_memory_allowed():
    cfg = ExperimentConfig(tau_c=float("inf"))
    assert cfg.tau_c == float("inf")


def test_replace_revalidates():
    cfg = ExperimentConfig()
    assert cfg.replace(m=5).m == 5
    with pytest.raises(ValueError):
        cfg.replace(chi=0.0)


class TestFromDict:
    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown"):
            ExperimentConfig.from_dict({"m": 19, "typo": 1.0})

    def test_integral_float_m(self):
        assert ExperimentConfig.from_dict({"m": 19.0}).m == 19

    def test_fractional_m(self):
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict({"m": 2.5})

    def test_partial_dict_uses_defaults(self):
        cfg = ExperimentConfig.from_dict({"v1": 0.9})
        assert cfg.v1 == 0.9
        assert cfg.m == 19


def test_json_round_trip():
    cfg = ExperimentConfig(m=7, chi=0.02, v1=0.88)
    assert ExperimentConfig.loads(cfg.dumps()) == cfg


def test_file_round_trip(tmp_path):
    cfg = ExperimentConfig(m=3, tau_c=120.0)
    path = tmp_path / "config.json"
    cfg.save(str(path))
    assert ExperimentConfig.load(str(path)) == cfg
    # sorted keys make the file diff-stable
    text = path.read_text()
    assert text.index('"beta"') < text.index('"chi"') < text.index('"m"')
