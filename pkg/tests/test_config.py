"""Configuration parsing and validation tests."""

import numpy as np
import pytest

from etsafe.config import ConfigError, parse_config

GREEDY = """
[scenario]
kind = satellite
trigger_scheme = greedy
seed = 1
horizon = 100.0

[disturbance]
kind = seeded-piecewise-constant
d_bar = 0.001
hold_time = 1.0

[barrier]
gamma = 0.1

[initial]
position = 2.2, 0.0, 0.0
velocity = 0.0, 0.6742, 0.0
"""

PLANAR = """
[scenario]
kind = planar-demo
trigger_scheme = intermittent
seed = 2
horizon = 50.0

[disturbance]
kind = seeded-piecewise-constant
d_bar = 0.01
hold_time = 0.5

[barrier]
gamma = 2.0
rho = 1.0

[filter]
goal = 1.05, 0.0

[initial]
state = 0.0, 0.0
"""


def write(tmp_path, text, name="scenario.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestParseConfig:
    def test_satellite_defaults_fill_in(self, tmp_path):
        cfg = parse_config(write(tmp_path, GREEDY))
        assert cfg.kind == "satellite"
        assert cfg.trigger_scheme == "greedy"
        assert cfg.step_size == 0.05
        assert cfg.post_jump_margin == 0.01
        assert np.allclose(cfg.initial_state, [2.2, 0, 0, 0, 0.6742, 0])
        scenario = cfg.build_satellite()
        assert scenario.barrier.d_bar == 0.001

    def test_planar_builds(self, tmp_path):
        cfg = parse_config(write(tmp_path, PLANAR))
        scenario = cfg.build_planar()
        assert scenario.disturbance.dim == 2
        assert np.allclose(cfg.goal, [1.05, 0.0])

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            parse_config("/nonexistent/path.ini")

    def test_d_bar_mismatch_rejected(self, tmp_path):
        text = GREEDY.replace("[barrier]\ngamma = 0.1", "[barrier]\ngamma = 0.1\nd_bar = 0.002")
        with pytest.raises(ConfigError, match="d_bar"):
            parse_config(write(tmp_path, text))

    def test_d_bar_match_accepted(self, tmp_path):
        text = GREEDY.replace("[barrier]\ngamma = 0.1", "[barrier]\ngamma = 0.1\nd_bar = 0.001")
        parse_config(write(tmp_path, text))

    def test_maneuver_requires_model_path(self, tmp_path):
        text = GREEDY.replace("trigger_scheme = greedy", "trigger_scheme = maneuver")
        with pytest.raises(ConfigError, match="model_path"):
            parse_config(write(tmp_path, text))

    def test_scheme_kind_compatibility(self, tmp_path):
        text = GREEDY.replace("trigger_scheme = greedy", "trigger_scheme = intermittent")
        with pytest.raises(ConfigError, match="not available"):
            parse_config(write(tmp_path, text))

    def test_negative_horizon_rejected(self, tmp_path):
        text = GREEDY.replace("horizon = 100.0", "horizon = -5.0")
        with pytest.raises(ConfigError, match="horizon"):
            parse_config(write(tmp_path, text))

    def test_all_problems_reported_at_once(self, tmp_path):
        text = GREEDY.replace("horizon = 100.0", "horizon = -5.0").replace(
            "gamma = 0.1", "gamma = -1.0"
        )
        with pytest.raises(ConfigError) as err:
            parse_config(write(tmp_path, text))
        message = str(err.value)
        assert "horizon" in message and "gamma" in message

    def test_tau_model_path_resolved_relative_to_config(self, tmp_path):
        text = GREEDY.replace(
            "trigger_scheme = greedy", "trigger_scheme = maneuver"
        ) + "\n[tau]\nmodel_path = model.json\n"
        cfg = parse_config(write(tmp_path, text))
        assert cfg.tau_model_path == str(tmp_path / "model.json")

    def test_shipped_configs_are_valid(self):
        import os

        here = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
        for name in (
            "greedy_satellite.ini",
            "maneuver_satellite.ini",
            "planar_intermittent.ini",
        ):
            cfg = parse_config(os.path.join(here, "configs", name))
            if cfg.kind == "satellite":
                cfg.build_satellite()
            else:
                cfg.build_planar()
