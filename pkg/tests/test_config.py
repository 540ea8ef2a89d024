import numpy as np
import pytest
import yaml

from reachrl.config import (
    RunConfig,
    desk_profile,
    load_config,
    paper_profile,
    profile_config,
    save_config,
)
from reachrl.curriculum import DecaySchedule
from reachrl.errors import ConfigError


class TestDefaults:
    def test_full_scale_defaults(self):
        cfg = RunConfig()
        assert cfg.gamma == 0.98
        assert cfg.tau == 0.01
        assert cfg.actor_lr == 1e-4
        assert cfg.critic_lr == 1e-3
        assert cfg.noise_sigma == 0.1
        assert cfg.buffer_capacity == 5_000_000
        assert cfg.batch_size == 128
        assert cfg.epochs == 3000
        assert cfg.episodes_per_epoch == 10
        assert cfg.steps_per_episode == 100
        assert cfg.train_steps_per_epoch == 64
        assert cfg.hidden_widths == (512, 256, 64)

    def test_paper_profile_schedules(self):
        dense = paper_profile("dense")
        assert (dense.schedule.start, dense.schedule.length) == (0.15, 1000)
        sparse = paper_profile("sparse")
        assert (sparse.schedule.start, sparse.schedule.length) == (0.25, 2500)
        assert dense.schedule.slope == sparse.schedule.slope == 0.8

    def test_desk_profile_shrinks(self):
        cfg = desk_profile("sparse")
        assert cfg.epochs == 600
        assert cfg.steps_per_episode == 50
        assert cfg.hidden_widths == (64, 64)
        assert cfg.active_joints == (0, 1, 2)
        assert cfg.schedule == DecaySchedule(0.25, 0.05, 400, 0.8)
        assert desk_profile("dense").schedule.start == 0.15

    def test_unknown_profile(self):
        with pytest.raises(ConfigError):
            profile_config("cluster")

    def test_resolved_epsilons_default_to_schedule_end(self):
        cfg = desk_profile("dense")
        assert cfg.resolved_baseline_epsilon == cfg.schedule.end
        assert cfg.resolved_eval_epsilon == cfg.schedule.end
        explicit = RunConfig(baseline_epsilon=0.2, eval_epsilon=0.07)
        assert explicit.resolved_baseline_epsilon == 0.2
        assert explicit.resolved_eval_epsilon == 0.07


class TestValidation:
    @pytest.mark.parametrize("field,value", [
        ("reward", "shaped"),
        ("optimizer", "rmsprop"),
        ("epochs", 0),
        ("batch_size", 0),
        ("gamma", 1.5),
        ("tau", -0.1),
        ("actor_lr", 0.0),
        ("explore_start", 2.0),
        ("baseline_epsilon", 0.0),
    ])
    def test_bad_values_rejected(self, field, value):
        with pytest.raises(ConfigError):
            RunConfig(**{field: value})

    def test_train_steps_zero_allowed(self):
        assert RunConfig(train_steps_per_epoch=0).train_steps_per_epoch == 0


class TestFromDict:
    def test_unknown_key_is_an_error(self):
        with pytest.raises(ConfigError) as err:
            RunConfig.from_dict({"leraning_rate": 0.1})
        assert "leraning_rate" in str(err.value)

    def test_unknown_schedule_key_is_an_error(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"schedule": {"start": 0.2, "alpha": 0.8}})

    def test_partial_schedule_merge(self):
        base = desk_profile("sparse")
        cfg = RunConfig.from_dict({"schedule": {"length": 250}}, base=base)
        assert cfg.schedule.length == 250
        assert cfg.schedule.start == base.schedule.start

    def test_overlay_keeps_base_fields(self):
        base = desk_profile("dense")
        cfg = RunConfig.from_dict({"seed": 77}, base=base)
        assert cfg.seed == 77
        assert cfg.epochs == base.epochs

    def test_non_mapping_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict([1, 2, 3])


class TestYamlRoundTrip:
    def test_save_and_load(self, tmp_path):
        cfg = desk_profile("sparse")
        path = tmp_path / "run.yaml"
        save_config(cfg, path)
        loaded = load_config(path, base=RunConfig())
        assert loaded == cfg

    def test_load_overlay(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(yaml.safe_dump({
            "reward": "sparse",
            "seed": 3,
            "schedule": {"start": 0.3, "end": 0.02, "length": 500, "slope": 1.2},
            "joint_limits": [[-1.6, -1.5]] + [[-np.pi, np.pi]] * 5,
        }))
        cfg = load_config(path, base=desk_profile("sparse"))
        assert cfg.reward == "sparse"
        assert cfg.schedule == DecaySchedule(0.3, 0.02, 500, 1.2)
        assert cfg.joint_limits[0] == (-1.6, -1.5)

    def test_empty_file_gives_base(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_config(path, base=desk_profile("dense")) == desk_profile("dense")

    def test_dh_chain_loadable_from_config(self, tmp_path):
        rows = [[0.1, 0.2, 0.3, 0.0]] * 6
        path = tmp_path / "chain.yaml"
        path.write_text(yaml.safe_dump({"dh_chain": rows}))
        cfg = load_config(path, base=RunConfig())
        assert cfg.dh_chain == tuple(tuple(r) for r in rows)
