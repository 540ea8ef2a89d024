"""Run configuration: defaults, named profiles, and YAML round-trip.

The default values mirror the full-scale training setup. The `desk`
profile is a documented shrink (fewer epochs, shorter episodes, smaller
networks, three actuated joints, a narrower workspace) so a complete
curriculum-versus-fixed comparison finishes on a laptop CPU.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import yaml

from .curriculum import DecaySchedule
from .errors import ConfigError
from .kinematics import UR5E_DH_ROWS

REWARD_MODES = ("dense", "sparse")
OPTIMIZERS = ("adam", "sgd")
PROFILES = ("paper", "desk")

# Desk workspace: base/shoulder/elbow actuated within +/- 0.7 rad of home.
_DESK_SPAN = 0.7
_DESK_LIMITS = (
    (-np.pi / 2 - _DESK_SPAN, -np.pi / 2 + _DESK_SPAN),
    (-np.pi / 2 - _DESK_SPAN, -np.pi / 2 + _DESK_SPAN),
    (-_DESK_SPAN, _DESK_SPAN),
    (-np.pi, np.pi),
    (-np.pi, np.pi),
    (-np.pi, np.pi),
)
_FULL_LIMITS = tuple((-np.pi, np.pi) for _ in range(6))


def _default_schedule() -> DecaySchedule:
    return DecaySchedule(start=0.15, end=0.01, length=1000, slope=0.8)


@dataclass
class RunConfig:
    """Everything a training run depends on, explicit and serializable."""

    reward: str = "dense"
    seed: int = 0
    epochs: int = 3000
    episodes_per_epoch: int = 10
    steps_per_episode: int = 100
    train_steps_per_epoch: int = 64
    batch_size: int = 128
    buffer_capacity: int = 5_000_000
    gamma: float = 0.98
    tau: float = 0.01
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    noise_sigma: float = 0.1
    explore_start: float = 0.2
    explore_end: float = 0.05
    optimizer: str = "adam"
    hidden_widths: tuple = (512, 256, 64)
    schedule: DecaySchedule = field(default_factory=_default_schedule)
    baseline: bool = False
    baseline_epsilon: float | None = None
    eval_epsilon: float | None = None
    eval_every: int = 100
    steps_record_every: int = 10
    eval_goals: int = 100
    checkpoint_every: int = 0
    checkpoint_include_buffer: bool = False
    position_weight: float = 0.5
    orientation_weight: float = 0.5
    active_joints: tuple = (0, 1, 2, 4, 5)
    joint_limits: tuple = _FULL_LIMITS
    dh_chain: tuple = UR5E_DH_ROWS
    wall_clock_in_metrics: bool = False

    def __post_init__(self):
        if self.reward not in REWARD_MODES:
            raise ConfigError(f"reward must be one of {REWARD_MODES}, got {self.reward!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        for name in ("epochs", "episodes_per_epoch", "steps_per_episode", "batch_size",
                     "buffer_capacity", "eval_every", "steps_record_every", "eval_goals"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive count")
            setattr(self, name, int(getattr(self, name)))
        for name in ("train_steps_per_epoch", "checkpoint_every", "seed"):
            if int(getattr(self, name)) < 0:
                raise ConfigError(f"{name} must be non-negative")
            setattr(self, name, int(getattr(self, name)))
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError(f"tau must lie in [0, 1], got {self.tau}")
        if self.actor_lr <= 0 or self.critic_lr <= 0:
            raise ConfigError("learning rates must be positive")
        if self.noise_sigma < 0:
            raise ConfigError("noise sigma must be non-negative")
        for name in ("explore_start", "explore_end"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if not isinstance(self.schedule, DecaySchedule):
            self.schedule = DecaySchedule(**dict(self.schedule))
        for name in ("baseline_epsilon", "eval_epsilon"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be positive when given")
        self.hidden_widths = tuple(int(w) for w in self.hidden_widths)
        self.active_joints = tuple(int(i) for i in self.active_joints)
        self.joint_limits = tuple(tuple(float(v) for v in row) for row in self.joint_limits)
        self.dh_chain = tuple(tuple(float(v) for v in row) for row in self.dh_chain)

    @property
    def resolved_baseline_epsilon(self) -> float:
        """Fixed precision used when the curriculum is disabled."""
        return self.baseline_epsilon if self.baseline_epsilon is not None else self.schedule.end

    @property
    def resolved_eval_epsilon(self) -> float:
        """Precision used for the final head-to-head evaluation."""
        return self.eval_epsilon if self.eval_epsilon is not None else self.schedule.end

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["schedule"] = {
            "start": self.schedule.start,
            "end": self.schedule.end,
            "length": self.schedule.length,
            "slope": self.schedule.slope,
        }
        data["hidden_widths"] = list(self.hidden_widths)
        data["active_joints"] = list(self.active_joints)
        data["joint_limits"] = [list(row) for row in self.joint_limits]
        data["dh_chain"] = [list(row) for row in self.dh_chain]
        return data

    @classmethod
    def from_dict(cls, data: dict, base: "RunConfig | None" = None) -> "RunConfig":
        """Overlay a plain dict (e.g. parsed YAML) onto a base config.

        Unknown keys, at the top level or inside `schedule`, are errors.
        """
        if not isinstance(data, dict):
            raise ConfigError(f"config must be a mapping, got {type(data).__name__}")
        base = base if base is not None else cls()
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = base.to_dict()
        for key, value in data.items():
            if key == "schedule":
                if not isinstance(value, dict):
                    raise ConfigError("schedule must be a mapping")
                bad = set(value) - {"start", "end", "length", "slope"}
                if bad:
                    raise ConfigError(f"unknown schedule keys: {sorted(bad)}")
                merged["schedule"].update(value)
            else:
                merged[key] = value
        merged["schedule"] = DecaySchedule(**merged["schedule"])
        return cls(**merged)


def paper_profile(reward: str = "dense") -> RunConfig:
    """Full-scale defaults; the sparse variant decays more slowly."""
    if reward == "sparse":
        schedule = DecaySchedule(start=0.25, end=0.01, length=2500, slope=0.8)
    else:
        schedule = _default_schedule()
    return RunConfig(reward=reward, schedule=schedule)


def desk_profile(reward: str = "dense") -> RunConfig:
    """Laptop-scale shrink used by CI and the acceptance experiments."""
    start = 0.25 if reward == "sparse" else 0.15
    return RunConfig(
        reward=reward,
        epochs=600,
        steps_per_episode=50,
        hidden_widths=(64, 64),
        buffer_capacity=300_000,
        schedule=DecaySchedule(start=start, end=0.05, length=400, slope=0.8),
        active_joints=(0, 1, 2),
        joint_limits=_DESK_LIMITS,
    )


def profile_config(name: str, reward: str = "dense") -> RunConfig:
    if name == "paper":
        return paper_profile(reward)
    if name == "desk":
        return desk_profile(reward)
    raise ConfigError(f"unknown profile {name!r}; use one of {PROFILES}")


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    """Read a YAML config file and overlay it onto `base`."""
    with open(path) as f:
        data = yaml.safe_load(f)
    if data is None:
        data = {}
    return RunConfig.from_dict(data, base=base)


def save_config(config: RunConfig, path):
    with open(path, "w") as f:
        yaml.safe_dump(config.to_dict(), f, sort_keys=False)
