"""Precision decay schedule: the curriculum generator.

The required reach precision starts loose and shrinks along a power curve,
so early training collects rewards easily and later training is held to the
final tolerance. Difficulty is monotone: the precision never grows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .environment import AugmentedGoal
from .errors import ConfigError
from .kinematics import Pose


@dataclass(frozen=True)
class DecaySchedule:
    """Parameters of the precision decay curve.

    start: precision at epoch 0 (loosest).
    end: precision held once the decay is exhausted (strictest).
    length: number of epochs the decay spans.
    slope: power-curve exponent; 1 is linear, < 1 decays slowly at first.
    """

    start: float
    end: float
    length: int
    slope: float

    def __post_init__(self):
        if not (np.isfinite(self.start) and np.isfinite(self.end) and np.isfinite(self.slope)):
            raise ConfigError("schedule parameters must be finite")
        if self.end <= 0 or self.start <= self.end:
            raise ConfigError(f"need start > end > 0, got start={self.start} end={self.end}")
        if int(self.length) != self.length or self.length < 1:
            raise ConfigError(f"decay length must be a positive integer, got {self.length}")
        if self.slope <= 0:
            raise ConfigError(f"slope must be positive, got {self.slope}")
        object.__setattr__(self, "length", int(self.length))


def precision_at(schedule: DecaySchedule, epoch: int) -> float:
    """Required precision at a given epoch.

    Follows end + ((length - epoch) / length) ** slope * (start - end) for
    epochs inside the decay window and holds at `end` afterwards. Endpoints
    are returned exactly.
    """
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    if epoch == 0:
        return schedule.start
    if epoch >= schedule.length:
        return schedule.end
    frac = (schedule.length - epoch) / schedule.length
    return schedule.end + frac ** schedule.slope * (schedule.start - schedule.end)


def schedule_curve(schedule: DecaySchedule, epochs: int | None = None) -> np.ndarray:
    """The full (epoch, precision) curve as an (n, 2) array.

    Spans epochs 0..length when `epochs` is not given.
    """
    n = schedule.length if epochs is None else int(epochs)
    ks = np.arange(n + 1)
    eps = np.array([precision_at(schedule, int(k)) for k in ks])
    return np.column_stack([ks, eps])


def augment_goal(target: Pose, epsilon: float) -> AugmentedGoal:
    """Attach the current precision to a target pose.

    The result is the 7-component goal the policy and value networks are
    conditioned on.
    """
    return AugmentedGoal(target=target, epsilon=float(epsilon))
