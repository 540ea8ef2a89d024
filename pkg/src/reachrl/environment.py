"""Multi-goal reach MDP for a kinematically simulated 6-DOF arm.

Every episode starts from the same home configuration and targets a pose
sampled by drawing joint angles uniformly inside their limits, which keeps
every goal reachable by construction. Actions are normalized joint
increments; the fourth joint is never actuated directly, it is re-derived
from joints two and three each step so the wrist link stays vertical.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .kinematics import (
    HOME_JOINTS,
    UR5E,
    DHChain,
    Pose,
    clamp_to_limits,
    couple_joint4,
    default_joint_limits,
    forward_kinematics,
    pose_distance,
)

# Largest joint change (rad) a unit action component can command.
MAX_JOINT_STEP = np.pi / 6

# Penalty for every unsuccessful step under the sparse reward.
SPARSE_STEP_PENALTY = 0.02

# Joint index that is derived, never actuated.
COUPLED_JOINT = 3


class RewardMode(enum.Enum):
    DENSE = "dense"
    SPARSE = "sparse"

    @classmethod
    def from_name(cls, name) -> "RewardMode":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ConfigError(f"unknown reward mode {name!r}; use 'dense' or 'sparse'") from None


@dataclass(frozen=True)
class State:
    """End-effector pose plus joint angles; flattens to a 12-vector."""

    pose: Pose
    joints: np.ndarray

    def vector(self) -> np.ndarray:
        return np.concatenate([self.pose.vector(), self.joints])


@dataclass(frozen=True)
class AugmentedGoal:
    """Target pose plus the precision currently required to count as a hit."""

    target: Pose
    epsilon: float

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ConfigError(f"goal precision must be positive, got {self.epsilon}")

    def vector(self) -> np.ndarray:
        return np.append(self.target.vector(), self.epsilon)


@dataclass(frozen=True)
class StepResult:
    next_state: State
    reward: float
    done: bool
    success: bool
    dist_p: float
    dist_o: float


def reward_dense(dist_p: float, dist_o: float, weighted: float, epsilon: float) -> float:
    """1 on success, otherwise the negated weighted pose distance."""
    if dist_p <= epsilon and dist_o <= epsilon:
        return 1.0
    return -weighted


def reward_sparse(dist_p: float, dist_o: float, epsilon: float) -> float:
    """1 on success, otherwise a small constant energy penalty."""
    if dist_p <= epsilon and dist_o <= epsilon:
        return 1.0
    return -SPARSE_STEP_PENALTY


class ReachEnv:
    """Reach MDP instance. Single-owner mutable state; cheap to replicate.

    `active_joints` lists the directly actuated joints; all others keep
    their home angle (the coupled joint is always re-derived). Shrinking
    the active set is how the desk-scale profile reduces the task.
    """

    def __init__(self, chain: DHChain = UR5E, limits=None,
                 reward_mode=RewardMode.DENSE, position_weight: float = 0.5,
                 orientation_weight: float = 0.5, active_joints=(0, 1, 2, 4, 5)):
        self.chain = chain
        self.limits = np.array(limits if limits is not None else default_joint_limits(), dtype=float)
        if self.limits.shape != (6, 2):
            raise ConfigError(f"joint limits must be a (6, 2) table, got shape {self.limits.shape}")
        if np.any(self.limits[:, 0] >= self.limits[:, 1]):
            raise ConfigError("every joint limit interval needs lo < hi")
        if np.any(HOME_JOINTS < self.limits[:, 0]) or np.any(HOME_JOINTS > self.limits[:, 1]):
            raise ConfigError("joint limits must contain the home configuration")
        self.reward_mode = RewardMode.from_name(reward_mode)
        if abs(position_weight + orientation_weight - 1.0) > 1e-9 or position_weight < 0 or orientation_weight < 0:
            raise ConfigError("distance weights must be non-negative and sum to 1")
        self.position_weight = float(position_weight)
        self.orientation_weight = float(orientation_weight)
        self.active_joints = tuple(sorted(set(int(i) for i in active_joints)))
        if not self.active_joints:
            raise ConfigError("at least one joint must be active")
        if any(i < 0 or i > 5 for i in self.active_joints):
            raise ConfigError(f"active joint indices must lie in 0..5, got {self.active_joints}")
        if COUPLED_JOINT in self.active_joints:
            raise ConfigError("joint 4 is derived from joints 2 and 3 and cannot be actuated")
        # Joint preimage of the most recently sampled goal (testing hook).
        self.last_goal_joints = None

    def sample_goal_joints(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform joint configuration inside the limits, coupling applied."""
        joints = HOME_JOINTS.copy()
        for i in self.active_joints:
            joints[i] = rng.uniform(self.limits[i, 0], self.limits[i, 1])
        joints[COUPLED_JOINT] = couple_joint4(joints[1], joints[2])
        return clamp_to_limits(joints, self.limits)

    def sample_goal(self, rng: np.random.Generator) -> Pose:
        joints = self.sample_goal_joints(rng)
        self.last_goal_joints = joints
        return forward_kinematics(joints, self.chain)

    def reset(self, rng: np.random.Generator, epsilon: float) -> tuple:
        """Start an episode: home configuration, fresh goal at `epsilon`."""
        joints = HOME_JOINTS.copy()
        state = State(pose=forward_kinematics(joints, self.chain), joints=joints)
        goal = AugmentedGoal(target=self.sample_goal(rng), epsilon=float(epsilon))
        return state, goal

    def step(self, state: State, action, goal: AugmentedGoal) -> StepResult:
        """Apply normalized joint increments and score the resulting pose."""
        act = np.asarray(action, dtype=float)
        if act.shape != (6,):
            raise ValueError(f"action must have 6 components, got shape {act.shape}")
        if not np.all(np.isfinite(act)):
            raise ValueError("action components must be finite")
        if np.any(np.abs(act) > 1.0):
            raise ValueError("action components must lie in [-1, 1]")

        joints = state.joints.copy()
        for i in self.active_joints:
            joints[i] = joints[i] + act[i] * MAX_JOINT_STEP
        joints = clamp_to_limits(joints, self.limits)
        joints[COUPLED_JOINT] = couple_joint4(joints[1], joints[2])
        joints = clamp_to_limits(joints, self.limits)

        pose = forward_kinematics(joints, self.chain)
        dist_p, dist_o, weighted = pose_distance(
            pose, goal.target, self.position_weight, self.orientation_weight)
        success = dist_p <= goal.epsilon and dist_o <= goal.epsilon
        if self.reward_mode is RewardMode.DENSE:
            reward = reward_dense(dist_p, dist_o, weighted, goal.epsilon)
        else:
            reward = reward_sparse(dist_p, dist_o, goal.epsilon)
        return StepResult(
            next_state=State(pose=pose, joints=joints),
            reward=reward,
            done=success,
            success=success,
            dist_p=dist_p,
            dist_o=dist_o,
        )
