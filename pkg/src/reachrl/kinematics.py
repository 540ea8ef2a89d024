"""Forward kinematics and pose arithmetic for a 6-DOF serial arm.

All functions here are pure: they never mutate their inputs and are safe
to call concurrently. Angles are radians, lengths are meters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * np.pi

# Fixed start configuration for every episode (arm pointing up, wrist level).
HOME_JOINTS = np.array([-np.pi / 2, -np.pi / 2, 0.0, np.pi / 2, np.pi / 2, -np.pi / 2])

# Manufacturer DH table for the UR5e, one row per joint: (a, d, alpha, theta0).
UR5E_DH_ROWS = (
    (0.0, 0.1625, np.pi / 2, 0.0),
    (-0.425, 0.0, 0.0, 0.0),
    (-0.3922, 0.0, 0.0, 0.0),
    (0.0, 0.1333, np.pi / 2, 0.0),
    (0.0, 0.0997, -np.pi / 2, 0.0),
    (0.0, 0.0996, 0.0, 0.0),
)


def wrap_angle(theta):
    """Wrap an angle or array of angles into (-pi, pi].

    Uses round-to-nearest rather than mod so the result is exactly odd in
    its argument (wrapped differences keep distances symmetric) and small
    angles pass through without any precision loss.
    """
    arr = np.asarray(theta, dtype=float)
    wrapped = arr - TWO_PI * np.round(arr / TWO_PI)
    wrapped = np.where(wrapped > np.pi, wrapped - TWO_PI, wrapped)
    wrapped = np.where(wrapped <= -np.pi, wrapped + TWO_PI, wrapped)
    if np.isscalar(theta):
        return float(wrapped)
    return wrapped


def as_joint_vector(joints) -> np.ndarray:
    """Validate and convert a 6-joint configuration to a float array."""
    arr = np.asarray(joints, dtype=float)
    if arr.shape != (6,):
        raise ValueError(f"expected 6 joint angles, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("joint angles must be finite")
    return arr


@dataclass(frozen=True)
class Pose:
    """End-effector position (m) plus roll-pitch-yaw orientation (rad).

    Orientation components are wrapped into (-pi, pi] at construction.
    """

    x: float
    y: float
    z: float
    rx: float
    ry: float
    rz: float

    def __post_init__(self):
        for name in ("rx", "ry", "rz"):
            object.__setattr__(self, name, wrap_angle(float(getattr(self, name))))
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def orientation(self) -> np.ndarray:
        return np.array([self.rx, self.ry, self.rz])

    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.rx, self.ry, self.rz])

    @classmethod
    def from_vector(cls, vec) -> "Pose":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (6,):
            raise ValueError(f"expected a 6-vector, got shape {vec.shape}")
        return cls(*vec)


@dataclass(frozen=True)
class DHChain:
    """Denavit-Hartenberg parameters: per joint (a, d, alpha, theta0)."""

    a: tuple
    d: tuple
    alpha: tuple
    theta0: tuple

    def __post_init__(self):
        for name in ("a", "d", "alpha", "theta0"):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != 6:
                raise ConfigError(f"DH column '{name}' must have 6 entries, got {len(vals)}")
            if not all(np.isfinite(vals)):
                raise ConfigError(f"DH column '{name}' contains non-finite entries")
            object.__setattr__(self, name, vals)

    @classmethod
    def from_rows(cls, rows) -> "DHChain":
        """Build from six rows of four numbers (a, d, alpha, theta0)."""
        rows = [tuple(float(v) for v in row) for row in rows]
        if len(rows) != 6 or any(len(r) != 4 for r in rows):
            raise ConfigError("DH chain must be six rows of four numbers (a, d, alpha, theta0)")
        a, d, alpha, theta0 = zip(*rows)
        return cls(a=a, d=d, alpha=alpha, theta0=theta0)

    def rows(self) -> list:
        return [list(r) for r in zip(self.a, self.d, self.alpha, self.theta0)]


UR5E = DHChain.from_rows(UR5E_DH_ROWS)


def dh_transform(theta: float, a: float, d: float, alpha: float) -> np.ndarray:
    """Homogeneous transform of one DH link."""
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(alpha), np.sin(alpha)
    return np.array([
        [ct, -st * ca, st * sa, a * ct],
        [st, ct * ca, -ct * sa, a * st],
        [0.0, sa, ca, d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def _matrix_to_rpy(rot: np.ndarray) -> tuple:
    """Roll-pitch-yaw (intrinsic X-Y-Z) from a rotation matrix.

    At the pitch singularity (|sin(pitch)| = 1) roll and yaw are coupled;
    we pick the rz = 0 branch deterministically.
    """
    sp = np.clip(rot[0, 2], -1.0, 1.0)
    if abs(sp) < 1.0 - 1e-10:
        roll = np.arctan2(-rot[1, 2], rot[2, 2])
        pitch = np.arcsin(sp)
        yaw = np.arctan2(-rot[0, 1], rot[0, 0])
    elif sp > 0.0:
        roll = np.arctan2(rot[1, 0], rot[1, 1])
        pitch = np.pi / 2
        yaw = 0.0
    else:
        roll = np.arctan2(-rot[1, 0], rot[1, 1])
        pitch = -np.pi / 2
        yaw = 0.0
    return wrap_angle(roll), wrap_angle(pitch), wrap_angle(yaw)


def forward_kinematics(joints, chain: DHChain = UR5E) -> Pose:
    """End-effector pose for a joint configuration.

    Composes the six DH link transforms and converts the final rotation to
    roll-pitch-yaw angles wrapped into (-pi, pi].
    """
    q = as_joint_vector(joints)
    t = np.eye(4)
    for i in range(6):
        t = t @ dh_transform(q[i] + chain.theta0[i], chain.a[i], chain.d[i], chain.alpha[i])
    rx, ry, rz = _matrix_to_rpy(t[:3, :3])
    return Pose(t[0, 3], t[1, 3], t[2, 3], rx, ry, rz)


def pose_distance(a: Pose, b: Pose, position_weight: float = 0.5,
                  orientation_weight: float = 0.5) -> tuple:
    """Position, orientation, and weighted distances between two poses.

    The orientation distance is the Euclidean norm of the component-wise
    angle differences, each wrapped into (-pi, pi] before norming. The
    weights must be non-negative and sum to one.
    """
    if position_weight < 0 or orientation_weight < 0:
        raise ConfigError("distance weights must be non-negative")
    if abs(position_weight + orientation_weight - 1.0) > 1e-9:
        raise ConfigError("distance weights must sum to 1")
    dist_p = float(np.linalg.norm(a.position() - b.position()))
    dist_o = float(np.linalg.norm(wrap_angle(a.orientation() - b.orientation())))
    weighted = position_weight * dist_p + orientation_weight * dist_o
    return dist_p, dist_o, weighted


def couple_joint4(j2: float, j3: float) -> float:
    """Fourth joint angle that keeps the wrist link vertical.

    Derived from the second and third joint angles; the boundary case
    belongs to the first branch.
    """
    if not (np.isfinite(j2) and np.isfinite(j3)):
        raise ValueError("joint angles must be finite")
    if abs(np.pi / 2 + j2) + j3 >= np.pi:
        return float(-np.pi - j2)
    return float(-j3 - j2)


def clamp_to_limits(joints, limits) -> np.ndarray:
    """Clamp each joint angle into its [lo, hi] interval."""
    arr = np.asarray(joints, dtype=float)
    lim = np.asarray(limits, dtype=float)
    return np.clip(arr, lim[:, 0], lim[:, 1])


def default_joint_limits() -> np.ndarray:
    """[-pi, pi] limits for every joint, as a (6, 2) array."""
    return np.tile([-np.pi, np.pi], (6, 1))
