"""Goal-conditioned DDPG for 6-DOF arm reaching with a precision-decay curriculum."""

from .agent import Batch, DdpgAgent, PolicySnapshot, ReplayBuffer, Transition
from .config import RunConfig, desk_profile, load_config, paper_profile, profile_config
from .curriculum import DecaySchedule, augment_goal, precision_at, schedule_curve
from .environment import (
    AugmentedGoal,
    ReachEnv,
    RewardMode,
    State,
    StepResult,
    reward_dense,
    reward_sparse,
)
from .errors import CheckpointError, ConfigError, DivergenceError, ReachError, ShapeError
from .kinematics import (
    HOME_JOINTS,
    UR5E,
    DHChain,
    Pose,
    couple_joint4,
    forward_kinematics,
    pose_distance,
    wrap_angle,
)
from .neural import Adam, Mlp, Sgd, soft_update
from .trainer import (
    Trainer,
    TrainResult,
    build_env,
    compare,
    evaluate,
    export_episode_trace,
    train,
)

__version__ = "0.1.0"
