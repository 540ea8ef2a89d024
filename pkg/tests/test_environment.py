import numpy as np
import pytest
from scipy import stats

from reachrl.environment import (
    MAX_JOINT_STEP,
    AugmentedGoal,
    ReachEnv,
    RewardMode,
    State,
    reward_dense,
    reward_sparse,
)
from reachrl.errors import ConfigError
from reachrl.kinematics import (
    HOME_JOINTS,
    clamp_to_limits,
    couple_joint4,
    forward_kinematics,
    pose_distance,
)


def make_env(**kwargs):
    return ReachEnv(**kwargs)


class TestRewards:
    def test_dense_exact_hit(self):
        assert reward_dense(0.0, 0.0, 0.0, 0.05) == 1.0

    def test_dense_failure_pays_weighted_distance(self):
        # dist_p 0.2, dist_o 0.1 at weights 0.5/0.5.
        assert reward_dense(0.2, 0.1, 0.15, 0.05) == -0.15

    def test_dense_boundary_succeeds(self):
        eps = 0.05
        assert reward_dense(eps, eps, 0.05, eps) == 1.0

    def test_sparse_success(self):
        assert reward_sparse(0.01, 0.01, 0.05) == 1.0

    def test_sparse_failure(self):
        assert reward_sparse(0.2, 0.01, 0.05) == -0.02

    def test_sparse_needs_both_distances(self):
        eps = 0.05
        assert reward_sparse(0.0, 2 * eps, eps) == -0.02

    def test_reward_mode_parsing(self):
        assert RewardMode.from_name("Dense") is RewardMode.DENSE
        assert RewardMode.from_name(RewardMode.SPARSE) is RewardMode.SPARSE
        with pytest.raises(ConfigError):
            RewardMode.from_name("shaped")


class TestReset:
    def test_starts_at_home(self):
        env = make_env()
        state, _ = env.reset(np.random.default_rng(0), 0.15)
        assert np.array_equal(state.joints, HOME_JOINTS)
        assert np.array_equal(state.pose.vector(), forward_kinematics(HOME_JOINTS).vector())

    def test_state_vector_layout(self):
        env = make_env()
        state, goal = env.reset(np.random.default_rng(0), 0.15)
        vec = state.vector()
        assert vec.shape == (12,)
        assert np.array_equal(vec[:6], state.pose.vector())
        assert np.array_equal(vec[6:], state.joints)
        assert goal.vector().shape == (7,)
        assert goal.vector()[-1] == 0.15

    def test_same_seed_same_goal(self):
        env_a, env_b = make_env(), make_env()
        _, goal_a = env_a.reset(np.random.default_rng(123), 0.1)
        _, goal_b = env_b.reset(np.random.default_rng(123), 0.1)
        assert np.array_equal(goal_a.vector(), goal_b.vector())

    def test_goal_is_reachable_by_construction(self):
        env = make_env()
        _, goal = env.reset(np.random.default_rng(5), 0.1)
        preimage = env.last_goal_joints
        assert np.all(preimage >= env.limits[:, 0]) and np.all(preimage <= env.limits[:, 1])
        reached = forward_kinematics(preimage, env.chain)
        assert pose_distance(reached, goal.target) == (0.0, 0.0, 0.0)

    def test_rejects_non_positive_epsilon(self):
        env = make_env()
        with pytest.raises(ConfigError):
            env.reset(np.random.default_rng(0), 0.0)


class TestSampleGoal:
    def test_degenerate_limits_collapse_support(self):
        span = 1e-12
        limits = np.column_stack([HOME_JOINTS - span, HOME_JOINTS + span])
        env = make_env(limits=limits)
        rng = np.random.default_rng(0)
        poses = [env.sample_goal(rng).vector() for _ in range(5)]
        home_pose = forward_kinematics(HOME_JOINTS).vector()
        for p in poses:
            assert np.allclose(p, home_pose, atol=1e-9)

    def test_active_joint_marginals_are_uniform(self):
        env = make_env()
        rng = np.random.default_rng(42)
        samples = np.array([env.sample_goal_joints(rng) for _ in range(10_000)])
        for i in env.active_joints:
            lo, hi = env.limits[i]
            pvalue = stats.kstest(samples[:, i], "uniform", args=(lo, hi - lo)).pvalue
            assert pvalue > 0.01, f"joint {i} marginal fails uniformity (p={pvalue})"

    def test_frozen_joints_stay_home(self):
        env = make_env(active_joints=(0, 1, 2))
        rng = np.random.default_rng(7)
        for _ in range(100):
            q = env.sample_goal_joints(rng)
            assert q[4] == HOME_JOINTS[4] and q[5] == HOME_JOINTS[5]

    def test_preimages_respect_limits_and_coupling(self):
        env = make_env()
        rng = np.random.default_rng(9)
        for _ in range(1000):
            q = env.sample_goal_joints(rng)
            assert np.all(q >= env.limits[:, 0]) and np.all(q <= env.limits[:, 1])
            coupled = clamp_to_limits(
                np.array([0, 0, 0, couple_joint4(q[1], q[2]), 0, 0]), env.limits)[3]
            assert q[3] == coupled


class TestStep:
    def test_zero_action_is_fixed_point_when_coupled(self):
        env = make_env()
        state, goal = env.reset(np.random.default_rng(0), 0.15)
        result = env.step(state, np.zeros(6), goal)
        assert np.array_equal(result.next_state.joints, state.joints)
        assert np.array_equal(result.next_state.pose.vector(), state.pose.vector())

    def test_zero_action_recouples_joint4(self):
        env = make_env()
        joints = HOME_JOINTS.copy()
        joints[3] = 0.0  # deliberately uncoupled
        state = State(pose=forward_kinematics(joints), joints=joints)
        _, goal = env.reset(np.random.default_rng(0), 0.15)
        result = env.step(state, np.zeros(6), goal)
        assert result.next_state.joints[3] == pytest.approx(np.pi / 2)

    def test_unit_action_moves_joint_by_max_step(self):
        env = make_env()
        state, goal = env.reset(np.random.default_rng(1), 0.15)
        action = np.zeros(6)
        action[0] = 1.0
        result = env.step(state, action, goal)
        assert result.next_state.joints[0] == pytest.approx(
            state.joints[0] + MAX_JOINT_STEP)

    def test_success_when_within_epsilon(self):
        env = make_env()
        state, _ = env.reset(np.random.default_rng(2), 0.15)
        goal = AugmentedGoal(target=state.pose, epsilon=0.5)
        result = env.step(state, np.zeros(6), goal)
        assert result.success and result.done
        assert result.reward == 1.0

    def test_out_of_range_action_rejected(self):
        env = make_env()
        state, goal = env.reset(np.random.default_rng(3), 0.15)
        bad = np.zeros(6)
        bad[2] = 1.0001
        with pytest.raises(ValueError):
            env.step(state, bad, goal)

    def test_non_finite_action_rejected(self):
        env = make_env()
        state, goal = env.reset(np.random.default_rng(3), 0.15)
        with pytest.raises(ValueError):
            env.step(state, np.full(6, np.nan), goal)

    def test_pose_rederived_from_joints(self):
        env = make_env()
        rng = np.random.default_rng(4)
        state, goal = env.reset(rng, 0.15)
        for _ in range(20):
            result = env.step(state, rng.uniform(-1, 1, 6), goal)
            state = result.next_state
            expected = forward_kinematics(state.joints, env.chain).vector()
            assert np.array_equal(state.pose.vector(), expected)

    def test_limits_contain_joints_under_extreme_actions(self):
        env = make_env()
        state, goal = env.reset(np.random.default_rng(5), 0.15)
        for _ in range(30):
            result = env.step(state, np.ones(6), goal)
            state = result.next_state
            assert np.all(state.joints >= env.limits[:, 0])
            assert np.all(state.joints <= env.limits[:, 1])

    def test_frozen_joints_ignore_action(self):
        env = make_env(active_joints=(0, 1, 2))
        state, goal = env.reset(np.random.default_rng(6), 0.15)
        result = env.step(state, np.ones(6), goal)
        assert result.next_state.joints[4] == HOME_JOINTS[4]
        assert result.next_state.joints[5] == HOME_JOINTS[5]

    def test_dense_reward_sign_structure(self):
        env = make_env(reward_mode="dense")
        rng = np.random.default_rng(7)
        state, goal = env.reset(rng, 0.05)
        for _ in range(50):
            result = env.step(state, rng.uniform(-1, 1, 6), goal)
            state = result.next_state
            if result.success:
                assert result.reward == 1.0
            else:
                assert result.reward < 0.0
                expected = -(0.5 * result.dist_p + 0.5 * result.dist_o)
                assert result.reward == pytest.approx(expected, abs=1e-12)

    def test_sparse_reward_codomain(self):
        env = make_env(reward_mode="sparse")
        rng = np.random.default_rng(8)
        state, goal = env.reset(rng, 0.05)
        for _ in range(50):
            result = env.step(state, rng.uniform(-1, 1, 6), goal)
            state = result.next_state
            assert result.reward in (1.0, -0.02)


class TestEnvValidation:
    def test_rejects_bad_limit_shape(self):
        with pytest.raises(ConfigError):
            make_env(limits=np.zeros((5, 2)))

    def test_rejects_inverted_limits(self):
        limits = np.tile([-np.pi, np.pi], (6, 1))
        limits[2] = [1.0, -1.0]
        with pytest.raises(ConfigError):
            make_env(limits=limits)

    def test_rejects_limits_excluding_home(self):
        limits = np.tile([-0.1, 0.1], (6, 1))
        with pytest.raises(ConfigError):
            make_env(limits=limits)

    def test_rejects_actuating_coupled_joint(self):
        with pytest.raises(ConfigError):
            make_env(active_joints=(0, 1, 2, 3))

    def test_rejects_bad_weights(self):
        with pytest.raises(ConfigError):
            make_env(position_weight=0.9, orientation_weight=0.9)


class TestSuccessMonotonicity:
    def test_success_at_tight_epsilon_implies_success_at_looser(self):
        env = make_env()
        rng = np.random.default_rng(11)
        checked = 0
        for _ in range(200):
            state, goal = env.reset(rng, 0.3)
            for _ in range(10):
                result = env.step(state, rng.uniform(-1, 1, 6), goal)
                state = result.next_state
                if result.success:
                    looser = AugmentedGoal(target=goal.target, epsilon=goal.epsilon * 2)
                    again = env.step(result.next_state, np.zeros(6), looser)
                    # same pose measured at a looser precision must succeed
                    assert again.success
                    checked += 1
                    break
        assert checked > 0
