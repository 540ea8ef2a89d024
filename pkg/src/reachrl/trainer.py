"""Training orchestration: epoch loop, evaluation protocol, metrics, checkpoints.

One epoch = query the precision schedule, roll out a fixed number of
episodes with exploration, then run a fixed number of gradient steps on
replayed batches. Metrics go to a CSV whose contents are a pure function
of (config, seed); wall-clock time lives in the run summary instead so two
identical runs produce byte-identical metrics files.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .agent import DdpgAgent, ReplayBuffer, Transition
from .config import RunConfig
from .curriculum import precision_at
from .environment import ReachEnv
from .errors import CheckpointError, ConfigError, DivergenceError
from .kinematics import DHChain

CHECKPOINT_VERSION = 1
METRICS_HEADER = ("epoch", "epsilon", "acc_steps", "eval_success", "mean_reward", "wall_s")

# Tags that keep derived evaluation seed spaces disjoint from training streams.
EVAL_STREAM_TAG = 104729
FINAL_EVAL_TAG = 224737

# Config fields that distinguish the curriculum arm from the fixed arm.
CURRICULUM_KEYS = ("baseline", "baseline_epsilon", "schedule")


@dataclass
class TrainResult:
    config: RunConfig
    metrics_path: Path
    checkpoint_path: Path
    summary: dict


def build_env(config: RunConfig) -> ReachEnv:
    return ReachEnv(
        chain=DHChain.from_rows(config.dh_chain),
        limits=config.joint_limits,
        reward_mode=config.reward,
        position_weight=config.position_weight,
        orientation_weight=config.orientation_weight,
        active_joints=config.active_joints,
    )


def evaluate(policy, env: ReachEnv, n_goals: int, epsilon: float,
             rng: np.random.Generator, max_steps: int) -> float:
    """Fraction of freshly sampled goals reached within `epsilon`.

    Episodes are noise-free and start from the home configuration; the
    policy is any callable (state_vector, goal_vector) -> action.
    """
    if n_goals < 1:
        raise ValueError("need at least one evaluation goal")
    successes = 0
    for _ in range(int(n_goals)):
        state, goal = env.reset(rng, epsilon)
        for _ in range(int(max_steps)):
            action = policy(state.vector(), goal.vector())
            result = env.step(state, action, goal)
            state = result.next_state
            if result.success:
                successes += 1
                break
    return successes / int(n_goals)


def export_episode_trace(policy, env: ReachEnv, epsilon: float,
                         rng: np.random.Generator, max_steps: int, path):
    """Roll out one episode and write it as CSV (step, joints, pose, reward, done)."""
    path = Path(path)
    header = ["step"] + [f"j{i}" for i in range(1, 7)] + ["x", "y", "z", "rx", "ry", "rz",
                                                          "reward", "done"]
    state, goal = env.reset(rng, epsilon)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerow([0, *state.joints, *state.pose.vector(), "", False])
        for step in range(1, int(max_steps) + 1):
            action = policy(state.vector(), goal.vector())
            result = env.step(state, action, goal)
            state = result.next_state
            writer.writerow([step, *state.joints, *state.pose.vector(),
                             result.reward, result.done])
            if result.done:
                break
    return path


class Trainer:
    """Owns one training run: agent, environment, replay, rng streams."""

    def __init__(self, config: RunConfig, out_dir):
        self.config = config
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.env = build_env(config)
        root = np.random.SeedSequence(config.seed)
        init_seq, goals_seq, explore_seq, replay_seq = root.spawn(4)
        self.rng_goals = np.random.default_rng(goals_seq)
        self.rng_explore = np.random.default_rng(explore_seq)
        self.rng_replay = np.random.default_rng(replay_seq)
        self.agent = DdpgAgent(
            hidden_widths=config.hidden_widths,
            gamma=config.gamma,
            tau=config.tau,
            actor_lr=config.actor_lr,
            critic_lr=config.critic_lr,
            noise_sigma=config.noise_sigma,
            optimizer=config.optimizer,
            rng=np.random.default_rng(init_seq),
        )
        self.buffer = ReplayBuffer(config.buffer_capacity)
        self.epochs_done = 0
        self.acc_steps = 0
        self.resumed_without_buffer = False
        self._last_good_doc = None

    # -- schedule queries ---------------------------------------------------

    def epsilon_for_epoch(self, epoch: int) -> float:
        if self.config.baseline:
            return self.config.resolved_baseline_epsilon
        return precision_at(self.config.schedule, epoch)

    def random_action_prob(self, epoch: int) -> float:
        """Epsilon-greedy probability, annealed over the first half of training."""
        cfg = self.config
        half = cfg.epochs / 2.0
        frac = min(1.0, epoch / half) if half > 0 else 1.0
        return cfg.explore_start + (cfg.explore_end - cfg.explore_start) * frac

    # -- single-epoch pieces ------------------------------------------------

    def _collect_epoch(self, epoch: int, epsilon: float) -> float:
        """Roll out episodes with exploration; returns mean episode return."""
        cfg = self.config
        p_random = self.random_action_prob(epoch)
        total = 0.0
        for _ in range(cfg.episodes_per_epoch):
            state, goal = self.env.reset(self.rng_goals, epsilon)
            for _ in range(cfg.steps_per_episode):
                action = self.agent.select_action(
                    state.vector(), goal.vector(), self.rng_explore,
                    explore=True, random_action_prob=p_random)
                result = self.env.step(state, action, goal)
                self.buffer.push(Transition(
                    state=state.vector(), action=action,
                    next_state=result.next_state.vector(), reward=result.reward,
                    goal=goal.vector(), terminal=result.success))
                total += result.reward
                self.acc_steps += 1
                state = result.next_state
                if result.done:
                    break
        return total / cfg.episodes_per_epoch

    def _train_epoch(self):
        cfg = self.config
        for _ in range(cfg.train_steps_per_epoch):
            batch = self.buffer.sample(self.rng_replay, cfg.batch_size)
            self.agent.train_step(batch)

    def evaluate_policy(self, epoch_tick: int, epsilon: float,
                        n_goals: int | None = None) -> float:
        """Deterministic evaluation on a fresh environment instance.

        The goal stream is derived from (seed, tick) rather than the training
        streams, so evaluation never perturbs training and identically
        seeded runs (or arms) see identical goal sets.
        """
        rng = np.random.default_rng([self.config.seed, EVAL_STREAM_TAG, int(epoch_tick)])
        return evaluate(self.agent.snapshot_policy(), build_env(self.config),
                        n_goals if n_goals is not None else self.config.eval_goals,
                        epsilon, rng, self.config.steps_per_episode)

    # -- the run loop ---------------------------------------------------------

    def run(self) -> TrainResult:
        cfg = self.config
        metrics_path = self.out_dir / "metrics.csv"
        checkpoint_path = self.out_dir / "checkpoint.json"
        started = time.monotonic()
        with open(metrics_path, "w", newline="") as metrics_file:
            writer = csv.writer(metrics_file)
            writer.writerow(METRICS_HEADER)
            for epoch in range(self.epochs_done, cfg.epochs):
                epsilon = self.epsilon_for_epoch(epoch)
                try:
                    mean_reward = self._collect_epoch(epoch, epsilon)
                    self._train_epoch()
                except DivergenceError:
                    self._save_last_good()
                    raise
                self.agent.anneal_epoch = epoch + 1
                self.epochs_done = epoch + 1
                tick = epoch + 1

                want_steps = tick % cfg.steps_record_every == 0
                want_eval = tick % cfg.eval_every == 0 or tick == cfg.epochs
                if want_steps or want_eval:
                    eval_cell = ""
                    if want_eval:
                        eval_cell = self.evaluate_policy(tick, epsilon)
                    wall_cell = ""
                    if cfg.wall_clock_in_metrics:
                        wall_cell = round(time.monotonic() - started, 3)
                    writer.writerow([tick, epsilon, self.acc_steps, eval_cell,
                                     mean_reward, wall_cell])
                    metrics_file.flush()

                if cfg.checkpoint_every and tick % cfg.checkpoint_every == 0 and tick < cfg.epochs:
                    self.save_checkpoint(self.out_dir / f"checkpoint_epoch{tick:06d}.json")
                self._last_good_doc = self.checkpoint_document(include_buffer=False)

        self.save_checkpoint(checkpoint_path)
        final_rng = np.random.default_rng([cfg.seed, FINAL_EVAL_TAG])
        final_success = evaluate(self.agent.snapshot_policy(), build_env(cfg),
                                 cfg.eval_goals, cfg.resolved_eval_epsilon,
                                 final_rng, cfg.steps_per_episode)
        summary = {
            "epochs": self.epochs_done,
            "acc_steps": self.acc_steps,
            "final_eval_epsilon": cfg.resolved_eval_epsilon,
            "final_eval_success": final_success,
            "train_wall_s": round(time.monotonic() - started, 3),
            "resumed_without_buffer": self.resumed_without_buffer,
            "checkpoint": str(checkpoint_path),
            "metrics": str(metrics_path),
        }
        with open(self.out_dir / "summary.json", "w") as f:
            json.dump(summary, f, indent=2)
        return TrainResult(config=cfg, metrics_path=metrics_path,
                           checkpoint_path=checkpoint_path, summary=summary)

    # -- checkpointing --------------------------------------------------------

    def checkpoint_document(self, include_buffer: bool | None = None) -> dict:
        if include_buffer is None:
            include_buffer = self.config.checkpoint_include_buffer
        return {
            "format_version": CHECKPOINT_VERSION,
            "kind": "reachrl-checkpoint",
            "config": self.config.to_dict(),
            "epochs_done": self.epochs_done,
            "acc_steps": self.acc_steps,
            "agent": self.agent.to_document(),
            "rng": {
                "goals": self.rng_goals.bit_generator.state,
                "explore": self.rng_explore.bit_generator.state,
                "replay": self.rng_replay.bit_generator.state,
            },
            "buffer": self.buffer.to_document(include_contents=include_buffer),
        }

    def save_checkpoint(self, path) -> Path:
        path = Path(path)
        with open(path, "w") as f:
            json.dump(self.checkpoint_document(), f)
        return path

    def _save_last_good(self):
        if self._last_good_doc is not None:
            with open(self.out_dir / "checkpoint_last_good.json", "w") as f:
                json.dump(self._last_good_doc, f)

    @classmethod
    def from_checkpoint(cls, path, out_dir=None) -> "Trainer":
        path = Path(path)
        try:
            with open(path) as f:
                doc = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from None
        if not isinstance(doc, dict) or doc.get("kind") != "reachrl-checkpoint":
            raise CheckpointError(f"{path} is not a trainer checkpoint")
        if doc.get("format_version") != CHECKPOINT_VERSION:
            raise CheckpointError(
                f"checkpoint format version {doc.get('format_version')} is not supported "
                f"(expected {CHECKPOINT_VERSION})")
        try:
            config = RunConfig.from_dict(doc["config"])
            trainer = cls(config, out_dir if out_dir is not None else path.parent)
            trainer.agent = DdpgAgent.from_document(doc["agent"])
            trainer.buffer = ReplayBuffer.from_document(doc["buffer"])
            trainer.rng_goals.bit_generator.state = doc["rng"]["goals"]
            trainer.rng_explore.bit_generator.state = doc["rng"]["explore"]
            trainer.rng_replay.bit_generator.state = doc["rng"]["replay"]
            trainer.epochs_done = int(doc["epochs_done"])
            trainer.acc_steps = int(doc["acc_steps"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"checkpoint {path} is corrupt: {exc}") from None
        if doc["buffer"].get("contents") is None and doc["buffer"].get("count", 0) > 0:
            trainer.resumed_without_buffer = True
        return trainer


def train(config: RunConfig, out_dir) -> TrainResult:
    return Trainer(config, out_dir).run()


# -- two-arm comparison -------------------------------------------------------


def shared_config_hash(config: RunConfig) -> str:
    """Hash of the config with the curriculum-arm fields removed."""
    data = config.to_dict()
    for key in CURRICULUM_KEYS + ("seed",):
        data.pop(key, None)
    blob = json.dumps(data, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def compare(config_curriculum: RunConfig, config_fixed: RunConfig, seeds, out_dir) -> dict:
    """Train both arms over the seed list and report the head-to-head numbers.

    The two configs must be identical apart from the curriculum fields; the
    final success rates are measured at each arm's shared evaluation
    precision.
    """
    if shared_config_hash(config_curriculum) != shared_config_hash(config_fixed):
        raise ConfigError("comparison arms must differ only in curriculum fields")
    if config_curriculum.resolved_eval_epsilon != config_fixed.resolved_eval_epsilon:
        raise ConfigError("comparison arms must share the final evaluation precision")
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ConfigError("need at least one seed")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    arms = (("curriculum", config_curriculum), ("fixed", config_fixed))
    rows = []
    report = {"eval_epsilon": config_curriculum.resolved_eval_epsilon, "seeds": seeds,
              "arms": {}}
    for arm_name, arm_config in arms:
        arm_entry = {
            "config_hash_shared": shared_config_hash(arm_config),
            "baseline": arm_config.baseline,
            "runs": [],
        }
        for seed in seeds:
            run_config = dataclasses.replace(arm_config, seed=seed)
            result = train(run_config, out_dir / arm_name / f"seed{seed}")
            arm_entry["runs"].append({
                "seed": seed,
                "final_eval_success": result.summary["final_eval_success"],
                "acc_steps": result.summary["acc_steps"],
                "train_wall_s": result.summary["train_wall_s"],
                "metrics": str(result.metrics_path),
            })
            rows.append([arm_name, seed, result.summary["final_eval_success"],
                         result.summary["acc_steps"], result.summary["train_wall_s"]])
        arm_entry["median_final_success"] = statistics.median(
            r["final_eval_success"] for r in arm_entry["runs"])
        arm_entry["median_acc_steps"] = statistics.median(
            r["acc_steps"] for r in arm_entry["runs"])
        arm_entry["total_wall_s"] = round(sum(r["train_wall_s"] for r in arm_entry["runs"]), 3)
        report["arms"][arm_name] = arm_entry

    with open(out_dir / "comparison.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["arm", "seed", "final_eval_success", "acc_steps", "train_wall_s"])
        writer.writerows(rows)
    with open(out_dir / "comparison_summary.json", "w") as f:
        json.dump(report, f, indent=2)
    return report
