"""Goal-conditioned DDPG: actor-critic pairs with targets and replay.

Both networks are conditioned on the augmented goal (target pose plus the
required precision), so one policy serves every precision level the
curriculum visits. The actor maps (state, goal) to bounded joint
increments; the critic scores (state, action, goal).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError
from .neural import Mlp, make_optimizer, optimizer_from_document, soft_update

STATE_DIM = 12
ACTION_DIM = 6
GOAL_DIM = 7


@dataclass
class Transition:
    """One replay record: (s, a, s', r, g, terminal)."""

    state: np.ndarray
    action: np.ndarray
    next_state: np.ndarray
    reward: float
    goal: np.ndarray
    terminal: bool


@dataclass
class Batch:
    states: np.ndarray
    actions: np.ndarray
    next_states: np.ndarray
    rewards: np.ndarray
    goals: np.ndarray
    terminals: np.ndarray

    def __len__(self):
        return self.states.shape[0]


class ReplayBuffer:
    """Fixed-capacity FIFO ring over flat transition arrays."""

    def __init__(self, capacity: int, state_dim: int = STATE_DIM,
                 action_dim: int = ACTION_DIM, goal_dim: int = GOAL_DIM):
        capacity = int(capacity)
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.next_states = np.zeros((capacity, state_dim))
        self.rewards = np.zeros(capacity)
        self.goals = np.zeros((capacity, goal_dim))
        self.terminals = np.zeros(capacity)
        self.cursor = 0
        self.count = 0

    def __len__(self):
        return self.count

    def push(self, transition: Transition):
        """Store one transition, overwriting the oldest once full."""
        action = np.asarray(transition.action, dtype=float)
        if np.any(np.abs(action) > 1.0):
            raise ValueError("transition action components must lie in [-1, 1]")
        goal = np.asarray(transition.goal, dtype=float)
        if goal[-1] <= 0.0:
            raise ValueError("transition goal precision must be positive")
        i = self.cursor
        self.states[i] = transition.state
        self.actions[i] = action
        self.next_states[i] = transition.next_state
        self.rewards[i] = float(transition.reward)
        self.goals[i] = goal
        self.terminals[i] = 1.0 if transition.terminal else 0.0
        self.cursor = (self.cursor + 1) % self.capacity
        self.count = min(self.count + 1, self.capacity)

    def sample(self, rng: np.random.Generator, n: int) -> Batch:
        """Uniform sample of n transitions, with replacement."""
        if self.count == 0:
            raise ValueError("cannot sample from an empty replay buffer")
        idx = rng.integers(0, self.count, size=int(n))
        return Batch(
            states=self.states[idx],
            actions=self.actions[idx],
            next_states=self.next_states[idx],
            rewards=self.rewards[idx],
            goals=self.goals[idx],
            terminals=self.terminals[idx],
        )

    def to_document(self, include_contents: bool = True) -> dict:
        doc = {"capacity": self.capacity, "count": self.count, "cursor": self.cursor,
               "contents": None}
        if include_contents:
            n = self.count if self.count < self.capacity else self.capacity
            doc["contents"] = {
                "states": self.states[:n].tolist(),
                "actions": self.actions[:n].tolist(),
                "next_states": self.next_states[:n].tolist(),
                "rewards": self.rewards[:n].tolist(),
                "goals": self.goals[:n].tolist(),
                "terminals": self.terminals[:n].tolist(),
            }
        return doc

    @classmethod
    def from_document(cls, doc: dict, state_dim: int = STATE_DIM,
                      action_dim: int = ACTION_DIM, goal_dim: int = GOAL_DIM) -> "ReplayBuffer":
        buf = cls(doc["capacity"], state_dim, action_dim, goal_dim)
        contents = doc.get("contents")
        if contents is not None:
            n = int(doc["count"])
            buf.states[:n] = contents["states"]
            buf.actions[:n] = contents["actions"]
            buf.next_states[:n] = contents["next_states"]
            buf.rewards[:n] = contents["rewards"]
            buf.goals[:n] = contents["goals"]
            buf.terminals[:n] = contents["terminals"]
            buf.count = n
            buf.cursor = int(doc["cursor"])
        return buf


class PolicySnapshot:
    """Frozen copy of an actor; safe to evaluate concurrently."""

    def __init__(self, actor: Mlp):
        self._actor = actor.copy()

    def __call__(self, state_vec, goal_vec) -> np.ndarray:
        x = np.concatenate([state_vec, goal_vec])
        out, _ = self._actor.forward(x)
        return np.clip(out, -1.0, 1.0)


class DdpgAgent:
    """Deterministic actor-critic learner with Polyak-averaged targets."""

    def __init__(self, hidden_widths=(64, 64), state_dim: int = STATE_DIM,
                 action_dim: int = ACTION_DIM, goal_dim: int = GOAL_DIM,
                 gamma: float = 0.98, tau: float = 0.01, actor_lr: float = 1e-4,
                 critic_lr: float = 1e-3, noise_sigma: float = 0.1,
                 optimizer: str = "adam", rng: np.random.Generator | None = None):
        rng = rng if rng is not None else np.random.default_rng()
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.goal_dim = goal_dim
        self.gamma = float(gamma)
        self.tau = float(tau)
        self.noise_sigma = float(noise_sigma)
        # Small output-layer init keeps early actions near zero.
        self.actor = Mlp([state_dim + goal_dim, *hidden_widths, action_dim],
                         "tanh", rng, final_scale=1e-3)
        self.critic = Mlp([state_dim + action_dim + goal_dim, *hidden_widths, 1],
                          "identity", rng)
        self.target_actor = self.actor.copy()
        self.target_critic = self.critic.copy()
        self.actor_opt = make_optimizer(optimizer, self.actor.parameters(), actor_lr)
        self.critic_opt = make_optimizer(optimizer, self.critic.parameters(), critic_lr)
        # Epochs of annealing already applied to the random-action probability.
        self.anneal_epoch = 0

    def act(self, state_vec, goal_vec) -> np.ndarray:
        """Deterministic policy output, clamped to [-1, 1]."""
        x = np.concatenate([state_vec, goal_vec])
        out, _ = self.actor.forward(x)
        return np.clip(out, -1.0, 1.0)

    def select_action(self, state_vec, goal_vec, rng: np.random.Generator,
                      explore: bool = False, random_action_prob: float = 0.0) -> np.ndarray:
        """Policy action, optionally with epsilon-greedy and Gaussian noise."""
        if explore and rng.random() < random_action_prob:
            return rng.uniform(-1.0, 1.0, size=self.action_dim)
        action = self.act(state_vec, goal_vec)
        if explore:
            action = action + rng.normal(0.0, self.noise_sigma, size=self.action_dim)
        return np.clip(action, -1.0, 1.0)

    def critic_targets(self, batch: Batch) -> np.ndarray:
        """Bootstrapped regression targets; terminal transitions do not bootstrap."""
        next_in = np.concatenate([batch.next_states, batch.goals], axis=1)
        next_actions, _ = self.target_actor.forward(next_in)
        q_in = np.concatenate([batch.next_states, next_actions, batch.goals], axis=1)
        next_q, _ = self.target_critic.forward(q_in)
        return batch.rewards + self.gamma * (1.0 - batch.terminals) * next_q[:, 0]

    def train_step(self, batch: Batch) -> dict:
        """One gradient step on critic and actor, then target blending."""
        n = len(batch)
        y = self.critic_targets(batch)

        critic_in = np.concatenate([batch.states, batch.actions, batch.goals], axis=1)
        q, cache = self.critic.forward(critic_in)
        residual = q[:, 0] - y
        critic_loss = float(np.mean(residual ** 2))
        if not np.isfinite(critic_loss):
            raise DivergenceError("critic loss is not finite",
                                  diagnostics={"critic_loss": critic_loss})
        dq = (2.0 / n) * residual[:, None]
        critic_grads, _ = self.critic.backward(cache, dq)
        self.critic_opt.step(self.critic.parameters(), critic_grads)

        actor_in = np.concatenate([batch.states, batch.goals], axis=1)
        actions, actor_cache = self.actor.forward(actor_in)
        q_in = np.concatenate([batch.states, actions, batch.goals], axis=1)
        q_of_pi, q_cache = self.critic.forward(q_in)
        actor_objective = float(np.mean(q_of_pi))
        if not np.isfinite(actor_objective):
            raise DivergenceError("actor objective is not finite",
                                  diagnostics={"actor_objective": actor_objective})
        # dQ/da via the critic's input gradient, then up through the actor.
        _, dq_in = self.critic.backward(q_cache, np.full((n, 1), 1.0 / n))
        d_action = dq_in[:, self.state_dim:self.state_dim + self.action_dim]
        actor_grads, _ = self.actor.backward(actor_cache, d_action)
        # Ascend the critic's estimate of the policy's value.
        self.actor_opt.step(self.actor.parameters(), [-g for g in actor_grads])

        self.soft_update_targets()
        return {"critic_loss": critic_loss, "actor_objective": actor_objective}

    def soft_update_targets(self):
        soft_update(self.target_actor, self.actor, self.tau)
        soft_update(self.target_critic, self.critic, self.tau)

    def snapshot_policy(self) -> PolicySnapshot:
        return PolicySnapshot(self.actor)

    def to_document(self) -> dict:
        return {
            "dims": [self.state_dim, self.action_dim, self.goal_dim],
            "gamma": self.gamma,
            "tau": self.tau,
            "noise_sigma": self.noise_sigma,
            "anneal_epoch": self.anneal_epoch,
            "actor": self.actor.to_document(),
            "critic": self.critic.to_document(),
            "target_actor": self.target_actor.to_document(),
            "target_critic": self.target_critic.to_document(),
            "actor_opt": self.actor_opt.to_document(),
            "critic_opt": self.critic_opt.to_document(),
        }

    @classmethod
    def from_document(cls, doc: dict) -> "DdpgAgent":
        state_dim, action_dim, goal_dim = (int(v) for v in doc["dims"])
        agent = cls.__new__(cls)
        agent.state_dim = state_dim
        agent.action_dim = action_dim
        agent.goal_dim = goal_dim
        agent.gamma = float(doc["gamma"])
        agent.tau = float(doc["tau"])
        agent.noise_sigma = float(doc["noise_sigma"])
        agent.anneal_epoch = int(doc["anneal_epoch"])
        agent.actor = Mlp.from_document(doc["actor"])
        agent.critic = Mlp.from_document(doc["critic"])
        agent.target_actor = Mlp.from_document(doc["target_actor"])
        agent.target_critic = Mlp.from_document(doc["target_critic"])
        agent.actor_opt = optimizer_from_document(doc["actor_opt"], agent.actor.parameters())
        agent.critic_opt = optimizer_from_document(doc["critic_opt"], agent.critic.parameters())
        return agent
