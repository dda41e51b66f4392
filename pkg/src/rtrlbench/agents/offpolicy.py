"""Replay buffer and the shared loop of the off-policy learners (Soft-Q, DDPG)."""
from __future__ import annotations

import numpy as np
import torch

from ..config import HyperConfig
from ..errors import ConfigurationError, DivergenceError
from .base import Agent
from .networks import DTYPE, RunningNorm

REPLAY_CAPACITY = 1_000_000
MIN_REPLAY_CAPACITY = 100_000
WARMUP_STEPS = 1000
POLYAK = 0.995


class ReplayBuffer:
    """Fixed-capacity FIFO of transitions with uniform sampling."""

    def __init__(self, obs_dim: int, act_dim: int, capacity: int = REPLAY_CAPACITY,
                 rng: np.random.Generator | None = None):
        if capacity < MIN_REPLAY_CAPACITY:
            raise ConfigurationError(f"replay capacity must be >= {MIN_REPLAY_CAPACITY}")
        self.capacity = capacity
        self.rng = rng or np.random.default_rng(0)
        # storage grows on demand so a 1e6 capacity costs nothing up front
        self._obs = np.zeros((0, obs_dim))
        self._act = np.zeros((0, act_dim))
        self._rew = np.zeros(0)
        self._next = np.zeros((0, obs_dim))
        self._term = np.zeros(0, dtype=bool)
        self._size = 0
        self._head = 0

    def __len__(self) -> int:
        return self._size

    def _grow(self):
        n = min(self.capacity, max(1024, 2 * self._obs.shape[0]))
        for name in ("_obs", "_act", "_rew", "_next", "_term"):
            old = getattr(self, name)
            new = np.zeros((n,) + old.shape[1:], dtype=old.dtype)
            new[:old.shape[0]] = old
            setattr(self, name, new)

    def add(self, obs, act, rew, next_obs, terminal) -> None:
        if self._head >= self._obs.shape[0] and self._obs.shape[0] < self.capacity:
            self._grow()
        i = self._head
        self._obs[i] = obs
        self._act[i] = act
        self._rew[i] = rew
        self._next[i] = next_obs
        self._term[i] = terminal
        self._head = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int) -> tuple:
        if self._size == 0:
            raise ValueError("cannot sample from an empty replay buffer")
        idx = self.rng.integers(0, self._size, size=batch_size)
        return (self._obs[idx], self._act[idx], self._rew[idx], self._next[idx],
                self._term[idx])


def polyak(target, source, rate: float = POLYAK) -> None:
    with torch.no_grad():
        for t, s in zip(target.parameters(), source.parameters()):
            t.mul_(rate).add_(s, alpha=1.0 - rate)


class OffPolicyAgent(Agent):
    def __init__(self, obs_dim: int, action_dim: int, config: HyperConfig):
        super().__init__(obs_dim, action_dim)
        if config.gamma is None:
            raise ConfigurationError("resolve gamma for the task first (config.for_task)")
        self.config = config
        self.gamma = config.gamma
        self.rng = np.random.default_rng(config.init_seed)
        self.generator = torch.Generator().manual_seed(config.init_seed)
        self.norm = RunningNorm(obs_dim)
        self.replay = ReplayBuffer(obs_dim, action_dim,
                                   int(config.extra.get("replay_capacity", REPLAY_CAPACITY)),
                                   np.random.default_rng(config.init_seed + 1))
        self.warmup = max(config.batch_size, int(config.extra.get("warmup", WARMUP_STEPS)))
        self.train_every = int(config.extra.get("train_every", 1))
        self.steps = 0
        self.updates = 0
        self._obs = None
        self._act = None

    def reset(self, obs) -> None:
        self._obs = np.asarray(obs, dtype=np.float64)

    def _tensor(self, obs) -> torch.Tensor:
        return torch.as_tensor(self.norm(obs), dtype=DTYPE)

    def act(self, obs) -> np.ndarray:
        self._obs = np.asarray(obs, dtype=np.float64)
        self._act = self.policy_action(self._obs)
        return self._act

    def policy_action(self, obs) -> np.ndarray:
        raise NotImplementedError

    def observe(self, ts) -> None:
        nxt = np.asarray(ts.observation, dtype=np.float64)
        self.replay.add(self._obs, self._act, ts.reward, nxt, ts.terminal)
        self.norm.update(self._obs)
        self._obs = nxt
        self.steps += 1
        if len(self.replay) >= self.warmup and self.steps % self.train_every == 0:
            for _ in range(self.train_repeats):
                self.train_step(self.replay.sample(self.config.batch_size))
                self.updates += 1

    @property
    def train_repeats(self) -> int:
        return 1

    def train_step(self, batch) -> None:
        raise NotImplementedError

    def _batch_tensors(self, batch) -> tuple:
        o, a, r, o2, term = batch
        return (self._tensor(o), torch.as_tensor(a, dtype=DTYPE), torch.as_tensor(r, dtype=DTYPE),
                self._tensor(o2), torch.as_tensor(term, dtype=DTYPE))

    @staticmethod
    def _check(loss: torch.Tensor, what: str) -> None:
        if not torch.isfinite(loss):
            raise DivergenceError(f"{what} loss became non-finite")
