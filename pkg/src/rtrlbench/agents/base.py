"""Agent protocol and the trivial baselines.

An agent sees the environment through four members: ``reset(obs)`` at the
start of an episode, ``act(obs)`` for the next action in ``[-1, 1]^k``,
``observe(timestep)`` after every step (learners update here) and the
``clip_actions`` flag telling the runtime whether to clip what it executes.
"""
from __future__ import annotations

import numpy as np


class Agent:
    clip_actions = True

    def __init__(self, obs_dim: int, action_dim: int):
        self.obs_dim = obs_dim
        self.action_dim = action_dim

    def reset(self, obs) -> None:
        pass

    def act(self, obs) -> np.ndarray:
        raise NotImplementedError

    def observe(self, ts) -> None:
        pass


class RandomAgent(Agent):
    def __init__(self, obs_dim: int, action_dim: int, seed: int = 0):
        super().__init__(obs_dim, action_dim)
        self.rng = np.random.default_rng(seed)

    def act(self, obs) -> np.ndarray:
        return self.rng.uniform(-1.0, 1.0, self.action_dim)


class ZeroAgent(Agent):
    def act(self, obs) -> np.ndarray:
        return np.zeros(self.action_dim)
