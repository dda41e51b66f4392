"""Shared rollout collection for the on-policy learners (TRPO, PPO)."""
from __future__ import annotations

import numpy as np
import torch

from ..config import HyperConfig
from ..errors import ConfigurationError, DivergenceError
from .advantages import gae_advantages, normalize_advantages
from .base import Agent
from .networks import (DTYPE, GaussianPolicy, MlpSpec, RunningNorm, load_module_tensors, mlp,
                       module_tensors)


class OnPolicyAgent(Agent):
    """Collects ``batch_size`` steps, then calls :meth:`update`.

    Batches may cut an episode; the cut step bootstraps from V(s'). Steps that
    end on the clock bootstrap too, only true terminals use V = 0.
    """

    def __init__(self, obs_dim: int, action_dim: int, config: HyperConfig):
        super().__init__(obs_dim, action_dim)
        if config.gamma is None or config.lam is None:
            raise ConfigurationError("resolve gamma/lambda for the task first (config.for_task)")
        self.config = config
        self.gamma = config.gamma
        self.lam = config.lam
        gen = torch.Generator().manual_seed(config.init_seed)
        self.rng = np.random.default_rng(config.init_seed)
        spec = MlpSpec(config.hidden_layers, config.hidden_size)
        self.policy = GaussianPolicy(obs_dim, action_dim, spec, gen)
        self.value = mlp(obs_dim, 1, spec, gen)
        self.norm = RunningNorm(obs_dim)
        self.updates = 0
        self.last_stats = None
        self._clear()
        self._obs = None
        self._act = None

    def _clear(self):
        self._b_obs, self._b_act, self._b_rew = [], [], []
        self._b_next, self._b_end, self._b_term = [], [], []

    def _tensor(self, obs) -> torch.Tensor:
        return torch.as_tensor(self.norm(obs), dtype=DTYPE)

    def reset(self, obs) -> None:
        self._obs = np.asarray(obs, dtype=np.float64)

    def act(self, obs) -> np.ndarray:
        obs = np.asarray(obs, dtype=np.float64)
        with torch.no_grad():
            mean = self.policy(self._tensor(obs)).numpy()
            std = torch.exp(self.policy.log_std).numpy()
        a = mean + std * self.rng.standard_normal(self.action_dim)
        self._obs, self._act = obs, a
        return a

    def deterministic_action(self, obs) -> np.ndarray:
        with torch.no_grad():
            return self.policy(self._tensor(np.asarray(obs, dtype=np.float64))).numpy()

    def observe(self, ts) -> None:
        self._b_obs.append(self._obs)
        self._b_act.append(self._act)
        self._b_rew.append(ts.reward)
        self._b_next.append(np.asarray(ts.observation, dtype=np.float64))
        self._b_end.append(bool(ts.done))
        self._b_term.append(bool(ts.terminal))
        self._obs = np.asarray(ts.observation, dtype=np.float64)
        if len(self._b_obs) >= self.config.batch_size:
            self._b_end[-1] = True
            self._update_from_buffer()
            self._clear()

    def _update_from_buffer(self) -> None:
        obs = np.array(self._b_obs)
        self.norm.update(obs)
        o = self._tensor(obs)
        nxt = self._tensor(np.array(self._b_next))
        acts = torch.as_tensor(np.array(self._b_act), dtype=DTYPE)
        term = np.array(self._b_term)
        with torch.no_grad():
            v = self.value(o).squeeze(-1).numpy()
            nv = self.value(nxt).squeeze(-1).numpy() * (~term)
        adv, ret = gae_advantages(np.array(self._b_rew), v, self.gamma, self.lam,
                                  ends=np.array(self._b_end), next_values=nv)
        adv_t = torch.as_tensor(normalize_advantages(adv), dtype=DTYPE)
        ret_t = torch.as_tensor(ret, dtype=DTYPE)
        self.last_stats = self.update(o, acts, adv_t, ret_t)
        self.updates += 1
        for p in list(self.policy.parameters()) + list(self.value.parameters()):
            if not torch.all(torch.isfinite(p)):
                raise DivergenceError(f"non-finite parameters after update {self.updates}")

    def update(self, obs, acts, adv, ret):
        raise NotImplementedError

    def state_tensors(self) -> dict:
        out = module_tensors("policy", self.policy)
        out.update(module_tensors("value", self.value))
        out.update(self.norm.state())
        return out

    def load_state_tensors(self, tensors: dict) -> None:
        load_module_tensors("policy", self.policy, tensors)
        load_module_tensors("value", self.value, tensors)
        self.norm.load(tensors)


def fit_value(value_net, optimizer, obs, ret, epochs: int, minibatch: int,
              rng: np.random.Generator) -> float:
    n = obs.shape[0]
    loss = torch.tensor(0.0)
    for _ in range(epochs):
        for idx in np.array_split(rng.permutation(n), max(1, n // minibatch)):
            i = torch.as_tensor(idx)
            loss = ((value_net(obs[i]).squeeze(-1) - ret[i]) ** 2).mean()
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
    return loss.item()
