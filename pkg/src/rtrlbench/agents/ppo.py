"""Proximal policy optimization with the clipped surrogate."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from .networks import gaussian_log_prob
from .onpolicy import OnPolicyAgent


def ppo_clip_objective(r, adv, eps: float):
    """Elementwise min(r A, clip(r, 1-eps, 1+eps) A) for numpy arrays or tensors."""
    if isinstance(r, torch.Tensor):
        return torch.min(r * adv, torch.clamp(r, 1 - eps, 1 + eps) * adv)
    r = np.asarray(r, dtype=np.float64)
    adv = np.asarray(adv, dtype=np.float64)
    return np.minimum(r * adv, np.clip(r, 1 - eps, 1 + eps) * adv)


@dataclass
class PpoStats:
    objective: list = field(default_factory=list)  # full-batch objective after each epoch
    initial_objective: float = 0.0


def ppo_update(policy, optimizer, obs, acts, adv, eps: float, epochs: int, minibatch: int,
               rng: np.random.Generator, value_net=None, value_optimizer=None,
               returns=None) -> PpoStats:
    with torch.no_grad():
        old_logp = policy.log_prob(obs, acts)

    def batch_objective():
        with torch.no_grad():
            r = torch.exp(policy.log_prob(obs, acts) - old_logp)
            return float(ppo_clip_objective(r, adv, eps).mean())

    stats = PpoStats(initial_objective=batch_objective())
    n = obs.shape[0]
    for _ in range(epochs):
        for idx in np.array_split(rng.permutation(n), max(1, n // minibatch)):
            i = torch.as_tensor(idx)
            logp = gaussian_log_prob(policy(obs[i]), policy.log_std, acts[i])
            ratio = torch.exp(logp - old_logp[i])
            loss = -ppo_clip_objective(ratio, adv[i], eps).mean()
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            if value_net is not None:
                v_loss = ((value_net(obs[i]).squeeze(-1) - returns[i]) ** 2).mean()
                value_optimizer.zero_grad()
                v_loss.backward()
                value_optimizer.step()
        stats.objective.append(batch_objective())
    return stats


class PpoAgent(OnPolicyAgent):
    def __init__(self, obs_dim: int, action_dim: int, config):
        super().__init__(obs_dim, action_dim, config)
        self.optimizer = torch.optim.Adam(self.policy.parameters(), lr=config.step_size)
        self.vf_optimizer = torch.optim.Adam(self.value.parameters(), lr=config.step_size)

    def update(self, obs, acts, adv, ret):
        c = self.config
        return ppo_update(self.policy, self.optimizer, obs, acts, adv, c.clip_eps, c.epochs,
                          c.opt_batch_size, self.rng, self.value, self.vf_optimizer, ret)
