"""Soft Q-learning with an amortized Stein-variational sampler.

The critic is trained toward ``r + gamma V(s')`` with the soft value
``V(s') = alpha log mean_j exp(Q(s', a_j) / alpha)`` estimated from uniform
action samples. The sampler maps ``(s, noise)`` through a tanh-squashed MLP
and is nudged along the Stein variational gradient of the energy policy
``pi(a|s) ~ exp(Q(s, a) / alpha)``.
"""
from __future__ import annotations

import copy
import math

import numpy as np
import torch

from .networks import DTYPE, MlpSpec, load_module_tensors, mlp, module_tensors
from .offpolicy import OffPolicyAgent, polyak

VALUE_SAMPLES = 16
SVGD_PARTICLES = 16
SQUASH_EPS = 1e-6
MIN_REWARD_SCALE = 1e-8


def soft_value(q_values, alpha: float):
    """``alpha * log(mean(exp(q / alpha)))`` over the last axis (numpy or torch)."""
    if isinstance(q_values, torch.Tensor):
        m = q_values.shape[-1]
        return alpha * (torch.logsumexp(q_values / alpha, dim=-1) - math.log(m))
    q = np.asarray(q_values, dtype=np.float64) / alpha
    top = q.max(axis=-1, keepdims=True)
    lme = np.log(np.mean(np.exp(q - top), axis=-1)) + top[..., 0]
    return alpha * lme


def rbf_kernel(x: torch.Tensor):
    """Kernel matrix and its gradient wrt the first argument, median bandwidth.

    ``x`` is (..., K, d). Returns ``kappa`` (..., K, K) and ``grad`` (..., K, K, d)
    with ``grad[..., j, i, :] = d kappa(x_j, x_i) / d x_j``.
    """
    diff = x.unsqueeze(-2) - x.unsqueeze(-3)  # [j, i] = x_j - x_i
    dist2 = (diff ** 2).sum(-1)
    k = x.shape[-2]
    med = dist2.flatten(-2).median(dim=-1).values
    h = (med / math.log(k + 1)).clamp_min(1e-8)[..., None, None]
    kappa = torch.exp(-dist2 / h)
    grad = -2.0 * diff / h.unsqueeze(-1) * kappa.unsqueeze(-1)
    return kappa, grad


class SoftQAgent(OffPolicyAgent):
    def __init__(self, obs_dim: int, action_dim: int, config):
        super().__init__(obs_dim, action_dim, config)
        spec = MlpSpec(config.hidden_layers, config.hidden_size)
        self.q = mlp(obs_dim + action_dim, 1, spec, self.generator)
        self.q_target = copy.deepcopy(self.q)
        self.sampler = mlp(obs_dim + action_dim, action_dim, spec, self.generator)
        self.q_optimizer = torch.optim.Adam(self.q.parameters(), lr=config.step_size)
        self.sampler_optimizer = torch.optim.Adam(self.sampler.parameters(), lr=config.step_size)
        self.alpha = 1.0 / max(config.reward_scale, MIN_REWARD_SCALE)
        self.value_samples = int(config.extra.get("value_samples", VALUE_SAMPLES))
        self.particles = int(config.extra.get("particles", SVGD_PARTICLES))

    @property
    def train_repeats(self) -> int:
        return int(self.config.epochs)

    def _noise(self, *shape) -> torch.Tensor:
        return torch.as_tensor(self.rng.standard_normal(shape), dtype=DTYPE)

    def sample_actions(self, obs_n: torch.Tensor, k: int) -> torch.Tensor:
        """(B, k, act) sampler draws for normalized observations (B, obs)."""
        b = obs_n.shape[0]
        rep = obs_n.unsqueeze(1).expand(b, k, obs_n.shape[-1])
        xi = self._noise(b, k, self.action_dim)
        return torch.tanh(self.sampler(torch.cat([rep, xi], dim=-1)))

    def policy_action(self, obs) -> np.ndarray:
        with torch.no_grad():
            return self.sample_actions(self._tensor(obs)[None], 1)[0, 0].numpy()

    def _q(self, net, obs_n, acts):
        """Q for (B, obs) observations against (B, M, act) actions -> (B, M)."""
        rep = obs_n.unsqueeze(1).expand(acts.shape[0], acts.shape[1], obs_n.shape[-1])
        return net(torch.cat([rep, acts], dim=-1)).squeeze(-1)

    def train_step(self, batch) -> None:
        o, a, r, o2, term = self._batch_tensors(batch)
        b = o.shape[0]
        with torch.no_grad():
            uniform = torch.as_tensor(
                self.rng.uniform(-1.0, 1.0, (b, self.value_samples, self.action_dim)),
                dtype=DTYPE)
            v_next = soft_value(self._q(self.q_target, o2, uniform), self.alpha)
            y = r + self.gamma * (1.0 - term) * v_next
        q_loss = 0.5 * ((self.q(torch.cat([o, a], dim=-1)).squeeze(-1) - y) ** 2).mean()
        self._check(q_loss, "soft-Q critic")
        self.q_optimizer.zero_grad()
        q_loss.backward()
        self.q_optimizer.step()

        acts = self.sample_actions(o, self.particles)
        fixed = acts.detach().requires_grad_(True)
        log_p = self._q(self.q, o, fixed) / self.alpha + \
            torch.log(1.0 - fixed ** 2 + SQUASH_EPS).sum(-1)
        grad_log_p = torch.autograd.grad(log_p.sum(), fixed)[0]
        kappa, kappa_grad = rbf_kernel(fixed.detach())
        # phi_i = mean_j kappa(a_j, a_i) grad log p(a_j) + grad_j kappa(a_j, a_i)
        phi = (torch.einsum("bji,bjd->bid", kappa, grad_log_p) + kappa_grad.sum(1)) / self.particles
        sampler_loss = -(acts * phi.detach()).sum(-1).mean()
        self._check(sampler_loss, "sampler")
        self.sampler_optimizer.zero_grad()
        sampler_loss.backward()
        self.sampler_optimizer.step()
        polyak(self.q_target, self.q)

    def state_tensors(self) -> dict:
        out = module_tensors("q", self.q)
        out.update(module_tensors("sampler", self.sampler))
        out.update(self.norm.state())
        return out

    def load_state_tensors(self, tensors: dict) -> None:
        load_module_tensors("q", self.q, tensors)
        load_module_tensors("sampler", self.sampler, tensors)
        self.q_target = copy.deepcopy(self.q)
        self.norm.load(tensors)
