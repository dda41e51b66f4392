"""Deep deterministic policy gradient."""
from __future__ import annotations

import copy

import numpy as np
import torch

from .networks import MlpSpec, load_module_tensors, mlp, module_tensors
from .offpolicy import OffPolicyAgent, polyak


class Actor(torch.nn.Module):
    def __init__(self, obs_dim, act_dim, spec, generator):
        super().__init__()
        self.net = mlp(obs_dim, act_dim, spec, generator, out_gain=0.01)

    def forward(self, obs):
        return torch.tanh(self.net(obs))


def ddpg_actor_step(actor, critic_fn, obs: torch.Tensor, optimizer) -> float:
    """Ascend mean Q(s, mu(s)); ``critic_fn(obs, act)`` may be any differentiable function."""
    loss = -critic_fn(obs, actor(obs)).mean()
    optimizer.zero_grad()
    loss.backward()
    optimizer.step()
    return loss.item()


class DdpgAgent(OffPolicyAgent):
    def __init__(self, obs_dim: int, action_dim: int, config):
        super().__init__(obs_dim, action_dim, config)
        spec = MlpSpec(config.hidden_layers, config.hidden_size)
        self.actor = Actor(obs_dim, action_dim, spec, self.generator)
        self.critic = mlp(obs_dim + action_dim, 1, spec, self.generator)
        self.actor_target = copy.deepcopy(self.actor)
        self.critic_target = copy.deepcopy(self.critic)
        self.actor_optimizer = torch.optim.Adam(self.actor.parameters(), lr=config.step_size)
        self.critic_optimizer = torch.optim.Adam(self.critic.parameters(), lr=config.step_size)
        self.sigma = float(config.sigma)
        self.reward_scale = float(config.reward_scale)

    def policy_action(self, obs) -> np.ndarray:
        with torch.no_grad():
            mu = self.actor(self._tensor(obs)).numpy()
        if self.sigma == 0.0:
            return mu
        return mu + self.sigma * self.rng.standard_normal(self.action_dim)

    def critic_fn(self, obs, act):
        return self.critic(torch.cat([obs, act], dim=-1)).squeeze(-1)

    def train_step(self, batch) -> None:
        o, a, r, o2, term = self._batch_tensors(batch)
        with torch.no_grad():
            q_next = self.critic_target(torch.cat([o2, self.actor_target(o2)], dim=-1)).squeeze(-1)
            y = self.reward_scale * r + self.gamma * (1.0 - term) * q_next
        loss = ((self.critic_fn(o, a) - y) ** 2).mean()
        self._check(loss, "DDPG critic")
        self.critic_optimizer.zero_grad()
        loss.backward()
        self.critic_optimizer.step()
        ddpg_actor_step(self.actor, self.critic_fn, o, self.actor_optimizer)
        polyak(self.actor_target, self.actor)
        polyak(self.critic_target, self.critic)

    def state_tensors(self) -> dict:
        out = module_tensors("actor", self.actor)
        out.update(module_tensors("critic", self.critic))
        out.update(self.norm.state())
        return out

    def load_state_tensors(self, tensors: dict) -> None:
        load_module_tensors("actor", self.actor, tensors)
        load_module_tensors("critic", self.critic, tensors)
        self.actor_target = copy.deepcopy(self.actor)
        self.critic_target = copy.deepcopy(self.critic)
        self.norm.load(tensors)
