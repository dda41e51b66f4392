"""Trust region policy optimization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .networks import flat_grad, gaussian_kl, gaussian_log_prob, get_flat, set_flat
from .onpolicy import OnPolicyAgent, fit_value

CG_ITERS = 10
CG_DAMPING = 0.1
BACKTRACKS = 10
KL_SLACK = 1.5
VF_EPOCHS = 3
VF_MINIBATCH = 64


@dataclass
class TrpoStats:
    kl: float
    improvement: float
    expected_improvement: float
    step_fraction: float
    accepted: bool
    flagged: bool  # the solver or line search failed and the update was skipped
    reason: str = ""


def conjugate_gradient(Avp, b: torch.Tensor, iters: int = CG_ITERS, tol: float = 1e-10):
    x = torch.zeros_like(b)
    r = b.clone()
    p = b.clone()
    rr = r @ r
    for _ in range(iters):
        Ap = Avp(p)
        denom = p @ Ap
        if denom <= 0:
            break
        alpha = rr / denom
        x += alpha * p
        r -= alpha * Ap
        new_rr = r @ r
        if new_rr < tol:
            break
        p = r + (new_rr / rr) * p
        rr = new_rr
    return x


def trpo_update(policy, obs: torch.Tensor, acts: torch.Tensor, adv: torch.Tensor,
                max_kl: float, cg_iters: int = CG_ITERS, damping: float = CG_DAMPING,
                backtracks: int = BACKTRACKS) -> TrpoStats:
    """One constrained step on the surrogate E[r A] with mean KL <= ``max_kl``."""
    params = list(policy.parameters())
    with torch.no_grad():
        old_mean = policy(obs)
        old_log_std = policy.log_std.detach().clone()
        old_logp = gaussian_log_prob(old_mean, old_log_std, acts)

    def surrogate():
        return (torch.exp(policy.log_prob(obs, acts) - old_logp) * adv).mean()

    def mean_kl():
        return gaussian_kl(old_mean, old_log_std, policy(obs), policy.log_std).mean()

    g = flat_grad(surrogate(), params).detach()
    if not torch.all(torch.isfinite(g)):
        return TrpoStats(0.0, 0.0, 0.0, 0.0, False, True, "non-finite gradient")
    if torch.allclose(g, torch.zeros_like(g), atol=0.0, rtol=0.0):
        return TrpoStats(0.0, 0.0, 0.0, 0.0, False, False, "zero gradient")

    def fvp(v):
        kl = mean_kl()
        grads = flat_grad(kl, params, create_graph=True)
        return flat_grad(grads @ v, params).detach() + damping * v

    step = conjugate_gradient(fvp, g, cg_iters)
    shs = 0.5 * float(step @ fvp(step))
    if not np.isfinite(shs) or shs <= 0:
        return TrpoStats(0.0, 0.0, 0.0, 0.0, False, True, "conjugate gradient failed")
    full_step = step * np.sqrt(max_kl / shs)
    expected = float(g @ full_step)

    theta = get_flat(params).clone()
    with torch.no_grad():
        before = float(surrogate())
        frac = 1.0
        for _ in range(backtracks):
            set_flat(params, theta + frac * full_step)
            improve = float(surrogate()) - before
            kl = float(mean_kl())
            if np.isfinite(kl) and kl <= KL_SLACK * max_kl and improve > 0:
                return TrpoStats(kl, improve, expected * frac, frac, True, False)
            frac *= 0.5
        set_flat(params, theta)
    return TrpoStats(0.0, 0.0, expected, 0.0, False, True, "line search failed")


class TrpoAgent(OnPolicyAgent):
    def __init__(self, obs_dim: int, action_dim: int, config):
        super().__init__(obs_dim, action_dim, config)
        self.vf_optimizer = torch.optim.Adam(self.value.parameters(), lr=config.vf_step_size)
        self.vf_epochs = int(config.extra.get("vf_epochs", VF_EPOCHS))

    def update(self, obs, acts, adv, ret):
        stats = trpo_update(self.policy, obs, acts, adv, self.config.delta_kl)
        fit_value(self.value, self.vf_optimizer, obs, ret, self.vf_epochs, VF_MINIBATCH,
                  self.rng)
        return stats
