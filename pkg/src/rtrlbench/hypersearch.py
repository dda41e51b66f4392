"""Random hyper-parameter search.

Every searched value is drawn uniformly on a log scale: ``base ** e`` with
the exponent ``e`` uniform on its range (a uniform integer for powers of
two). The discount and trace horizons are stored as unit positions ``u``
and resolved per task, see :mod:`rtrlbench.config`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .config import HyperConfig, c_from_unit, gamma_from_c  # noqa: F401  (re-exported)
from .errors import ConfigurationError

WEIGHT_BUDGET = 100_000
MIN_HIDDEN_EXP = 3
# UR-Reacher-2 dimensions; hidden sizes are capped for these so one config
# set serves both search tasks (DXL-Reacher's networks are smaller).
REFERENCE_DIMS = (8, 2)


@dataclass(frozen=True)
class Param:
    name: str
    lo: float  # exponent range
    hi: float
    base: float = 10.0
    integer: bool = False

    def sample(self, rng: np.random.Generator):
        if self.integer:
            e = int(rng.integers(int(self.lo), int(self.hi) + 1))
            return int(round(self.base ** e))
        return float(self.base ** rng.uniform(self.lo, self.hi))

    def contains(self, value, tol: float = 1e-12) -> bool:
        e = math.log(value, self.base)
        if self.integer and abs(e - round(e)) > 1e-9:
            return False
        return self.lo - tol <= e <= self.hi + tol


BATCH = Param("batch_size", 8, 13, 2, True)
STEP = Param("step_size", -5, -2)
SPACES = {
    "trpo": (BATCH, Param("vf_step_size", -5, -2), Param("delta_kl", -2.5, -0.5)),
    "ppo": (BATCH, STEP),  # opt_batch_size depends on batch_size
    "softq": (BATCH, STEP, Param("epochs", 0, 2, 2, True), Param("reward_scale", 0, 2)),
    "ddpg": (BATCH, STEP, Param("sigma", -2, math.log10(5)), Param("reward_scale", 0, 2)),
}


def opt_batch_param(batch_size: int) -> Param:
    return Param("opt_batch_size", 3, int(round(math.log2(batch_size))), 2, True)


@dataclass(frozen=True)
class SearchSpace:
    algorithm: str
    obs_dim: int = REFERENCE_DIMS[0]
    act_dim: int = REFERENCE_DIMS[1]
    weight_budget: int = WEIGHT_BUDGET

    def __post_init__(self):
        if self.algorithm not in SPACES:
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}")

    @property
    def params(self) -> tuple:
        return SPACES[self.algorithm]

    def hidden_exp_range(self, layers: int) -> tuple:
        return MIN_HIDDEN_EXP, hidden_size_cap(layers, self.obs_dim, self.act_dim,
                                               self.algorithm, self.weight_budget)


def steps_per_episode(episode_length_s: float, action_cycle_s: float) -> int:
    return int(round(episode_length_s / action_cycle_s))


def mlp_weight_count(in_dim: int, out_dim: int, layers: int, size: int) -> int:
    dims = [in_dim] + [size] * layers + [out_dim]
    return sum((a + 1) * b for a, b in zip(dims[:-1], dims[1:]))


def network_weight_counts(algorithm: str, layers: int, size: int, obs_dim: int,
                          act_dim: int) -> dict:
    """Weights of each network an algorithm trains (log-std counted with the policy)."""
    if algorithm in ("trpo", "ppo"):
        return {"policy": mlp_weight_count(obs_dim, act_dim, layers, size) + act_dim,
                "value": mlp_weight_count(obs_dim, 1, layers, size)}
    if algorithm == "ddpg":
        return {"actor": mlp_weight_count(obs_dim, act_dim, layers, size),
                "critic": mlp_weight_count(obs_dim + act_dim, 1, layers, size)}
    if algorithm == "softq":
        return {"q": mlp_weight_count(obs_dim + act_dim, 1, layers, size),
                "sampler": mlp_weight_count(obs_dim + act_dim, act_dim, layers, size)}
    raise ConfigurationError(f"unknown algorithm {algorithm!r}")


@lru_cache(maxsize=None)
def hidden_size_cap(layers: int, obs_dim: int, act_dim: int, algorithm: str = "trpo",
                    param_budget: int = WEIGHT_BUDGET) -> int:
    """Largest exponent X such that every network with 2**X units fits the budget."""
    if not 1 <= layers <= 4:
        raise ConfigurationError(f"hidden layers must be in [1, 4], got {layers}")
    x = MIN_HIDDEN_EXP
    if max(network_weight_counts(algorithm, layers, 2 ** x, obs_dim, act_dim).values()) \
            > param_budget:
        raise ConfigurationError("even the smallest network exceeds the weight budget")
    while max(network_weight_counts(algorithm, layers, 2 ** (x + 1), obs_dim,
                                    act_dim).values()) <= param_budget:
        x += 1
    return x


def sample_config(space: SearchSpace, rng: np.random.Generator) -> HyperConfig:
    values = {p.name: p.sample(rng) for p in space.params}
    if space.algorithm == "ppo":
        values["opt_batch_size"] = opt_batch_param(values["batch_size"]).sample(rng)
    values["u_gamma"] = float(rng.random())
    if space.algorithm in ("trpo", "ppo"):
        values["u_lambda"] = float(rng.random())
    layers = int(rng.integers(1, 5))
    lo, hi = space.hidden_exp_range(layers)
    values["hidden_layers"] = layers
    values["hidden_size"] = 2 ** int(rng.integers(lo, hi + 1))
    values["init_seed"] = int(rng.integers(2 ** 31))
    return HyperConfig(algorithm=space.algorithm, **values)


def sample_configs(algorithm: str, count: int = 30, seed: int = 0,
                   obs_dim: Optional[int] = None, act_dim: Optional[int] = None) -> list:
    """The reproducible set of ``count`` configurations for one master seed."""
    space = SearchSpace(algorithm, obs_dim or REFERENCE_DIMS[0], act_dim or REFERENCE_DIMS[1])
    rng = np.random.default_rng(seed)
    return [sample_config(space, rng) for _ in range(count)]


def in_space(config: HyperConfig, space: SearchSpace) -> list:
    """Names of searched values that fall outside their ranges (empty if conforming)."""
    bad = [p.name for p in space.params if not p.contains(getattr(config, p.name))]
    if config.algorithm == "ppo" and not opt_batch_param(config.batch_size).contains(
            config.opt_batch_size):
        bad.append("opt_batch_size")
    lo, hi = space.hidden_exp_range(config.hidden_layers)
    if not Param("hidden_size", lo, hi, 2, True).contains(config.hidden_size):
        bad.append("hidden_size")
    for name in ("u_gamma",) + (("u_lambda",) if config.uses_lambda else ()):
        u = getattr(config, name)
        if u is None or not 0.0 <= u <= 1.0:
            bad.append(name)
    return bad
