"""Learning agents, scripted baselines and the id-based factory used by the CLI."""
from dataclasses import replace
from typing import Optional

from ..config import HyperConfig
from ..errors import ConfigurationError
from .advantages import gae_advantages, normalize_advantages
from .base import Agent, RandomAgent, ZeroAgent
from .ddpg import DdpgAgent, ddpg_actor_step
from .offpolicy import ReplayBuffer, polyak
from .ppo import PpoAgent, PpoStats, ppo_clip_objective, ppo_update
from .scripted import (MovejAgent, MoverScriptAgent, PidAgent, PidState, SeekDockAgent,
                       load_pid_gains, mover_script, movej_profile, pid_step, tune_pid)
from .softq import SoftQAgent, rbf_kernel, soft_value
from .trpo import TrpoAgent, TrpoStats, conjugate_gradient, trpo_update

LEARNERS = {"trpo": TrpoAgent, "ppo": PpoAgent, "softq": SoftQAgent, "ddpg": DdpgAgent}
SCRIPTED = ("movej", "pid", "mover-script", "seek-dock", "random", "zero")
AGENT_IDS = tuple(LEARNERS) + SCRIPTED


def make_agent(agent_id: str, spec, config: Optional[HyperConfig] = None,
               seed: Optional[int] = None) -> Agent:
    """Build an agent for a task spec.

    Learners need ``config``; gamma and lambda are resolved for the task's
    episode length here, and ``seed`` (if given) replaces the config's init seed.
    """
    if agent_id in LEARNERS:
        if config is None:
            raise ConfigurationError(f"agent {agent_id!r} needs a hyper-parameter config")
        if config.algorithm != agent_id:
            raise ConfigurationError(
                f"config is for {config.algorithm!r}, agent is {agent_id!r}")
        from ..hypersearch import steps_per_episode
        c = spec.cycle
        config = config.for_task(steps_per_episode(c.episode_length_s, c.action_cycle_s))
        if seed is not None:
            config = replace(config, init_seed=seed, extra=dict(config.extra))
        return LEARNERS[agent_id](spec.obs_dim, spec.action_dim, config)
    if agent_id == "movej":
        return MovejAgent(spec)
    if agent_id == "pid":
        return PidAgent(spec)
    if agent_id == "mover-script":
        if spec.task_id != "create-mover":
            raise ConfigurationError(f"mover-script drives create-mover, not {spec.task_id!r}")
        return MoverScriptAgent(spec)
    if agent_id == "seek-dock":
        return SeekDockAgent(spec)
    if agent_id == "random":
        return RandomAgent(spec.obs_dim, spec.action_dim, 0 if seed is None else seed)
    if agent_id == "zero":
        return ZeroAgent(spec.obs_dim, spec.action_dim)
    raise ConfigurationError(f"unknown agent {agent_id!r}; choose from {', '.join(AGENT_IDS)}")


__all__ = [
    "AGENT_IDS", "Agent", "DdpgAgent", "LEARNERS", "MovejAgent", "MoverScriptAgent",
    "PidAgent", "PidState", "PpoAgent", "PpoStats", "RandomAgent", "ReplayBuffer",
    "SeekDockAgent", "SoftQAgent", "TrpoAgent", "TrpoStats", "ZeroAgent", "conjugate_gradient",
    "ddpg_actor_step", "gae_advantages", "load_pid_gains", "make_agent", "mover_script",
    "movej_profile", "normalize_advantages", "pid_step", "polyak", "ppo_clip_objective",
    "ppo_update", "rbf_kernel", "soft_value", "trpo_update", "tune_pid",
]
