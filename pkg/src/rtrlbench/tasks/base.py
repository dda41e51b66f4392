"""Task specification and the shared task protocol.

A task turns a device into a learning problem: it builds observations and
rewards from the newest packets, converts normalized actions into device
commands, and scripts the reset between episodes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigurationError
from ..runtime import CycleConfig, denormalize


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    action_dim: int
    action_bounds: tuple  # ((lo, hi), ...) in native units
    obs_layout: tuple  # ((name, length), ...)
    cycle: CycleConfig
    reward_id: str
    reset_id: str

    def __post_init__(self):
        if len(self.action_bounds) != self.action_dim:
            raise ConfigurationError(
                f"{self.task_id}: {len(self.action_bounds)} action bounds for "
                f"{self.action_dim} action dims")
        for lo, hi in self.action_bounds:
            if not lo < hi:
                raise ConfigurationError(f"{self.task_id}: bad action bounds ({lo}, {hi})")
        if any(n <= 0 for _, n in self.obs_layout):
            raise ConfigurationError(f"{self.task_id}: empty observation slice")

    @property
    def obs_dim(self) -> int:
        return sum(n for _, n in self.obs_layout)

    @property
    def action_lo(self) -> np.ndarray:
        return np.array([b[0] for b in self.action_bounds], dtype=np.float64)

    @property
    def action_hi(self) -> np.ndarray:
        return np.array([b[1] for b in self.action_bounds], dtype=np.float64)

    def obs_slices(self) -> dict:
        out, start = {}, 0
        for name, n in self.obs_layout:
            out[name] = slice(start, start + n)
            start += n
        return out

    def to_dict(self) -> dict:
        c = self.cycle
        return {
            "task_id": self.task_id,
            "action_dim": self.action_dim,
            "action_bounds": [list(b) for b in self.action_bounds],
            "obs_layout": [[name, n] for name, n in self.obs_layout],
            "cycle": {"action_cycle_s": c.action_cycle_s,
                      "readwrite_cycle_s": c.readwrite_cycle_s,
                      "episode_length_s": c.episode_length_s},
            "reward_id": self.reward_id,
            "reset_id": self.reset_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TaskSpec":
        return cls(
            task_id=d["task_id"],
            action_dim=int(d["action_dim"]),
            action_bounds=tuple(tuple(float(v) for v in b) for b in d["action_bounds"]),
            obs_layout=tuple((str(name), int(n)) for name, n in d["obs_layout"]),
            cycle=CycleConfig(**d["cycle"]),
            reward_id=d["reward_id"],
            reset_id=d["reset_id"],
        )


class Task:
    """Base class; subclasses set ``spec`` and fill in the hooks."""

    spec: TaskSpec

    def make_device(self, params: Optional[dict] = None):
        raise NotImplementedError

    def command(self, action) -> np.ndarray:
        return denormalize(np.asarray(action, dtype=np.float64),
                           self.spec.action_lo, self.spec.action_hi)

    def reset(self, env, rng: np.random.Generator, previous_outcome) -> None:
        raise NotImplementedError

    def observe(self, buffer, prev_action, t: float) -> np.ndarray:
        raise NotImplementedError

    def raw_reward(self, buffer, t: float) -> float:
        raise NotImplementedError

    def termination(self, buffer) -> Optional[str]:
        return None

    def outcome(self) -> bool:
        """Whether the episode that just ended counts as a success."""
        return False
