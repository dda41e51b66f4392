"""Scripted baselines: movej-style joint moves, PID current control, the
Mover wall-avoidance rule and a seek-dock driver for Docker."""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import numpy as np
import yaml

from ..devices import Create2Params, SeekDock, planar_fingertip, planar_ik, ur5_fingertip
from ..devices.create2 import ir_signal
from ..errors import ConfigurationError
from ..runtime import denormalize, normalize
from .base import Agent

MOVEJ_DURATION_S = 2.0
MOVEJ_RAMP_S = 0.5
MOVER_THRESHOLD = 0.55
MOVER_FRONT = (2, 3)  # centre-left and centre-right light bumpers


def _to_action(cmd, spec) -> np.ndarray:
    """Native command to the normalized action scale without clamping."""
    lo, hi = spec.action_lo, spec.action_hi
    return (2.0 * np.asarray(cmd, dtype=np.float64) - (hi + lo)) / (hi - lo)


# --------------------------------------------------------------------- movej
def movej_profile(t: float, delta, duration: float = MOVEJ_DURATION_S,
                  ramp: float = MOVEJ_RAMP_S) -> tuple:
    """Position offset and velocity of a symmetric trapezoid covering ``delta`` in ``duration``."""
    delta = np.asarray(delta, dtype=np.float64)
    if not 0 < 2 * ramp <= duration:
        raise ValueError("need 0 < 2 * ramp <= duration")
    peak = delta / (duration - ramp)
    accel = peak / ramp
    if t <= 0:
        return np.zeros_like(delta), np.zeros_like(delta)
    if t < ramp:
        return 0.5 * accel * t * t, accel * t
    if t < duration - ramp:
        return 0.5 * peak * ramp + peak * (t - ramp), peak
    if t < duration:
        rest = duration - t
        return delta - 0.5 * accel * rest * rest, accel * rest
    return delta.copy(), np.zeros_like(delta)


def position_ik(target, q0, joints=(0, 1, 2), iters: int = 100, tol: float = 1e-10) -> np.ndarray:
    """Damped least-squares fingertip IK over ``joints``, starting from ``q0``."""
    q = np.array(q0, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    h = 1e-7
    for _ in range(iters):
        err = target - ur5_fingertip(q)
        if err @ err < tol:
            break
        J = np.empty((3, len(joints)))
        for c, j in enumerate(joints):
            dq = q.copy()
            dq[j] += h
            J[:, c] = (ur5_fingertip(dq) - ur5_fingertip(q)) / h
        step = J.T @ np.linalg.solve(J @ J.T + 1e-6 * np.eye(3), err)
        q[list(joints)] += step
    return q


class MovejAgent(Agent):
    """Joint-space move to the target pose in a fixed time, then hold still.

    The target comes from the observation (fingertip offset), so the agent
    needs nothing beyond what the learners see.
    """

    clip_actions = False

    def __init__(self, spec, duration: float = MOVEJ_DURATION_S, ramp: float = MOVEJ_RAMP_S,
                 gain: float = 5.0):
        super().__init__(spec.obs_dim, spec.action_dim)
        if spec.task_id not in ("ur-reacher-2", "ur-reacher-6"):
            raise ConfigurationError(f"movej drives the UR5 tasks, not {spec.task_id!r}")
        self.spec = spec
        self.tau = spec.cycle.action_cycle_s
        self.duration = duration
        self.ramp = ramp
        self.gain = gain
        self.k = 0
        self.start = None
        self.delta = None

    def _joints(self, obs) -> np.ndarray:
        return np.asarray(obs[:self.action_dim], dtype=np.float64)

    def target_joints(self, obs) -> np.ndarray:
        q = self._joints(obs)
        diff = np.asarray(obs[-3:] if self.action_dim == 6 else obs[-2:], dtype=np.float64)
        if self.action_dim == 2:
            x, z = planar_fingertip(q[0], q[1]) + diff
            return np.array(planar_ik(x, z))
        return position_ik(ur5_fingertip(q) + diff, q)

    def reset(self, obs) -> None:
        self.k = 0
        self.start = self._joints(obs)
        self.delta = self.target_joints(obs) - self.start

    def act(self, obs) -> np.ndarray:
        if self.start is None:
            self.reset(obs)
        t = self.k * self.tau
        self.k += 1
        if t >= self.duration:
            return np.zeros(self.action_dim)
        now, _ = movej_profile(t, self.delta, self.duration, self.ramp)
        nxt, _ = movej_profile(t + self.tau, self.delta, self.duration, self.ramp)
        speed = (nxt - now) / self.tau + self.gain * (self.start + now - self._joints(obs))
        return _to_action(speed, self.spec)


# ----------------------------------------------------------------------- PID
@dataclass
class PidState:
    kp: float
    ki: float
    kd: float
    integral_limit: float = math.inf
    integral: float = 0.0
    prev_error: Optional[float] = None

    def __post_init__(self):
        if self.integral_limit <= 0:
            raise ConfigurationError("integral_limit must be positive")

    def reset(self) -> None:
        self.integral = 0.0
        self.prev_error = None


def pid_step(state: PidState, error: float, dt: float) -> float:
    """Advance ``state`` by one sample and return the (unclamped) control output."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    lim = state.integral_limit
    state.integral = min(max(state.integral + error * dt, -lim), lim)
    deriv = 0.0 if state.prev_error is None else (error - state.prev_error) / dt
    state.prev_error = error
    return state.kp * error + state.ki * state.integral + state.kd * deriv


def load_pid_gains(task_id: str) -> dict:
    text = resources.files("rtrlbench").joinpath("data/pid_gains.yaml").read_text()
    table = yaml.safe_load(text) or {}
    if task_id not in table:
        raise ConfigurationError(f"no PID gains stored for {task_id!r}")
    return dict(table[task_id])


class PidAgent(Agent):
    """Current command from a PID loop on the angle error (DXL tasks)."""

    clip_actions = False

    def __init__(self, spec, gains: Optional[dict] = None):
        super().__init__(spec.obs_dim, spec.action_dim)
        if spec.task_id not in ("dxl-reacher", "dxl-tracker"):
            raise ConfigurationError(f"PID drives the DXL tasks, not {spec.task_id!r}")
        self.spec = spec
        gains = gains if gains is not None else load_pid_gains(spec.task_id)
        self.state = PidState(**gains)
        self.dt = spec.cycle.action_cycle_s

    def reset(self, obs) -> None:
        self.state.reset()

    def act(self, obs) -> np.ndarray:
        error = float(obs[2] - obs[0])
        return _to_action([pid_step(self.state, error, self.dt)], self.spec)


# -------------------------------------------------------------------- Create
class MoverScriptAgent(Agent):
    """Turn in place while either front wall sensor reads above the threshold."""

    def __init__(self, spec, threshold: float = MOVER_THRESHOLD):
        super().__init__(spec.obs_dim, spec.action_dim)
        self.spec = spec
        self.threshold = threshold

    def act(self, obs) -> np.ndarray:
        cmd = mover_script(obs, self.threshold)
        return normalize(np.asarray(cmd), self.spec.action_lo, self.spec.action_hi)


def mover_script(obs, threshold: float = MOVER_THRESHOLD) -> tuple:
    """Wheel speeds in mm/s for a Mover observation."""
    if any(obs[i] > threshold for i in MOVER_FRONT):
        return (-150.0, 150.0)
    return (150.0, 150.0)


@dataclass
class _ObsPacket:
    wall_signals: tuple
    bump: tuple
    ir_dock_bits: tuple
    charging: bool
    wheel_speeds: tuple = (0.0, 0.0)
    distance: float = 0.0


class SeekDockAgent(Agent):
    """Drives the seek-dock controller from Docker observations."""

    def __init__(self, spec, params: Create2Params = Create2Params()):
        super().__init__(spec.obs_dim, spec.action_dim)
        if spec.task_id != "create-docker":
            raise ConfigurationError(f"seek-dock drives create-docker, not {spec.task_id!r}")
        self.spec = spec
        self.params = params
        self.controller = SeekDock(params, spec.cycle.action_cycle_s)

    def reset(self, obs) -> None:
        self.controller.reset()

    def packet(self, obs) -> _ObsPacket:
        lo, hi = self.params.ir_range
        dist = -denormalize(np.asarray(obs[1:7]), -hi, -lo)
        walls = tuple(ir_signal(d, self.params) for d in dist)
        return _ObsPacket(walls, tuple(bool(b > 0) for b in obs[7:9]),
                          tuple(int(b >= 0) for b in obs[11:20]), bool(obs[0] > 0))

    def act(self, obs) -> np.ndarray:
        cmd = self.controller.command(self.packet(obs))
        return normalize(np.asarray(cmd), self.spec.action_lo, self.spec.action_hi)


PID_GRID = dict(kp=(10.0, 20.0, 40.0, 80.0, 160.0), ki=(0.0, 5.0, 20.0),
                kd=(0.0, 1.0, 2.0, 4.0, 8.0))


def evaluate_pid(task_id: str, gains: dict, episodes: int = 20, seed: int = 0) -> float:
    """Average return of a PID agent on a fresh simulated task."""
    from ..runtime import Environment, run_episode
    from ..tasks import make_task

    env = Environment(make_task(task_id), seed=seed)
    agent = PidAgent(env.spec, gains)
    returns = [run_episode(env, agent, keep_steps=False).episode_return for _ in range(episodes)]
    return float(np.mean(returns))


def tune_pid(task_id: str, grid: dict = PID_GRID, integral_limit: float = 1.0,
             episodes: int = 20, seed: int = 0) -> tuple:
    """Exhaustive grid search; returns (best gains, best average return)."""
    best, best_score = None, -math.inf
    for kp in grid["kp"]:
        for ki in grid["ki"]:
            for kd in grid["kd"]:
                gains = dict(kp=kp, ki=ki, kd=kd, integral_limit=integral_limit)
                score = evaluate_pid(task_id, gains, episodes, seed)
                if score > best_score:
                    best, best_score = gains, score
    return best, best_score
