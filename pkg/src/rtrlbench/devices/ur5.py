"""UR5 arm under joint-speed control.

Velocities slew toward the commanded speeds under an acceleration limit and
angles integrate the new velocities (semi-implicit Euler). There is no
torque or current model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import CommandError

# Standard UR5 Denavit-Hartenberg table: (d, a, alpha) per joint.
UR5_DH = (
    (0.089159, 0.0, math.pi / 2),
    (0.0, -0.425, 0.0),
    (0.0, -0.39225, 0.0),
    (0.10915, 0.0, math.pi / 2),
    (0.09465, 0.0, -math.pi / 2),
    (0.0823, 0.0, 0.0),
)
# Upper arm and forearm lengths of the planar two-link model.
PLANAR_LINKS = (0.425, 0.392)


@dataclass(frozen=True)
class Ur5Params:
    accel_limit: float = 4.0  # rad/s^2
    max_speed: float = 3.0  # rad/s, safety clamp
    joint_lo: tuple = (-2 * math.pi,) * 6
    joint_hi: tuple = (2 * math.pi,) * 6


@dataclass(frozen=True)
class Ur5State:
    joint_angles: np.ndarray = field(default_factory=lambda: np.zeros(6))
    joint_velocities: np.ndarray = field(default_factory=lambda: np.zeros(6))


@dataclass(frozen=True, slots=True)
class Ur5Packet:
    tick_us: int
    joint_angles: np.ndarray
    joint_velocities: np.ndarray
    target_accelerations: np.ndarray

    @property
    def timestamp(self) -> float:
        return self.tick_us / 1e6


def ur5_step(state: Ur5State, speed_cmd, dt: float,
             params: Ur5Params = Ur5Params()) -> Ur5State:
    cmd = np.asarray(speed_cmd, dtype=np.float64)
    if cmd.shape != (6,) or not np.all(np.isfinite(cmd)):
        raise CommandError(f"bad UR5 speed command {speed_cmd!r}")
    if dt <= 0:
        raise ValueError("dt must be positive")
    cmd = np.clip(cmd, -params.max_speed, params.max_speed)
    reach = params.accel_limit * dt
    vel = state.joint_velocities
    new_vel = vel + np.clip(cmd - vel, -reach, reach)
    angles = state.joint_angles + new_vel * dt
    lo = np.asarray(params.joint_lo)
    hi = np.asarray(params.joint_hi)
    at_limit = (angles < lo) | (angles > hi)
    angles = np.clip(angles, lo, hi)
    new_vel = np.where(at_limit, 0.0, new_vel)
    return Ur5State(angles, new_vel)


def _dh(theta, d, a, alpha):
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array([
        [ct, -st * ca, st * sa, a * ct],
        [st, ct * ca, -ct * sa, a * st],
        [0.0, sa, ca, d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def ur5_fingertip(angles) -> np.ndarray:
    """Fingertip position (m) in the base frame for six joint angles."""
    q = np.asarray(angles, dtype=np.float64)
    if not np.all(np.isfinite(q)):
        raise CommandError("non-finite joint angles")
    T = np.eye(4)
    for theta, (d, a, alpha) in zip(q, UR5_DH):
        T = T @ _dh(theta, d, a, alpha)
    return T[:3, 3].copy()


def planar_fingertip(shoulder: float, elbow: float, links=PLANAR_LINKS) -> np.ndarray:
    """Fingertip of the shoulder/elbow plane as (reach, height) in metres."""
    l1, l2 = links
    return np.array([
        l1 * math.cos(shoulder) + l2 * math.cos(shoulder + elbow),
        l1 * math.sin(shoulder) + l2 * math.sin(shoulder + elbow),
    ])


def planar_ik(x: float, z: float, links=PLANAR_LINKS) -> tuple:
    """Elbow-up inverse kinematics for :func:`planar_fingertip`."""
    l1, l2 = links
    c = (x * x + z * z - l1 * l1 - l2 * l2) / (2 * l1 * l2)
    if abs(c) > 1:
        raise ValueError(f"({x}, {z}) is out of reach")
    elbow = -math.acos(c)
    shoulder = math.atan2(z, x) - math.atan2(l2 * math.sin(elbow), l1 + l2 * math.cos(elbow))
    return shoulder, elbow


class Ur5Device:
    def __init__(self, params: Ur5Params = Ur5Params(), state: Ur5State | None = None):
        self.params = params
        self.state = state or Ur5State()
        self._accel = np.zeros(6)

    def step(self, command, dt: float) -> None:
        prev = self.state.joint_velocities
        self.state = ur5_step(self.state, command, dt, self.params)
        self._accel = (self.state.joint_velocities - prev) / dt

    def set_pose(self, angles) -> None:
        self.state = Ur5State(np.asarray(angles, dtype=np.float64).copy(), np.zeros(6))
        self._accel = np.zeros(6)

    def emit(self, tick_us: int) -> Ur5Packet:
        s = self.state
        return Ur5Packet(tick_us, s.joint_angles.copy(), s.joint_velocities.copy(),
                         self._accel.copy())

    def snapshot(self) -> dict:
        p = self.params
        return {"accel_limit": p.accel_limit, "max_speed": p.max_speed,
                "joint_lo": list(p.joint_lo), "joint_hi": list(p.joint_hi)}
