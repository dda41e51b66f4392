"""Dynamixel MX-64 under current control.

First-order rotor model ``J dv/dt = k_t i - b v`` integrated exactly over
each tick (the current is held constant within a tick).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .. import _kernels
from ..errors import CommandError


@dataclass(frozen=True)
class DxlParams:
    torque_constant: float = 0.0045  # N*m/mA
    damping: float = 0.002  # N*m*s
    inertia: float = 0.0008  # kg*m^2
    angle_lo: float = -math.pi
    angle_hi: float = math.pi
    current_limit: float = 1000.0  # mA

    def terminal_velocity(self, current: float) -> float:
        return self.torque_constant * current / self.damping


@dataclass(frozen=True)
class DxlState:
    angle: float = 0.0  # rad
    velocity: float = 0.0  # rad/s
    current: float = 0.0  # mA


@dataclass(frozen=True, slots=True)
class DxlPacket:
    tick_us: int
    angle: float
    velocity: float
    current: float

    @property
    def timestamp(self) -> float:
        return self.tick_us / 1e6


def dxl_step(state: DxlState, current_cmd: float, dt: float,
             params: DxlParams = DxlParams()) -> DxlState:
    current_cmd = float(current_cmd)
    if not math.isfinite(current_cmd):
        raise CommandError(f"non-finite current command {current_cmd!r}")
    if dt <= 0:
        raise ValueError("dt must be positive")
    i = min(max(current_cmd, -params.current_limit), params.current_limit)
    angle, velocity = _kernels.dxl_integrate(
        state.angle, state.velocity, i, dt, params.torque_constant,
        params.damping, params.inertia, params.angle_lo, params.angle_hi)
    return DxlState(angle, velocity, i)


class DxlDevice:
    def __init__(self, params: DxlParams = DxlParams(), state: DxlState | None = None):
        self.params = params
        self.state = state or DxlState()

    def step(self, command, dt: float) -> None:
        cmd = command[0] if hasattr(command, "__len__") else command
        self.state = dxl_step(self.state, cmd, dt, self.params)

    def set_angle(self, angle: float) -> None:
        self.state = DxlState(float(angle), 0.0, 0.0)

    def emit(self, tick_us: int) -> DxlPacket:
        s = self.state
        return DxlPacket(tick_us, s.angle, s.velocity, s.current)

    def snapshot(self) -> dict:
        p = self.params
        return {"torque_constant": p.torque_constant, "damping": p.damping,
                "inertia": p.inertia, "angle_lo": p.angle_lo,
                "angle_hi": p.angle_hi, "current_limit": p.current_limit}
