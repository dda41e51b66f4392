"""iRobot Create 2 in a walled arena with a docking station.

The robot is a disk driven by two wheels. Contact with a wall clamps the
pose to the boundary and raises the bump flag on the side of the contact.
Six front-facing infrared wall sensors are ray-cast against the walls and
converted to raw signals with an inverse-square model; the dock emits two
buoy beams and a short-range force field seen by three receivers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .. import _kernels
from ..errors import SensorDataError

_DEG = math.pi / 180.0


@dataclass(frozen=True)
class Arena:
    width: float = 0.914  # m, wide walls run along x
    depth: float = 0.762  # m

    @property
    def dock_position(self) -> tuple:
        """Dock centre on the far wide wall; it faces -y into the arena."""
        return (self.width / 2.0, self.depth)


@dataclass(frozen=True)
class Create2Params:
    wheelbase: float = 0.235  # m
    radius: float = 0.17  # m
    max_wheel_speed: float = 500.0  # mm/s
    # left to right: left, front-left, centre-left, centre-right, front-right, right
    sensor_bearings: tuple = tuple(b * _DEG for b in (65.0, 40.0, 15.0, -15.0, -40.0, -65.0))
    ir_max_signal: float = 4095.0
    ir_reference_distance: float = 0.02  # m
    ir_range: tuple = (0.02, 0.60)  # m
    sensor_half_fov: float = 20.0 * _DEG  # each sensor reports the nearest wall in its cone
    sensor_rays: int = 5
    ir_noise_std: float = 0.0
    faulty_sensors: tuple = ()
    dock_capture_distance: float = 0.05  # m beyond contact
    dock_capture_lateral: float = 0.05  # m
    dock_capture_angle: float = 10.0 * _DEG
    dock_latch_speed: float = 20.0  # mm/s
    dock_latch_time: float = 0.3  # s of uninterrupted charging while pushing forward
    dock_seat_gap: float = 0.01  # m
    beam_overlap: float = 5.0 * _DEG
    beam_cone: float = 80.0 * _DEG
    beam_range: float = 2.0  # m
    force_field_radius: float = 0.25  # m
    receiver_fov: tuple = (-10.0 * _DEG, 70.0 * _DEG)  # left receiver; mirrored on the right


FAULTY_PAIR = (1, 4)


@dataclass(frozen=True)
class Create2State:
    x: float = 0.457
    y: float = 0.381
    heading: float = 0.0
    wheel_speeds: tuple = (0.0, 0.0)
    bump: tuple = (False, False)
    wall_signals: tuple = (0.0,) * 6
    ir_dock_bits: tuple = (False,) * 9
    charging: bool = False
    distance_delta: float = 0.0  # mm since last packet
    docked: bool = False
    charge_time: float = 0.0  # s of uninterrupted charging

    @property
    def pose(self) -> tuple:
        return (self.x, self.y, self.heading)


@dataclass(frozen=True, slots=True)
class Create2Packet:
    tick_us: int
    wall_signals: tuple
    bump: tuple
    ir_dock_bits: tuple
    charging: bool
    distance: float  # mm, signed
    wheel_speeds: tuple

    @property
    def timestamp(self) -> float:
        return self.tick_us / 1e6


def ir_signal(distance: float, params: Create2Params = Create2Params()) -> float:
    """Raw wall-sensor signal for a reflector at ``distance`` metres."""
    lo, hi = params.ir_range
    d = min(max(float(distance), lo), hi)
    return params.ir_max_signal * (params.ir_reference_distance / d) ** 2


def signal_to_distance(raw: float, params: Create2Params = Create2Params()) -> float:
    """Inverse of :func:`ir_signal`, saturating at the ends of the sensing range."""
    raw = float(raw)
    if raw < 0 or math.isnan(raw):
        raise SensorDataError(f"negative IR signal {raw!r}")
    lo, hi = params.ir_range
    if raw == 0.0:
        return hi
    d = params.ir_reference_distance * math.sqrt(params.ir_max_signal / raw)
    return min(max(d, lo), hi)


def dock_bits(x: float, y: float, heading: float, arena: Arena,
              params: Create2Params = Create2Params()) -> tuple:
    """Nine dock-beam bits: (left, omni, right) receivers x (left buoy, force field, right buoy).

    Buoys are named from the viewpoint of a robot facing the dock: the left
    buoy lights the half of the arena on that robot's left (``x < x_dock``).
    """
    xd, yd = arena.dock_position
    lateral = x - xd
    forward = yd - y
    if forward <= 0:
        return (False,) * 9
    dist = math.hypot(lateral, forward)
    phi = math.atan2(lateral, forward)
    in_range = dist <= params.beam_range
    left_buoy = in_range and -params.beam_cone <= phi <= params.beam_overlap
    right_buoy = in_range and -params.beam_overlap <= phi <= params.beam_cone
    field_ = dist <= params.force_field_radius

    bearing = math.atan2(yd - y, xd - x) - heading
    bearing = (bearing + math.pi) % (2 * math.pi) - math.pi
    lo, hi = params.receiver_fov
    sees_left = lo <= bearing <= hi
    sees_right = -hi <= bearing <= -lo
    bits = []
    for sees in (sees_left, True, sees_right):
        bits.extend((sees and left_buoy, sees and field_, sees and right_buoy))
    return tuple(bits)


def in_capture_zone(x: float, y: float, heading: float, arena: Arena,
                    params: Create2Params = Create2Params()) -> bool:
    xd, yd = arena.dock_position
    contact_y = yd - params.radius
    if y < contact_y - params.dock_capture_distance:
        return False
    if abs(x - xd) > params.dock_capture_lateral:
        return False
    misalign = (heading - math.pi / 2 + math.pi) % (2 * math.pi) - math.pi
    return abs(misalign) <= params.dock_capture_angle


def seat_pose(arena: Arena, params: Create2Params = Create2Params()) -> tuple:
    xd, yd = arena.dock_position
    return (xd, yd - params.radius - params.dock_seat_gap, math.pi / 2)


def wall_signals(x: float, y: float, heading: float, arena: Arena,
                 params: Create2Params = Create2Params(),
                 rng: Optional[np.random.Generator] = None) -> tuple:
    bearings = np.asarray(params.sensor_bearings)
    if params.sensor_rays > 1 and params.sensor_half_fov > 0:
        offsets = np.linspace(-params.sensor_half_fov, params.sensor_half_fov, params.sensor_rays)
        bearings = (bearings[:, None] + offsets[None, :]).ravel()
    dists = _kernels.ray_distances(x, y, heading, bearings, params.radius, arena.width,
                                   arena.depth)
    dists = np.asarray(dists).reshape(len(params.sensor_bearings), -1).min(axis=1)
    out = []
    for k, d in enumerate(dists):
        if k in params.faulty_sensors:
            out.append(0.0)
            continue
        s = ir_signal(d, params)
        if params.ir_noise_std > 0 and rng is not None:
            s = max(0.0, s + rng.normal(0.0, params.ir_noise_std))
        out.append(s)
    return tuple(out)


def create2_step(state: Create2State, wheel_cmd, dt: float, arena: Arena = Arena(),
                 params: Create2Params = Create2Params(),
                 rng: Optional[np.random.Generator] = None) -> Create2State:
    if state.docked:
        vl = vr = 0.0
    else:
        cap = params.max_wheel_speed
        vl = min(max(float(wheel_cmd[0]), -cap), cap)
        vr = min(max(float(wheel_cmd[1]), -cap), cap)
    x, y, h, dist, bl, br = _kernels.create_integrate(
        state.x, state.y, state.heading, vl, vr, dt, params.wheelbase,
        params.radius, arena.width, arena.depth)
    docked = state.docked
    charging = docked or in_capture_zone(x, y, h, arena, params)
    charge_time = state.charge_time + dt if charging else 0.0
    speed = 0.5 * (vl + vr)
    if charging and not docked:
        if abs(speed) < params.dock_latch_speed or (
                speed > 0 and charge_time >= params.dock_latch_time - 1e-12):
            docked = True
    if docked and not state.docked:
        x, y, h = seat_pose(arena, params)
    return Create2State(
        x=x, y=y, heading=h,
        wheel_speeds=(vl, vr),
        bump=(bool(bl), bool(br)),
        wall_signals=wall_signals(x, y, h, arena, params, rng),
        ir_dock_bits=dock_bits(x, y, h, arena, params),
        charging=bool(charging),
        distance_delta=state.distance_delta + dist,
        docked=docked,
        charge_time=charge_time,
    )


class Create2Device:
    def __init__(self, params: Create2Params = Create2Params(), arena: Arena = Arena(),
                 state: Create2State | None = None, rng=None):
        self.params = params
        self.arena = arena
        self.rng = rng
        self.state = state or self.settle(Create2State(x=arena.width / 2, y=arena.depth / 2))
        self._bump_since_emit = (False, False)

    def settle(self, state: Create2State) -> Create2State:
        """Recompute sensor fields for a pose without moving."""
        return replace(
            state,
            wall_signals=wall_signals(state.x, state.y, state.heading, self.arena, self.params),
            ir_dock_bits=dock_bits(state.x, state.y, state.heading, self.arena, self.params),
            charging=state.docked or in_capture_zone(state.x, state.y, state.heading,
                                                     self.arena, self.params),
        )

    def step(self, command, dt: float) -> None:
        self.state = create2_step(self.state, command, dt, self.arena, self.params, self.rng)
        b = self._bump_since_emit
        self._bump_since_emit = (b[0] or self.state.bump[0], b[1] or self.state.bump[1])

    def place(self, x: float, y: float, heading: float, docked: bool = False) -> None:
        self.state = self.settle(Create2State(x=x, y=y, heading=heading, docked=docked))
        self._bump_since_emit = (False, False)

    def undock(self) -> None:
        """Leave Passive mode so wheel commands are obeyed again."""
        self.state = replace(self.state, docked=False, charge_time=0.0)

    def clear_events(self) -> None:
        """Drop bump and travel events accumulated since the last packet."""
        self.state = replace(self.state, bump=(False, False), distance_delta=0.0)
        self._bump_since_emit = (False, False)

    def emit(self, tick_us: int) -> Create2Packet:
        s = self.state
        packet = Create2Packet(tick_us, s.wall_signals, self._bump_since_emit,
                               s.ir_dock_bits, s.charging, s.distance_delta,
                               s.wheel_speeds)
        self.state = replace(s, distance_delta=0.0)
        self._bump_since_emit = (False, False)
        return packet

    def snapshot(self) -> dict:
        p = self.params
        return {
            "wheelbase": p.wheelbase, "radius": p.radius,
            "ir_max_signal": p.ir_max_signal,
            "ir_reference_distance": p.ir_reference_distance,
            "ir_range": list(p.ir_range), "ir_noise_std": p.ir_noise_std,
            "sensor_half_fov_deg": p.sensor_half_fov / _DEG, "sensor_rays": p.sensor_rays,
            "faulty_sensors": list(p.faulty_sensors),
            "arena": [self.arena.width, self.arena.depth],
            "dock_capture_distance": p.dock_capture_distance,
            "dock_capture_angle_deg": p.dock_capture_angle / _DEG,
            "dock_latch_speed": p.dock_latch_speed,
            "dock_latch_time": p.dock_latch_time,
        }
