"""Reaching and tracking tasks on the UR5 arm and the Dynamixel actuator."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..devices import (DxlDevice, DxlParams, Ur5Device, Ur5Params, override_params,
                       planar_fingertip, planar_ik, ur5_fingertip)
from ..runtime import CycleConfig
from .base import Task, TaskSpec

UR_CYCLE = dict(action_cycle_s=0.040, readwrite_cycle_s=0.008)
DXL_CYCLE = dict(action_cycle_s=0.040, readwrite_cycle_s=0.010)

# Shoulder/elbow plane: box centre as (reach, height) in metres.
UR2_BOX_CENTER = (0.40, 0.0)
UR2_BOX_SIZE = (0.7, 0.5)
UR6_START_POSE = (0.0, -1.57, 1.57, -1.57, -1.57, 0.0)
UR6_BOX_SIZE = (0.7, 0.5, 0.4)
DXL_TARGET_HALF_RANGE = 1.047  # rad, about 60 degrees
TRACKER_START_RANGE = 0.8  # rad
TRACKER_END_POSITION = 0.0
TRACKER_LAG_S = 0.050


def ur_reacher_reward(d: float) -> float:
    if d < 0:
        raise ValueError(f"distance must be non-negative, got {d}")
    return -d + math.exp(-100.0 * d * d)


def dxl_reward(d: float) -> float:
    if d < 0:
        raise ValueError(f"distance must be non-negative, got {d}")
    return -d


@dataclass(frozen=True)
class ReacherGeometry:
    target: np.ndarray
    fingertip: np.ndarray

    @property
    def difference(self) -> np.ndarray:
        return np.atleast_1d(self.target - self.fingertip)

    @property
    def d(self) -> float:
        return float(np.linalg.norm(self.difference))


@dataclass(frozen=True)
class TrackerTarget:
    start: float
    direction: int
    speed: float
    end_position: float
    duration: float

    def position(self, t: float) -> float:
        # Written backwards from the end so position(duration) is exact.
        return self.end_position - self.direction * self.speed * (self.duration - t)


def tracker_schedule(rng: np.random.Generator, duration: float = 4.0,
                     start_range: float = TRACKER_START_RANGE,
                     end_position: float = TRACKER_END_POSITION) -> TrackerTarget:
    direction = 1 if rng.random() < 0.5 else -1
    offset = rng.uniform(0.0, start_range)
    start = end_position - direction * offset
    return TrackerTarget(start, direction, abs(end_position - start) / duration,
                         end_position, duration)


def _uniform_box(rng, center, size) -> np.ndarray:
    c = np.asarray(center, dtype=np.float64)
    half = np.asarray(size, dtype=np.float64) / 2.0
    return rng.uniform(c - half, c + half)


class UrReacher2(Task):
    """Shoulder and elbow of the UR5 reach targets in their plane of motion."""

    def __init__(self, box_center=UR2_BOX_CENTER, box_size=UR2_BOX_SIZE,
                 max_speed: float = 0.3, episode_length_s: float = 4.0):
        self.box_center = tuple(box_center)
        self.box_size = tuple(box_size)
        self.spec = TaskSpec(
            task_id="ur-reacher-2",
            action_dim=2,
            action_bounds=((-max_speed, max_speed),) * 2,
            obs_layout=(("joint_angles", 2), ("joint_velocities", 2),
                        ("prev_action", 2), ("target_diff", 2)),
            cycle=CycleConfig(episode_length_s=episode_length_s, **UR_CYCLE),
            reward_id="ur-reacher",
            reset_id="center-pose",
        )
        shoulder, elbow = planar_ik(*self.box_center)
        self.start_pose = np.array([0.0, shoulder, elbow, 0.0, 0.0, 0.0])
        self.target = np.array(self.box_center, dtype=np.float64)
        self.device: Optional[Ur5Device] = None

    def make_device(self, params=None, rng=None):
        self.device = Ur5Device(override_params(Ur5Params(), params))
        self.device.set_pose(self.start_pose)
        return self.device

    def generate_target(self, rng) -> np.ndarray:
        return _uniform_box(rng, self.box_center, self.box_size)

    def reset(self, env, rng, previous_outcome) -> None:
        env.device.set_pose(self.start_pose)
        self.target = self.generate_target(rng)

    def command(self, action) -> np.ndarray:
        speeds = np.zeros(6)
        speeds[1:3] = super().command(action)
        return speeds

    def geometry(self, packet) -> ReacherGeometry:
        q = packet.joint_angles
        return ReacherGeometry(self.target, planar_fingertip(q[1], q[2]))

    def observe(self, buffer, prev_action, t) -> np.ndarray:
        p = buffer.latest(1)[0]
        return np.concatenate([p.joint_angles[1:3], p.joint_velocities[1:3],
                               np.asarray(prev_action, dtype=np.float64),
                               self.geometry(p).difference])

    def raw_reward(self, buffer, t) -> float:
        return ur_reacher_reward(self.geometry(buffer.latest(1)[0]).d)


class UrReacher6(Task):
    """All six UR5 joints reach targets in a 3-D box around the start fingertip."""

    def __init__(self, start_pose=UR6_START_POSE, box_size=UR6_BOX_SIZE,
                 max_speed: float = 0.3, episode_length_s: float = 4.0):
        self.start_pose = np.asarray(start_pose, dtype=np.float64)
        self.box_center = ur5_fingertip(self.start_pose)
        self.box_size = tuple(box_size)
        self.spec = TaskSpec(
            task_id="ur-reacher-6",
            action_dim=6,
            action_bounds=((-max_speed, max_speed),) * 6,
            obs_layout=(("joint_angles", 6), ("joint_velocities", 6),
                        ("prev_action", 6), ("target_diff", 3)),
            cycle=CycleConfig(episode_length_s=episode_length_s, **UR_CYCLE),
            reward_id="ur-reacher",
            reset_id="center-pose",
        )
        self.target = self.box_center.copy()
        self.device: Optional[Ur5Device] = None

    def make_device(self, params=None, rng=None):
        self.device = Ur5Device(override_params(Ur5Params(), params))
        self.device.set_pose(self.start_pose)
        return self.device

    def generate_target(self, rng) -> np.ndarray:
        return _uniform_box(rng, self.box_center, self.box_size)

    def reset(self, env, rng, previous_outcome) -> None:
        env.device.set_pose(self.start_pose)
        self.target = self.generate_target(rng)

    def geometry(self, packet) -> ReacherGeometry:
        return ReacherGeometry(self.target, ur5_fingertip(packet.joint_angles))

    def observe(self, buffer, prev_action, t) -> np.ndarray:
        p = buffer.latest(1)[0]
        return np.concatenate([p.joint_angles, p.joint_velocities,
                               np.asarray(prev_action, dtype=np.float64),
                               self.geometry(p).difference])

    def raw_reward(self, buffer, t) -> float:
        return ur_reacher_reward(self.geometry(buffer.latest(1)[0]).d)


class DxlReacher(Task):
    def __init__(self, center: float = 0.0, half_range: float = DXL_TARGET_HALF_RANGE,
                 max_current: float = 100.0, episode_length_s: float = 2.0):
        self.center = float(center)
        self.half_range = float(half_range)
        self.spec = TaskSpec(
            task_id="dxl-reacher",
            action_dim=1,
            action_bounds=((-max_current, max_current),),
            obs_layout=(("angle", 1), ("velocity", 1), ("target", 1), ("prev_action", 1)),
            cycle=CycleConfig(episode_length_s=episode_length_s, **DXL_CYCLE),
            reward_id="dxl",
            reset_id="center-pose",
        )
        self.target = self.center
        self.device: Optional[DxlDevice] = None

    def make_device(self, params=None, rng=None):
        self.device = DxlDevice(override_params(DxlParams(), params))
        self.device.set_angle(self.center)
        return self.device

    def generate_target(self, rng) -> float:
        return float(rng.uniform(self.center - self.half_range, self.center + self.half_range))

    def reset(self, env, rng, previous_outcome) -> None:
        env.device.set_angle(self.center)
        self.target = self.generate_target(rng)

    def observe(self, buffer, prev_action, t) -> np.ndarray:
        p = buffer.latest(1)[0]
        return np.array([p.angle, p.velocity, self.target,
                         float(np.asarray(prev_action).reshape(-1)[0])])

    def raw_reward(self, buffer, t) -> float:
        return dxl_reward(abs(self.target - buffer.latest(1)[0].angle))


class DxlTracker(Task):
    def __init__(self, start_range: float = TRACKER_START_RANGE,
                 end_position: float = TRACKER_END_POSITION,
                 max_current: float = 50.0, episode_length_s: float = 4.0):
        self.start_range = float(start_range)
        self.end_position = float(end_position)
        self.spec = TaskSpec(
            task_id="dxl-tracker",
            action_dim=1,
            action_bounds=((-max_current, max_current),),
            obs_layout=(("angle", 1), ("velocity", 1), ("target", 1),
                        ("target_lagged", 1), ("prev_action", 1)),
            cycle=CycleConfig(episode_length_s=episode_length_s, **DXL_CYCLE),
            reward_id="dxl",
            reset_id="center-pose",
        )
        self.schedule = TrackerTarget(end_position, 1, 0.0, end_position, episode_length_s)
        self.device: Optional[DxlDevice] = None

    @property
    def center(self) -> float:
        """Middle of the range the target starts from."""
        return self.end_position

    def make_device(self, params=None, rng=None):
        self.device = DxlDevice(override_params(DxlParams(), params))
        self.device.set_angle(self.center)
        return self.device

    def generate_target(self, rng) -> TrackerTarget:
        return tracker_schedule(rng, self.spec.cycle.episode_length_s,
                                self.start_range, self.end_position)

    def reset(self, env, rng, previous_outcome) -> None:
        env.device.set_angle(self.center)
        self.schedule = self.generate_target(rng)

    def targets(self, t: float) -> tuple:
        now = self.schedule.position(t)
        if t < TRACKER_LAG_S - 1e-12:
            return now, now
        return now, self.schedule.position(t - TRACKER_LAG_S)

    def observe(self, buffer, prev_action, t) -> np.ndarray:
        p = buffer.latest(1)[0]
        now, lagged = self.targets(t)
        return np.array([p.angle, p.velocity, now, lagged,
                         float(np.asarray(prev_action).reshape(-1)[0])])

    def raw_reward(self, buffer, t) -> float:
        return dxl_reward(abs(self.schedule.position(t) - buffer.latest(1)[0].angle))
