"""Create 2 tasks: driving forward without bumping, and docking."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .. import _kernels
from ..devices import (FAULTY_PAIR, Arena, Create2Device, Create2Params, SeekDock,
                       override_params, signal_to_distance)
from ..errors import ConfigurationError
from ..runtime import CycleConfig, normalize
from .base import Task, TaskSpec

CREATE_READWRITE_S = 0.015
MOVER_REWARD_PACKETS = 10
MOVER_REVERSE_S = 0.5
MOVER_REVERSE_SPEED = -150.0  # mm/s
DOCKER_IR_WINDOW = 20
DOCK_WEIGHTS = (1.0, 0.5, 0.05, 0.65, 0.15, 0.65, 0.05, 0.5, 1.0)
SEEK_DOCK_TIMEOUT_S = 20.0
DOCKER_REVERSE_SPEED = -100.0  # mm/s
DOCKER_FAIL_REVERSE_S = 3.25
DOCKER_SUCCESS_REVERSE_S = 0.75
DOCKER_SPIN_S = 2.5
DOCKER_SPIN_RANGE = (-250.0, -50.0)  # mm/s


def wall_proximity(signals, params: Create2Params = Create2Params()) -> np.ndarray:
    """Raw wall signals to [-1, 1] with +1 at the nearest and -1 at the farthest range."""
    lo, hi = params.ir_range
    d = np.array([signal_to_distance(s, params) for s in signals])
    return normalize(-d, -hi, -lo)


def _binary(x) -> np.ndarray:
    return normalize(np.asarray(x, dtype=np.float64), 0.0, 1.0)


def mover_reward(packets: Sequence) -> float:
    """Signed travel (mm) over up to ten newest packets."""
    return float(sum(p.distance for p in packets[:MOVER_REWARD_PACKETS]))


@dataclass(frozen=True)
class DockerRewardTerms:
    tau: float = 0.045
    readwrite_cycle_s: float = CREATE_READWRITE_S
    w: tuple = DOCK_WEIGHTS
    a: float = 150.0
    b: float = 10.0
    c: float = 5.0
    d: float = 4.0
    window: int = DOCKER_IR_WINDOW

    @property
    def n(self) -> int:
        ratio = self.tau / self.readwrite_cycle_s
        n = int(round(ratio))
        if n < 1 or abs(ratio - n) > 1e-9:
            raise ConfigurationError(
                f"tau={self.tau} is not a whole number of {self.readwrite_cycle_s}s packets")
        return n


class DockerComponents(NamedTuple):
    X: float
    Y: float
    Z: float
    V: float


def docker_components(packets: Sequence, terms: DockerRewardTerms = DockerRewardTerms()
                      ) -> DockerComponents:
    """X, Y, Z and V from newest-first packets; missing packets count as zeros."""
    n = terms.n
    rows = max(n, terms.window)
    charging = np.zeros(rows)
    distance = np.zeros(rows)
    bumps = np.zeros((rows, 2))
    ir = np.zeros((terms.window, 9))
    for i, p in enumerate(packets[:rows]):
        charging[i] = float(p.charging)
        distance[i] = p.distance
        bumps[i] = p.bump
        if i < terms.window:
            ir[i] = p.ir_dock_bits
    return DockerComponents(*_kernels.docker_terms(charging, bumps, distance, ir, n,
                                                   np.asarray(terms.w, dtype=np.float64)))


def docker_raw_reward(packets: Sequence, terms: DockerRewardTerms = DockerRewardTerms()) -> float:
    X, Y, Z, V = docker_components(packets, terms)
    return terms.a * X + terms.b * Y + terms.c * Z + terms.d * V


def docker_reward(buffer, terms: DockerRewardTerms = DockerRewardTerms(),
                  tau: Optional[float] = None) -> float:
    """Cycle-scaled docking reward read from a packet buffer."""
    tau = terms.tau if tau is None else tau
    packets = buffer.latest(max(terms.n, terms.window)) if len(buffer) else []
    return tau * docker_raw_reward(packets, terms)


class _CreateTask(Task):
    def __init__(self, faulty: bool = False):
        self.faulty = faulty
        self.device: Optional[Create2Device] = None
        self._first_reset = True

    def make_device(self, params=None, rng=None):
        params = dict(params or {})
        arena = Arena(*params.pop("arena")) if "arena" in params else Arena()
        base = Create2Params(faulty_sensors=FAULTY_PAIR if self.faulty else ())
        self.device = Create2Device(override_params(base, params), arena, rng=rng)
        self._first_reset = True
        return self.device

    def _place_randomly(self, rng) -> None:
        a = self.device.arena
        self.device.place(a.width / 2, a.depth / 2, float(rng.uniform(-np.pi, np.pi)))

    def _reverse(self, env, speed: float, duration_s: float) -> None:
        """Back up, stopping short of any contact."""
        n = int(round(duration_s / self.spec.cycle.readwrite_cycle_s))
        for _ in range(n):
            before = self.device.state
            env.tick((speed, speed))
            if any(self.device.state.bump):
                self.device.state = before
                break
        env.tick((0.0, 0.0))
        self.device.clear_events()


class CreateMover(_CreateTask):
    def __init__(self, faulty: bool = False, max_speed: float = 150.0,
                 episode_length_s: float = 90.0):
        super().__init__(faulty)
        self.spec = TaskSpec(
            task_id="create-mover",
            action_dim=2,
            action_bounds=((-max_speed, max_speed),) * 2,
            obs_layout=(("wall", 6), ("prev_action", 2)),
            cycle=CycleConfig(action_cycle_s=0.150, readwrite_cycle_s=CREATE_READWRITE_S,
                              episode_length_s=episode_length_s),
            reward_id="mover",
            reset_id="reverse",
        )

    def reset(self, env, rng, previous_outcome) -> None:
        if self._first_reset:
            self._place_randomly(rng)
            self._first_reset = False
        self._reverse(env, MOVER_REVERSE_SPEED, MOVER_REVERSE_S)

    def observe(self, buffer, prev_action, t) -> np.ndarray:
        p = buffer.latest(1)[0]
        return np.concatenate([wall_proximity(p.wall_signals, self.device.params),
                               np.asarray(prev_action, dtype=np.float64)])

    def raw_reward(self, buffer, t) -> float:
        return mover_reward(buffer.latest(MOVER_REWARD_PACKETS))

    def termination(self, buffer) -> Optional[str]:
        for p in buffer.latest(self.spec.cycle.packets_per_cycle):
            if any(p.bump):
                return "bump"
        return None


class CreateDocker(_CreateTask):
    def __init__(self, faulty: bool = False, max_speed: float = 150.0,
                 episode_length_s: float = 30.0, terms: Optional[DockerRewardTerms] = None):
        super().__init__(faulty)
        self.spec = TaskSpec(
            task_id="create-docker",
            action_dim=2,
            action_bounds=((-max_speed, max_speed),) * 2,
            obs_layout=(("charging", 1), ("wall", 6), ("bump", 2), ("prev_action", 2),
                        ("ir_dock", 9)),
            cycle=CycleConfig(action_cycle_s=0.045, readwrite_cycle_s=CREATE_READWRITE_S,
                              episode_length_s=episode_length_s),
            reward_id="docker",
            reset_id="seek-dock",
        )
        self.terms = terms or DockerRewardTerms(tau=self.spec.cycle.action_cycle_s)
        self.terms.n  # validates the cycle ratio
        self.seek_dock_succeeded: Optional[bool] = None

    def reset(self, env, rng, previous_outcome) -> None:
        dev = self.device
        if self._first_reset:
            self._place_randomly(rng)
            self._first_reset = False
        if previous_outcome:
            dev.undock()
            self._reverse(env, DOCKER_REVERSE_SPEED, DOCKER_SUCCESS_REVERSE_S)
            n = int(round(DOCKER_SPIN_S / self.spec.cycle.readwrite_cycle_s))
            cmd = tuple(rng.uniform(*DOCKER_SPIN_RANGE, size=2))
            for _ in range(n):
                env.tick(cmd)
            env.tick((0.0, 0.0))
            dev.clear_events()
            return
        self.seek_dock_succeeded = self.seek_dock(env)
        dev.undock()
        self._reverse(env, DOCKER_REVERSE_SPEED, DOCKER_FAIL_REVERSE_S)

    def seek_dock(self, env, timeout_s: float = SEEK_DOCK_TIMEOUT_S) -> bool:
        dev = self.device
        rw = self.spec.cycle.readwrite_cycle_s
        controller = SeekDock(dev.params, rw)
        packet = dev.emit(env.clock.now_us())
        for _ in range(int(round(timeout_s / rw))):
            if dev.state.docked:
                return True
            packet = env.tick(controller.command(packet))
        return dev.state.docked

    def observe(self, buffer, prev_action, t) -> np.ndarray:
        newest = buffer.latest(DOCKER_IR_WINDOW)
        p = newest[0]
        bump = np.zeros(2)
        for q in newest[:self.terms.n]:
            bump = np.maximum(bump, q.bump)
        ir = np.zeros(9)
        for q in newest:
            ir += q.ir_dock_bits
        ir /= DOCKER_IR_WINDOW
        return np.concatenate([
            [_binary(float(p.charging))],
            wall_proximity(p.wall_signals, self.device.params),
            _binary(bump),
            np.asarray(prev_action, dtype=np.float64),
            _binary(ir),
        ])

    def raw_reward(self, buffer, t) -> float:
        return docker_raw_reward(buffer.latest(max(self.terms.n, self.terms.window)),
                                 self.terms)

    def outcome(self) -> bool:
        return bool(self.device.state.docked)
