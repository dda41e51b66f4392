"""Two-rate sense-act runtime.

A device loop ticks at the robot's read-write period, applying the most
recent command and appending one sensor packet per tick to a
:class:`PacketBuffer`. An agent loop runs at the (slower) action cycle,
reads the newest packets to build an observation and reward, and drops its
next command into a single-slot :class:`Mailbox`.

Two clock modes are supported. In ``virtual`` mode a single-threaded
scheduler interleaves device ticks and agent steps in a fixed order, so a
run is a pure function of its seeds. In ``wall`` mode the device loop runs
on its own thread against :func:`time.perf_counter`, mirroring the real
hardware setup.
"""
from __future__ import annotations

import logging
import math
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, InvalidBoundsError, NoDataError

log = logging.getLogger(__name__)

US_PER_S = 1_000_000
BUFFER_CAPACITY = 64


def normalize(value, lo, hi):
    """Affine map of ``[lo, hi]`` onto ``[-1, 1]``; out-of-range input is clamped.

    Works elementwise on arrays. Written as ``(2v - (hi+lo)) / (hi-lo)`` so
    that symmetric ranges reduce to ``v / hi``, which round-trips exactly
    through :func:`denormalize` whenever the quotient is representable.
    """
    lo_a = np.asarray(lo, dtype=np.float64)
    hi_a = np.asarray(hi, dtype=np.float64)
    if np.any(lo_a >= hi_a):
        raise InvalidBoundsError(f"invalid bounds lo={lo!r} hi={hi!r}")
    v = np.clip(np.asarray(value, dtype=np.float64), lo_a, hi_a)
    # the clip only absorbs rounding at the endpoints
    out = np.clip((2.0 * v - (hi_a + lo_a)) / (hi_a - lo_a), -1.0, 1.0)
    return float(out) if out.ndim == 0 else out


def denormalize(value, lo, hi):
    """Inverse of :func:`normalize`. Values outside ``[-1, 1]`` extrapolate."""
    lo_a = np.asarray(lo, dtype=np.float64)
    hi_a = np.asarray(hi, dtype=np.float64)
    if np.any(lo_a >= hi_a):
        raise InvalidBoundsError(f"invalid bounds lo={lo!r} hi={hi!r}")
    x = np.asarray(value, dtype=np.float64)
    out = (x * (hi_a - lo_a) + (hi_a + lo_a)) / 2.0
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CycleConfig:
    action_cycle_s: float
    readwrite_cycle_s: float
    episode_length_s: float

    def __post_init__(self):
        if not (self.readwrite_cycle_s > 0 and self.action_cycle_s >= self.readwrite_cycle_s):
            raise ConfigurationError(
                f"need action_cycle_s >= readwrite_cycle_s > 0, got {self}")
        if self.episode_length_s < self.action_cycle_s:
            raise ConfigurationError("episode shorter than one action cycle")

    @property
    def steps(self) -> int:
        """Agent steps per episode; partial trailing cycles are dropped."""
        return int(math.floor(self.episode_length_s / self.action_cycle_s + 1e-9))

    @property
    def action_cycle_us(self) -> int:
        return int(round(self.action_cycle_s * US_PER_S))

    @property
    def readwrite_cycle_us(self) -> int:
        return int(round(self.readwrite_cycle_s * US_PER_S))

    @property
    def packets_per_cycle(self) -> int:
        ratio = self.action_cycle_us / self.readwrite_cycle_us
        n = int(round(ratio))
        if abs(ratio - n) > 1e-9:
            raise ConfigurationError(
                f"action cycle {self.action_cycle_s}s is not a multiple of "
                f"read-write cycle {self.readwrite_cycle_s}s")
        return n


def scale_reward(raw: float, cycle: CycleConfig) -> float:
    return raw * cycle.action_cycle_s


class Clock:
    """Virtual (tick-driven, integer microseconds) or wall-clock time source."""

    def __init__(self, mode: str = "virtual"):
        if mode not in ("virtual", "wall"):
            raise ConfigurationError(f"unknown clock mode {mode!r}")
        self.mode = mode
        self._virtual_us = 0
        self._origin = time.perf_counter()

    @property
    def is_virtual(self) -> bool:
        return self.mode == "virtual"

    def now_us(self) -> int:
        if self.is_virtual:
            return self._virtual_us
        return int((time.perf_counter() - self._origin) * US_PER_S)

    @property
    def now(self) -> float:
        return self.now_us() / US_PER_S

    def advance_us(self, us: int) -> None:
        if not self.is_virtual:
            raise RuntimeError("only a virtual clock can be advanced explicitly")
        if us < 0:
            raise ValueError("clock cannot run backwards")
        self._virtual_us += int(us)


class PacketBuffer:
    """Fixed-capacity ring of packets with a single writer.

    Writers store into a slot and then bump the counter; readers snapshot the
    counter first and read backwards from it, so a read never waits on the
    writer. Packets are immutable, so sharing them between threads is safe.
    """

    def __init__(self, capacity: int = BUFFER_CAPACITY):
        if capacity < 40:
            raise ConfigurationError("packet buffer capacity must be >= 40")
        self.capacity = capacity
        self._slots: list = [None] * capacity
        self._count = 0
        self._base = 0

    def append(self, packet) -> None:
        self._slots[self._count % self.capacity] = packet
        self._count += 1

    def clear(self) -> None:
        self._base = self._count

    @property
    def total_written(self) -> int:
        return self._count

    def __len__(self) -> int:
        return min(self._count - self._base, self.capacity)

    def latest(self, k: int) -> list:
        count = self._count
        available = min(count - self._base, self.capacity)
        if available <= 0:
            raise NoDataError("packet buffer is empty")
        k = min(k, available)
        slots = self._slots
        cap = self.capacity
        return [slots[(count - 1 - i) % cap] for i in range(k)]


def latest_packets(buffer: PacketBuffer, k: int) -> list:
    """Up to ``k`` newest packets, newest first (index 0 is packet 1)."""
    return buffer.latest(k)


class Mailbox:
    """Single-slot command channel; the last write wins."""

    def __init__(self, initial=None):
        self._value = initial

    def put(self, value) -> None:
        self._value = value

    def get(self):
        return self._value


@dataclass(frozen=True)
class TimeStep:
    observation: np.ndarray
    reward: float
    done: bool
    step_index: int
    raw_reward: float = 0.0
    cause: Optional[str] = None
    packets: int = 0

    @property
    def terminal(self) -> bool:
        """True when the episode ended on its own rather than on the clock."""
        return self.cause not in (None, "time", "budget")


@dataclass(frozen=True)
class StepRecord:
    observation: np.ndarray
    action: np.ndarray
    reward: float
    done: bool


@dataclass
class EpisodeRecord:
    episode_return: float
    length: int
    cause: str
    end_step: int
    success: bool = False
    start_time_us: int = 0
    end_time_us: int = 0
    steps: list = field(default_factory=list)


class Environment:
    """Binds a task, its simulated device, a clock and the packet buffer."""

    def __init__(self, task, seed: int = 0, clock: Optional[Clock] = None,
                 device_params: Optional[dict] = None):
        self.task = task
        self.spec = task.spec
        self.cycle: CycleConfig = task.spec.cycle
        self.clock = clock or Clock("virtual")
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.device = task.make_device(device_params, self.rng)
        self.buffer = PacketBuffer()
        self.mailbox = Mailbox()
        self.n_packets = self.cycle.packets_per_cycle
        self.prev_action = np.zeros(self.spec.action_dim)
        self.episode_step = 0
        self.total_steps = 0
        self.previous_outcome: Optional[bool] = None
        self.overruns = 0
        self._lock = threading.Lock()
        self._thread: Optional[threading.Thread] = None
        self._running = False
        self._paused = True
        self._next_boundary = 0.0
        self._last_count = 0

    # device side -----------------------------------------------------
    def tick(self, command) -> Any:
        """Advance the device one read-write cycle and emit a packet."""
        rw_us = self.cycle.readwrite_cycle_us
        self.device.step(command, rw_us / US_PER_S)
        if self.clock.is_virtual:
            self.clock.advance_us(rw_us)
        packet = self.device.emit(self.clock.now_us())
        self.buffer.append(packet)
        return packet

    def run_device(self, command, duration_s: float) -> None:
        """Hold ``command`` for ``duration_s`` (used by reset procedures)."""
        n = int(round(duration_s / self.cycle.readwrite_cycle_s))
        for _ in range(n):
            self.tick(command)

    def _device_loop(self):
        period = self.cycle.readwrite_cycle_s
        next_t = time.perf_counter()
        while self._running:
            next_t += period
            delay = next_t - time.perf_counter()
            if delay > 0:
                time.sleep(delay)
            with self._lock:
                if self._paused:
                    continue
                command = self.mailbox.get()
                self.device.step(command, period)
                self.buffer.append(self.device.emit(self.clock.now_us()))

    def start(self) -> None:
        if self.clock.is_virtual or self._thread is not None:
            return
        self._running = True
        self._thread = threading.Thread(target=self._device_loop, daemon=True)
        self._thread.start()

    def close(self) -> None:
        self._running = False
        if self._thread is not None:
            self._thread.join(timeout=1.0)
            self._thread = None

    # agent side ------------------------------------------------------
    def reset(self) -> np.ndarray:
        wall = not self.clock.is_virtual
        if wall:
            self.start()
            with self._lock:
                self._paused = True
        self.task.reset(self, self.rng, self.previous_outcome)
        self.buffer.clear()
        self.buffer.append(self.device.emit(self.clock.now_us()))
        self.prev_action = np.zeros(self.spec.action_dim)
        self.mailbox.put(self.task.command(self.prev_action))
        self.episode_step = 0
        self.episode_start_us = self.clock.now_us()
        obs = self.task.observe(self.buffer, self.prev_action, 0.0)
        self._last_count = self.buffer.total_written
        if wall:
            self._next_boundary = time.perf_counter() + self.cycle.action_cycle_s
            with self._lock:
                self._paused = False
        return obs

    def step(self, action) -> TimeStep:
        action = np.asarray(action, dtype=np.float64).reshape(self.spec.action_dim)
        if not np.all(np.isfinite(action)):
            raise ConfigurationError("non-finite action")
        command = self.task.command(action)
        if self.clock.is_virtual:
            for _ in range(self.n_packets):
                self.tick(command)
        else:
            now = time.perf_counter()
            if now > self._next_boundary:
                # the agent missed its cycle: the device kept the old command
                self.overruns += 1
                log.warning("agent overran its action cycle by %.1f ms",
                            (now - self._next_boundary) * 1e3)
                while self._next_boundary < now:
                    self._next_boundary += self.cycle.action_cycle_s
            self.mailbox.put(command)
            delay = self._next_boundary - time.perf_counter()
            if delay > 0:
                time.sleep(delay)
            self._next_boundary += self.cycle.action_cycle_s

        self.episode_step += 1
        self.total_steps += 1
        self.prev_action = action
        t = self.episode_step * self.cycle.action_cycle_s
        count = self.buffer.total_written
        packets = count - self._last_count
        self._last_count = count
        obs = self.task.observe(self.buffer, action, t)
        raw = self.task.raw_reward(self.buffer, t)
        cause = self.task.termination(self.buffer)
        if cause is None and self.episode_step >= self.cycle.steps:
            cause = "time"
        done = cause is not None
        if done:
            self.previous_outcome = self.task.outcome()
        return TimeStep(obs, scale_reward(raw, self.cycle), done,
                        self.episode_step - 1, raw, cause, packets)


def run_episode(env: Environment, agent, max_steps: Optional[int] = None,
                keep_steps: bool = True) -> EpisodeRecord:
    """Reset ``env`` and roll ``agent`` until the episode ends.

    ``max_steps`` truncates the episode (cause ``"budget"``) so that runs can
    stop on an exact step budget.
    """
    if getattr(agent, "obs_dim", env.spec.obs_dim) != env.spec.obs_dim or \
            getattr(agent, "action_dim", env.spec.action_dim) != env.spec.action_dim:
        raise ConfigurationError(
            f"agent dims ({agent.obs_dim}, {agent.action_dim}) do not match task "
            f"{env.spec.task_id} ({env.spec.obs_dim}, {env.spec.action_dim})")
    obs = env.reset()
    start_us = env.episode_start_us
    agent.reset(obs)
    clip = getattr(agent, "clip_actions", True)
    total = 0.0
    steps = []
    n = 0
    cause = "time"
    while True:
        action = np.asarray(agent.act(obs), dtype=np.float64)
        executed = np.clip(action, -1.0, 1.0) if clip else action
        ts = env.step(executed)
        n += 1
        if not ts.done and max_steps is not None and n >= max_steps:
            ts = TimeStep(ts.observation, ts.reward, True, ts.step_index,
                          ts.raw_reward, "budget", ts.packets)
        agent.observe(ts)
        total += ts.reward
        if keep_steps:
            steps.append(StepRecord(obs, executed, ts.reward, ts.done))
        obs = ts.observation
        if ts.done:
            cause = ts.cause
            break
    success = bool(env.previous_outcome) if cause != "budget" else False
    return EpisodeRecord(total, n, cause, env.total_steps, success, start_us,
                         env.clock.now_us(), steps)
