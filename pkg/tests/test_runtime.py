import math
import threading
import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rtrlbench.agents import ZeroAgent
from rtrlbench.errors import ConfigurationError, InvalidBoundsError, NoDataError
from rtrlbench.runtime import (Clock, CycleConfig, Environment, Mailbox, PacketBuffer,
                               denormalize, latest_packets, normalize, run_episode,
                               scale_reward)
from rtrlbench.tasks import make_task


@pytest.mark.parametrize("value, expected", [(150, 1.0), (0, 0.0), (75, 0.5)])
def test_normalize_examples(value, expected):
    assert normalize(value, -150, 150) == expected


def test_normalize_clamps_and_rejects_bad_bounds():
    assert normalize(1e6, -150, 150) == 1.0
    assert normalize(-1e6, -150, 150) == -1.0
    with pytest.raises(InvalidBoundsError):
        normalize(0, 1, 1)
    with pytest.raises(InvalidBoundsError):
        denormalize(0, 2, 1)


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(finite, finite, st.floats(0.0, 1.0))
def test_normalize_range_and_round_trip(a, b, frac):
    lo, hi = min(a, b), max(a, b)
    if hi - lo < 1e-3:
        return
    v = lo + frac * (hi - lo)
    x = normalize(v, lo, hi)
    assert -1.0 <= x <= 1.0
    assert denormalize(x, lo, hi) == pytest.approx(v, abs=1e-9 * max(1.0, abs(lo), abs(hi)))


def test_normalize_elementwise():
    out = normalize(np.array([0.0, 75.0, 500.0]), np.array([-150.0] * 3), np.array([150.0] * 3))
    np.testing.assert_array_equal(out, [0.0, 0.5, 1.0])


def test_scale_reward_examples():
    assert scale_reward(1.0, CycleConfig(0.040, 0.008, 4.0)) == pytest.approx(0.040)
    assert scale_reward(0.0, CycleConfig(0.150, 0.015, 90.0)) == 0.0
    assert scale_reward(-2.5, CycleConfig(0.045, 0.015, 30.0)) == pytest.approx(-0.1125, abs=1e-15)


def test_cycle_config_validation():
    with pytest.raises(ConfigurationError):
        CycleConfig(0.004, 0.008, 4.0)
    with pytest.raises(ConfigurationError):
        CycleConfig(0.040, 0.0, 4.0)
    with pytest.raises(ConfigurationError):
        CycleConfig(0.040, 0.008, 0.01)
    with pytest.raises(ConfigurationError):
        CycleConfig(0.040, 0.015, 4.0).packets_per_cycle


@pytest.mark.parametrize("task_id, packets, steps", [
    ("ur-reacher-2", 5, 100), ("ur-reacher-6", 5, 100), ("dxl-reacher", 4, 50),
    ("dxl-tracker", 4, 100), ("create-mover", 10, 600), ("create-docker", 3, 666),
])
def test_task_cycles(task_id, packets, steps):
    cycle = make_task(task_id).spec.cycle
    assert cycle.packets_per_cycle == packets
    assert cycle.steps == steps


class Pkt:
    def __init__(self, t):
        self.timestamp = t


def test_latest_packets_examples():
    buf = PacketBuffer()
    for t in (0.015, 0.030, 0.045):
        buf.append(Pkt(t))
    assert [p.timestamp for p in latest_packets(buf, 2)] == [0.045, 0.030]
    assert len(latest_packets(buf, 10)) == 3
    assert latest_packets(buf, 1)[0].timestamp == 0.045


def test_packet_buffer_empty_and_clear():
    buf = PacketBuffer()
    with pytest.raises(NoDataError):
        latest_packets(buf, 1)
    buf.append(Pkt(0.0))
    buf.clear()
    with pytest.raises(NoDataError):
        buf.latest(1)
    with pytest.raises(ConfigurationError):
        PacketBuffer(capacity=10)


@given(st.integers(1, 300), st.integers(1, 80))
def test_packet_buffer_wraps(n, k):
    buf = PacketBuffer(capacity=64)
    for i in range(n):
        buf.append(i)
    got = buf.latest(k)
    expect = list(range(n - 1, -1, -1))[:min(k, n, 64)]
    assert got == expect


def test_packet_buffer_reader_never_sees_torn_order():
    buf = PacketBuffer()
    buf.append(0)
    stop = threading.Event()
    bad = []

    def writer():
        i = 1
        # paced well above any real device rate, but far below a ring lap per read
        while not stop.is_set():
            buf.append(i)
            i += 1
            time.sleep(0.001)

    th = threading.Thread(target=writer)
    th.start()
    try:
        for _ in range(2000):
            time.sleep(0.0002)
            got = buf.latest(10)
            # newest first, consecutive unless the ring was lapped mid-read
            if any(a < b for a, b in zip(got, got[1:])):
                bad.append(got)
    finally:
        stop.set()
        th.join()
    assert len(bad) == 0


def test_mailbox_last_write_wins():
    box = Mailbox(1)
    box.put(2)
    box.put(3)
    assert box.get() == 3


def test_clock_modes():
    c = Clock("virtual")
    assert c.now_us() == 0
    c.advance_us(8000)
    assert c.now == pytest.approx(0.008)
    with pytest.raises(ValueError):
        c.advance_us(-1)
    w = Clock("wall")
    with pytest.raises(RuntimeError):
        w.advance_us(1)
    with pytest.raises(ConfigurationError):
        Clock("sundial")


def test_virtual_packets_spaced_by_readwrite_cycle():
    env = Environment(make_task("create-mover"), seed=0)
    env.reset()
    env.step(np.zeros(2))
    stamps = [p.tick_us for p in env.buffer.latest(10)][::-1]
    assert np.all(np.diff(stamps) == env.cycle.readwrite_cycle_us)


def test_dxl_zero_agent_return_closed_form():
    # under zero current from rest the actuator never moves, so d_t = |target| for all steps
    env = Environment(make_task("dxl-reacher"), seed=7)
    ep = run_episode(env, ZeroAgent(env.spec.obs_dim, env.spec.action_dim))
    assert ep.length == 50 and ep.cause == "time"
    target = env.task.target
    angle = env.device.state.angle
    d = abs(target - angle)
    assert ep.episode_return == pytest.approx(-50 * 0.040 * d, rel=1e-12)


class StraightAgent(ZeroAgent):
    def act(self, obs):
        return np.ones(self.action_dim)


def test_mover_straight_into_wall_ends_on_bump():
    env = Environment(make_task("create-mover"), seed=3)
    ep = run_episode(env, StraightAgent(env.spec.obs_dim, env.spec.action_dim))
    assert ep.cause == "bump"
    assert ep.length < 600


def test_same_seed_identical_records():
    def roll():
        env = Environment(make_task("ur-reacher-2"), seed=11)
        from rtrlbench.agents import RandomAgent
        agent = RandomAgent(env.spec.obs_dim, env.spec.action_dim, seed=5)
        eps = [run_episode(env, agent) for _ in range(2)]
        return [(e.episode_return, e.length, e.end_step) for e in eps]

    assert roll() == roll()


def test_dimension_mismatch_is_configuration_error():
    env = Environment(make_task("dxl-reacher"))
    with pytest.raises(ConfigurationError):
        run_episode(env, ZeroAgent(3, 1))


def test_max_steps_truncates_with_budget_cause():
    env = Environment(make_task("ur-reacher-2"))
    ep = run_episode(env, ZeroAgent(env.spec.obs_dim, env.spec.action_dim), max_steps=7)
    assert ep.length == 7 and ep.cause == "budget"


def test_non_finite_action_rejected():
    env = Environment(make_task("dxl-reacher"))
    env.reset()
    with pytest.raises(ConfigurationError):
        env.step([math.nan])


def test_rewards_are_raw_times_tau():
    env = Environment(make_task("create-docker"), seed=2)
    env.reset()
    rng = np.random.default_rng(0)
    for _ in range(20):
        ts = env.step(rng.uniform(-1, 1, 2))
        assert ts.reward == ts.raw_reward * env.cycle.action_cycle_s
        if ts.done:
            break


def test_wall_clock_episode_runs():
    env = Environment(make_task("dxl-reacher"), clock=Clock("wall"))
    try:
        ep = run_episode(env, ZeroAgent(env.spec.obs_dim, env.spec.action_dim), max_steps=5)
    finally:
        env.close()
    assert ep.length == 5
    assert ep.end_time_us - ep.start_time_us >= 4 * env.cycle.action_cycle_us
