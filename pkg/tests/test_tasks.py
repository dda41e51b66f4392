import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rtrlbench.devices import Arena, seat_pose
from rtrlbench.errors import ConfigurationError
from rtrlbench.runtime import Environment, PacketBuffer
from rtrlbench.tasks import (TASKS, DockerRewardTerms, TaskSpec, docker_components,
                             docker_raw_reward, docker_reward, dxl_reward, generate_target,
                             make_task, mover_reward, tracker_schedule, ur_reacher_reward)
from rtrlbench.tasks.create import DOCK_WEIGHTS


def test_ur_reacher_reward_examples():
    assert ur_reacher_reward(0.0) == 1.0
    assert ur_reacher_reward(0.1) == pytest.approx(0.2678794, abs=1e-7)
    assert ur_reacher_reward(1.0) == pytest.approx(-1.0 + math.exp(-100.0), abs=1e-15)
    with pytest.raises(ValueError):
        ur_reacher_reward(-0.1)


def test_dxl_reward_examples():
    assert dxl_reward(0.0) == 0.0
    assert dxl_reward(0.5) == -0.5
    with pytest.raises(ValueError):
        dxl_reward(-1e-9)


@given(st.floats(0, 10), st.floats(0, 10))
def test_rewards_monotone(d1, d2):
    if d1 < d2:
        assert dxl_reward(d1) > dxl_reward(d2)
    if d1 < d2 <= 0.07:  # the precision bump keeps UR reward decreasing near the target
        assert ur_reacher_reward(d1) >= ur_reacher_reward(d2)


def packet(distance=0.0, charging=False, bump=(False, False), ir=(False,) * 9):
    return SimpleNamespace(distance=distance, charging=charging, bump=bump, ir_dock_bits=ir)


def test_mover_reward_examples():
    assert mover_reward([packet(5.0)] * 10) == 50.0
    assert mover_reward([packet(0.0)] * 10) == 0.0
    assert mover_reward([packet(d) for d in [3.0, -3.0] * 5]) == 0.0
    assert mover_reward([packet(1.0)] * 15) == 10.0  # only the ten newest count


def test_docker_all_charging():
    terms = DockerRewardTerms()
    assert terms.n == 3
    pk = [packet(charging=True)] * 3
    X, Y, Z, V = docker_components(pk, terms)
    assert X == pytest.approx(1.0, abs=1e-12)
    assert terms.tau * docker_raw_reward(pk, terms) == pytest.approx(6.75, abs=1e-9)


def test_docker_bump_and_ir_examples():
    terms = DockerRewardTerms()
    pk = [packet(), packet(bump=(True, False)), packet()]
    assert terms.tau * docker_raw_reward(pk, terms) == pytest.approx(-0.45, abs=1e-9)
    pk = [packet(ir=(True,) * 9)] * 20
    assert docker_components(pk, terms).V == pytest.approx(4.55, abs=1e-9)
    assert terms.tau * docker_raw_reward(pk, terms) == pytest.approx(0.819, abs=1e-9)
    assert sum(DOCK_WEIGHTS) == pytest.approx(4.55, abs=1e-12)


def test_docker_terms_reject_fractional_n():
    with pytest.raises(ConfigurationError):
        DockerRewardTerms(tau=0.040).n


def brute_docker(packets, a=150.0, b=10.0, c=5.0, d=4.0, n=3, window=20, w=DOCK_WEIGHTS):
    """Weighted charging, bump union, mean travel and mean weighted IR, straight from packets."""
    pk = list(packets) + [packet()] * 40
    X = sum((n - i) * float(pk[i].charging) for i in range(n)) * 2 / (n * (n + 1))
    Y = -sum(1.0 for k in range(2) if any(pk[i].bump[k] for i in range(n)))
    Z = sum(pk[i].distance for i in range(n)) / n
    V = sum(w[k] * float(pk[i].ir_dock_bits[k]) for i in range(window) for k in range(9)) / window
    return a * X + b * Y + c * Z + d * V


def random_packets(rng, m):
    return [packet(float(rng.normal(0, 3)), bool(rng.random() < 0.5),
                   tuple(bool(v) for v in rng.random(2) < 0.2),
                   tuple(bool(v) for v in rng.random(9) < 0.3)) for _ in range(m)]


def test_docker_reward_matches_brute_force(rng):
    terms = DockerRewardTerms()
    for _ in range(300):
        pk = random_packets(rng, int(rng.integers(1, 40)))
        assert docker_raw_reward(pk, terms) == pytest.approx(brute_docker(pk), abs=1e-12)


def test_docker_window_invariance(rng):
    terms = DockerRewardTerms()
    pk = random_packets(rng, 20)
    base = docker_components(pk, terms)
    tail = docker_components(pk + random_packets(rng, 10), terms)
    assert base.V == tail.V  # nothing older than 20 packets matters
    assert base.X == tail.X


def test_docker_reward_from_buffer_scaled():
    buf = PacketBuffer()
    for _ in range(20):
        buf.append(packet(charging=True))
    terms = DockerRewardTerms()
    assert docker_reward(buf, terms) == pytest.approx(terms.tau * docker_raw_reward(
        buf.latest(20), terms), abs=1e-15)


def test_ur2_targets_inside_box():
    rng = np.random.default_rng(0)
    task = make_task("ur-reacher-2")
    pts = np.array([task.generate_target(rng) for _ in range(100_000)])
    lo = np.array(task.box_center) - np.array(task.box_size) / 2
    hi = np.array(task.box_center) + np.array(task.box_size) / 2
    assert np.all(pts >= lo) and np.all(pts <= hi)
    # a box of 0.7 x 0.5 is actually covered
    np.testing.assert_allclose(pts.max(0) - pts.min(0), task.box_size, atol=1e-3)


@pytest.mark.parametrize("task_id", ["ur-reacher-2", "ur-reacher-6", "dxl-reacher"])
def test_targets_reproducible(task_id):
    a = [generate_target(task_id, np.random.default_rng(4)) for _ in range(3)]
    b = [generate_target(task_id, np.random.default_rng(4)) for _ in range(3)]
    np.testing.assert_array_equal(np.array(a, dtype=float), np.array(b, dtype=float))


def test_tracker_schedule():
    rng = np.random.default_rng(1)
    for _ in range(100):
        s = tracker_schedule(rng, 4.0)
        assert s.speed == pytest.approx(abs(s.end_position - s.start) / 4.0)
        assert s.position(0.0) == pytest.approx(s.start, abs=1e-12)
        assert s.position(4.0) == s.end_position
    degenerate = tracker_schedule(np.random.default_rng(2), 4.0, start_range=0.0)
    assert degenerate.speed == 0.0


def test_tracker_lagged_target_at_start():
    env = Environment(make_task("dxl-tracker"), seed=5)
    obs = env.reset()
    sl = env.spec.obs_slices()
    assert obs[sl["target"]] == obs[sl["target_lagged"]]
    env.step([0.0])
    env.step([0.0])
    obs = env.step([0.0]).observation
    now, lagged = obs[sl["target"]][0], obs[sl["target_lagged"]][0]
    sched = env.task.schedule
    assert now == sched.position(0.12)
    assert lagged == pytest.approx(sched.position(0.07), abs=1e-12)


@pytest.mark.parametrize("task_id, obs_dim, act_dim", [
    ("ur-reacher-2", 8, 2), ("ur-reacher-6", 21, 6), ("dxl-reacher", 4, 1),
    ("dxl-tracker", 5, 1), ("create-mover", 8, 2), ("create-docker", 20, 2),
])
def test_observation_shapes(task_id, obs_dim, act_dim):
    env = Environment(make_task(task_id), seed=0)
    obs = env.reset()
    assert env.spec.obs_dim == obs_dim and env.spec.action_dim == act_dim
    assert obs.shape == (obs_dim,)
    ts = env.step(np.zeros(act_dim))
    assert ts.observation.shape == (obs_dim,)
    assert np.all(np.isfinite(ts.observation))


def test_task_spec_round_trip():
    for task_id in TASKS:
        spec = make_task(task_id).spec
        assert TaskSpec.from_dict(spec.to_dict()) == spec


def test_unknown_task():
    with pytest.raises(ConfigurationError):
        make_task("ur-reacher-9")


def test_mover_reset_inside_and_clear():
    env = Environment(make_task("create-mover"), seed=9)
    for _ in range(3):
        env.reset()
        s = env.device.state
        a, r = env.device.arena, env.device.params.radius
        assert r <= s.x <= a.width - r and r <= s.y <= a.depth - r
        assert not any(env.buffer.latest(1)[0].bump)


def test_docker_reset_after_failure_on_dock_axis():
    env = Environment(make_task("create-docker"), seed=0)
    env.reset()  # no previous outcome: seek-dock, then back off
    assert env.task.seek_dock_succeeded
    s = env.device.state
    xs, ys, hs = seat_pose(Arena())
    assert s.x == pytest.approx(xs, abs=1e-9)
    assert s.heading == pytest.approx(hs, abs=1e-9)
    assert ys - s.y == pytest.approx(0.1 * 3.25, abs=2e-3)


def test_docker_reset_after_success_not_perpendicular():
    def pose():
        env = Environment(make_task("create-docker"), seed=3)
        env.reset()
        env.device.place(*seat_pose(Arena()), docked=True)
        env.previous_outcome = True
        env.reset()
        return env.device.state.pose

    p1, p2 = pose(), pose()
    assert p1 == p2
    misalign = (p1[2] - math.pi / 2 + math.pi) % (2 * math.pi) - math.pi
    assert abs(misalign) > math.radians(10)


def test_docked_reward_recurs():
    env = Environment(make_task("create-docker"), seed=1)
    env.reset()
    env.device.place(*seat_pose(Arena()), docked=True)
    rewards = [env.step([1.0, -1.0]).raw_reward for _ in range(10)]
    assert all(r > 100 for r in rewards[2:])
    assert env.device.state.docked


def test_faulty_variant_zero_sensors():
    env = Environment(make_task("create-mover", faulty=True), seed=0)
    obs = env.reset()
    assert obs[1] == -1.0 and obs[4] == -1.0  # zero signal reads as farthest
