import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import trapezoid

from rtrlbench.agents import (MovejAgent, MoverScriptAgent, PidAgent, PidState, SeekDockAgent,
                              load_pid_gains, make_agent, movej_profile, mover_script, pid_step)
from rtrlbench.devices import planar_fingertip
from rtrlbench.errors import ConfigurationError
from rtrlbench.runtime import Environment, run_episode
from rtrlbench.tasks import make_task

# --- movej -------------------------------------------------------------------


def test_movej_profile_zero_offset():
    for t in np.linspace(0, 2.5, 26):
        pos, vel = movej_profile(t, np.zeros(2))
        assert np.all(pos == 0) and np.all(vel == 0)


def test_movej_profile_covers_offset_in_two_seconds():
    delta = np.array([1.0])
    ts = np.linspace(0, 2.0, 200_001)
    vel = np.array([movej_profile(t, delta)[1][0] for t in ts])
    # area under the trapezoid is the offset; plateau = delta / (T - ramp)
    assert trapezoid(vel, ts) == pytest.approx(1.0, abs=1e-6)
    assert vel.max() == pytest.approx(1.0 / 1.5, abs=1e-9)
    assert movej_profile(2.0, delta)[0][0] == 1.0
    assert movej_profile(3.0, delta)[1][0] == 0.0
    with pytest.raises(ValueError):
        movej_profile(0.1, delta, duration=0.5, ramp=0.5)


@given(st.floats(0, 2), st.floats(-3, 3))
def test_movej_profile_position_is_integral_of_velocity(t, d):
    pos, vel = movej_profile(t, np.array([d]))
    h = 1e-6
    if 1e-5 < t < 2 - 1e-5:
        fd = (movej_profile(t + h, np.array([d]))[0] - movej_profile(t - h, np.array([d]))[0]) / (2 * h)
        assert fd[0] == pytest.approx(vel[0], abs=1e-4)


def test_movej_zero_command_at_target():
    env = Environment(make_task("ur-reacher-2"), seed=0)
    obs = env.reset()
    env.task.target = planar_fingertip(*obs[:2])
    obs = env.task.observe(env.buffer, np.zeros(2), 0.0)
    agent = MovejAgent(env.spec)
    agent.reset(obs)
    np.testing.assert_allclose(agent.act(obs), 0.0, atol=1e-12)


@pytest.mark.parametrize("task_id", ["ur-reacher-2", "ur-reacher-6"])
def test_movej_arrives_within_budget(task_id):
    env = Environment(make_task(task_id), seed=1)
    agent = MovejAgent(env.spec)
    tol = 0.005 if task_id == "ur-reacher-2" else 0.03
    for _ in range(3):
        obs = env.reset()
        agent.reset(obs)
        dists = []
        for _ in range(env.cycle.steps):
            ts = env.step(agent.act(obs))
            obs = ts.observation
            dists.append(np.linalg.norm(obs[-(3 if task_id == "ur-reacher-6" else 2):]))
        arrive = int(round(2.0 / env.cycle.action_cycle_s))
        assert min(dists[arrive - 1:arrive + 2]) < tol


def test_movej_only_for_ur():
    with pytest.raises(ConfigurationError):
        MovejAgent(make_task("dxl-reacher").spec)


# --- PID ----------------------------------------------------------------------------


def test_pid_examples():
    assert pid_step(PidState(1.0, 1.0, 1.0), 0.0, 0.04) == 0.0
    assert pid_step(PidState(2.0, 0.0, 0.0), 1.0, 0.04) == 2.0
    with pytest.raises(ValueError):
        pid_step(PidState(1.0, 0.0, 0.0), 1.0, 0.0)
    with pytest.raises(ConfigurationError):
        PidState(1.0, 0.0, 0.0, integral_limit=0.0)


def test_pid_terms_and_windup():
    s = PidState(0.0, 1.0, 0.0, integral_limit=0.1)
    for _ in range(10):
        out = pid_step(s, 1.0, 0.04)
    assert out == pytest.approx(0.1)
    d = PidState(0.0, 0.0, 2.0)
    assert pid_step(d, 1.0, 0.5) == 0.0  # no derivative kick on the first sample
    assert pid_step(d, 2.0, 0.5) == pytest.approx(4.0)
    d.reset()
    assert d.prev_error is None and d.integral == 0.0


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=50))
def test_pid_zero_gains_output_zero(errors):
    s = PidState(0.0, 0.0, 0.0)
    assert all(pid_step(s, e, 0.04) == 0.0 for e in errors)


def test_pid_gains_from_data_file():
    g = load_pid_gains("dxl-reacher")
    assert set(g) == {"kp", "ki", "kd", "integral_limit"}
    with pytest.raises(ConfigurationError):
        load_pid_gains("create-mover")


def test_pid_settles_within_one_second():
    env = Environment(make_task("dxl-reacher"), seed=3)
    agent = PidAgent(env.spec)
    n_settle = int(round(1.0 / env.cycle.action_cycle_s))
    for _ in range(10):
        obs = env.reset()
        agent.reset(obs)
        target = env.task.target
        err = []
        for _ in range(env.cycle.steps):
            obs = env.step(agent.act(obs)).observation
            err.append(abs(obs[0] - target))
        # within 2% of the target (or 2% of a radian for targets near the centre)
        band = 0.02 * max(abs(target), 1.0)
        assert max(err[n_settle:]) <= band


def test_pid_only_for_dxl():
    with pytest.raises(ConfigurationError):
        PidAgent(make_task("create-mover").spec)


# --- Create -------------------------------------------------------------------------


def test_mover_script_examples():
    obs = np.zeros(8)
    obs[2], obs[3] = 0.6, 0.1
    assert mover_script(obs) == (-150.0, 150.0)
    assert mover_script(np.zeros(8)) == (150.0, 150.0)
    obs = np.zeros(8)
    obs[3] = 0.55
    assert mover_script(obs) == (150.0, 150.0)


def test_mover_script_never_bumps():
    env = Environment(make_task("create-mover"), seed=0)
    agent = MoverScriptAgent(env.spec)
    for _ in range(3):
        ep = run_episode(env, agent, keep_steps=False)
        assert ep.cause == "time" and ep.length == 600
        assert ep.episode_return > 0


def test_seek_dock_agent_docks():
    env = Environment(make_task("create-docker"), seed=0)
    agent = SeekDockAgent(env.spec)
    results = [run_episode(env, agent, keep_steps=False) for _ in range(3)]
    assert sum(r.success for r in results) >= 2


@pytest.mark.parametrize("agent_id, task_id", [
    ("movej", "ur-reacher-2"), ("pid", "dxl-tracker"), ("mover-script", "create-mover"),
    ("seek-dock", "create-docker"),
])
def test_scripted_agents_deterministic(agent_id, task_id):
    def roll():
        env = Environment(make_task(task_id), seed=2)
        agent = make_agent(agent_id, env.spec)
        return [run_episode(env, agent, max_steps=150, keep_steps=False).episode_return
                for _ in range(2)]

    assert roll() == roll()


def test_pid_beats_zero_on_tracker():
    env = Environment(make_task("dxl-tracker"), seed=0)
    pid = np.mean([run_episode(env, make_agent("pid", env.spec)).episode_return
                   for _ in range(5)])
    env = Environment(make_task("dxl-tracker"), seed=0)
    zero = np.mean([run_episode(env, make_agent("zero", env.spec)).episode_return
                    for _ in range(5)])
    assert pid > zero
    assert not math.isnan(pid)
