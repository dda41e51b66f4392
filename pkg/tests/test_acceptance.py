"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the criterion lines
are written straight to the terminal.
"""
import math
import time
from functools import lru_cache
from types import SimpleNamespace

import numpy as np
import pytest
import torch
from scipy.integrate import quad
from scipy.special import betainc
from scipy.stats import chisquare

from rtrlbench import cli, experiment
from rtrlbench.agents import gae_advantages, ppo_clip_objective, soft_value, trpo_update
from rtrlbench.agents.networks import (DTYPE, GaussianPolicy, MlpSpec, count_parameters,
                                       finite_difference_check, mlp)
from rtrlbench.config import (HyperConfig, c_from_unit, format_table_row, gamma_from_c,
                              parse_table_row)
from rtrlbench.devices import (Create2Device, Create2Params, DxlDevice, DxlParams, ir_signal,
                               signal_to_distance)
from rtrlbench.hypersearch import WEIGHT_BUDGET, sample_configs
from rtrlbench.stats import average_return, cross_task_correlation, tukey_summary
from rtrlbench.tasks import DockerRewardTerms, docker_raw_reward, dxl_reward, ur_reacher_reward
from rtrlbench.tasks.create import DOCK_WEIGHTS


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {n}: {detail}"


# --- 1. reward exactness ------------------------------------------------------------


def dock_packet(charging=False, ir=(False,) * 9):
    return SimpleNamespace(distance=0.0, charging=charging, bump=(False, False), ir_dock_bits=ir)


def test_criterion_01_reward_exactness(capsys):
    t0 = time.perf_counter()
    terms = DockerRewardTerms()
    errs = {
        "ur(0)": abs(ur_reacher_reward(0.0) - 1.0),
        "dxl(0)": abs(dxl_reward(0.0) - 0.0),
    }
    charging = terms.tau * docker_raw_reward([dock_packet(charging=True)] * 3, terms)
    # every dock bit on for the whole window: V = sum of weights = 4.55, reward = tau * d * V
    all_bits = terms.tau * docker_raw_reward([dock_packet(ir=(True,) * 9)] * terms.window, terms)
    weight_sum = sum(DOCK_WEIGHTS)
    elapsed = time.perf_counter() - t0
    ok = (max(errs.values()) <= 1e-12 and abs(charging - 6.75) <= 1e-9
          and abs(weight_sum - 4.55) <= 1e-9 and abs(all_bits - 0.819) <= 1e-9 and elapsed < 1)
    report(capsys, 1, ok, f"ur(0)/dxl(0) err {max(errs.values()):.1e}, charging {charging!r}, "
                          f"sum w {weight_sum!r}, all-bits {all_bits!r}, {elapsed:.3f}s < 1s")


# --- 2. gamma parameterization --------------------------------------------------------------


def test_criterion_02_gamma_from_c(capsys):
    t0 = time.perf_counter()
    checks = [gamma_from_c(1, 100) == 0.99]
    for n in (50, 100, 600):
        checks.append(gamma_from_c(10 / n, n) == 0.9)
        checks.append(gamma_from_c(c_from_unit(0.0, n), n) == 0.9)
    elapsed = time.perf_counter() - t0
    report(capsys, 2, all(checks) and elapsed < 1,
           f"{sum(checks)}/{len(checks)} exact, {elapsed:.4f}s < 1s")


# --- 3. sampler conformance -----------------------------------------------------------------

# searched ranges as log exponents: (base, lo, hi)
RANGES = {
    "trpo": {"vf_step_size": (10, -5, -2), "delta_kl": (10, -2.5, -0.5)},
    "ppo": {"step_size": (10, -5, -2)},
    "softq": {"step_size": (10, -5, -2), "epochs": (2, 0, 2), "reward_scale": (10, 0, 2)},
    "ddpg": {"step_size": (10, -5, -2), "sigma": (10, -2, math.log10(5)),
             "reward_scale": (10, 0, 2)},
}
LOG_UNIFORM = {"trpo": "vf_step_size", "ppo": "step_size", "softq": "step_size",
               "ddpg": "step_size"}


@lru_cache(maxsize=None)
def built_weights(algo, layers, size, obs=8, act=2):
    """Weights of the largest network of an algorithm, counted on real modules."""
    spec = MlpSpec(layers, size)
    g = torch.Generator().manual_seed(0)
    if algo in ("trpo", "ppo"):
        nets = [GaussianPolicy(obs, act, spec, g), mlp(obs, 1, spec, g)]
    elif algo == "ddpg":
        nets = [mlp(obs, act, spec, g), mlp(obs + act, 1, spec, g)]
    else:
        nets = [mlp(obs + act, 1, spec, g), mlp(obs + act, act, spec, g)]
    return max(count_parameters(n) for n in nets)


def test_criterion_03_sampler_conformance(capsys):
    t0 = time.perf_counter()
    problems, pvalues = [], []
    for algo, ranges in RANGES.items():
        cfgs = sample_configs(algo, 100_000, seed=2024)
        batch = np.array([c.batch_size for c in cfgs])
        if not set(np.unique(batch)) <= {256, 512, 1024, 2048, 4096, 8192}:
            problems.append(f"{algo} batch")
        for name, (base, lo, hi) in ranges.items():
            e = np.log([getattr(c, name) for c in cfgs]) / math.log(base)
            if e.min() < lo - 1e-12 or e.max() > hi + 1e-12:
                problems.append(f"{algo} {name}")
        layers = np.array([c.hidden_layers for c in cfgs])
        sizes = np.array([c.hidden_size for c in cfgs])
        if layers.min() < 1 or layers.max() > 4 or sizes.min() < 8:
            problems.append(f"{algo} hidden")
        if np.any(sizes & (sizes - 1)):
            problems.append(f"{algo} hidden not power of two")
        pairs = set(zip(layers.tolist(), sizes.tolist()))
        if max(built_weights(algo, l, s) for l, s in pairs) > WEIGHT_BUDGET:
            problems.append(f"{algo} weights")
        u = np.array([c.u_gamma for c in cfgs])
        if u.min() < 0 or u.max() > 1:
            problems.append(f"{algo} c_gamma")
        if algo == "ppo":
            ob = np.array([c.opt_batch_size for c in cfgs])
            if ob.min() < 8 or np.any(ob > batch):
                problems.append("ppo opt batch")
        # log-uniformity: equal-width bins in exponent space
        base, lo, hi = ranges[LOG_UNIFORM[algo]]
        e = np.log10([getattr(c, LOG_UNIFORM[algo]) for c in cfgs])
        pvalues.append(chisquare(np.histogram(e, bins=20, range=(lo, hi))[0]).pvalue)
        pvalues.append(chisquare(np.bincount(np.log2(batch).round().astype(int) - 8,
                                             minlength=6)).pvalue)
        pvalues.append(chisquare(np.histogram(u, bins=20, range=(0, 1))[0]).pvalue)
    elapsed = time.perf_counter() - t0
    ok = not problems and min(pvalues) > 0.01 and elapsed < 30
    report(capsys, 3, ok, f"violations {problems or 'none'}, min chi-square p "
                          f"{min(pvalues):.3f} > 0.01, {elapsed:.1f}s < 30s")


# --- 4. fixture round-trip ------------------------------------------------------------------

FIXTURES = {
    "trpo": "158.56 &  4096 &  0.00472 &  0.02437 &  0.96833 &  0.99874 &     2 &    64 \\\\",
    "ppo": " 176.62 &   512 &  0.00005 &    16 &  0.96836 &  0.99944 &     3 &    64 \\\\ ",
}


def cells(row):
    return [c.strip() for c in row.replace("\\\\", "").split("&") if c.strip()]


def test_criterion_04_fixture_round_trip(capsys):
    results = []
    for algo, row in FIXTURES.items():
        ret, cfg = parse_table_row(algo, row)
        again = format_table_row(ret, HyperConfig.from_dict(cfg.to_dict()))
        results.append(cells(again) == cells(row))
    report(capsys, 4, all(results), f"trpo {results[0]}, ppo {results[1]}")


# --- 5. GAE oracle ----------------------------------------------------------------------------


def double_sum_gae(r, v, gamma, lam):
    n = len(r)
    delta = [r[t] + gamma * v[t + 1] - v[t] for t in range(n)]
    return [sum((gamma * lam) ** (k - t) * delta[k] for k in range(t, n)) for t in range(n)]


def test_criterion_05_gae_oracle(capsys):
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        r = rng.normal(size=200)
        v = rng.normal(size=201)
        gamma, lam = rng.uniform(0.8, 1.0, 2)
        adv, _ = gae_advantages(r, v, gamma, lam)
        worst = max(worst, float(np.max(np.abs(adv - double_sum_gae(r, v, gamma, lam)))))
    elapsed = time.perf_counter() - t0
    report(capsys, 5, worst <= 1e-10 and elapsed < 10,
           f"max |err| {worst:.2e} <= 1e-10, {elapsed:.2f}s < 10s")


# --- 6. PPO clip ------------------------------------------------------------------------------


def test_criterion_06_ppo_clip(capsys):
    rng = np.random.default_rng(6)
    n = 1_000_000
    r = rng.exponential(1.0, n)
    a = rng.normal(0, 2, n)
    eps = rng.uniform(0.01, 0.5, n)
    # positive advantage: the ratio is capped above; negative: capped below
    direct = np.where(a >= 0, np.minimum(r, 1 + eps) * a, np.maximum(r, 1 - eps) * a)
    err_np = np.max(np.abs(ppo_clip_objective(r, a, eps) - direct))
    err_t = torch.max(torch.abs(ppo_clip_objective(torch.tensor(r), torch.tensor(a),
                                                   torch.tensor(eps)) - torch.tensor(direct)))
    worst = max(float(err_np), float(err_t))
    report(capsys, 6, worst <= 1e-10, f"max |err| {worst:.2e} <= 1e-10 on {n} triples")


# --- 7. TRPO trust region ---------------------------------------------------------------------


def test_criterion_07_trpo_trust_region(capsys):
    accepted = violations = grad_fail = 0
    worst_ratio = worst_grad = 0.0
    for seed in range(100):
        g = torch.Generator().manual_seed(seed)
        rng = np.random.default_rng(seed)
        obs_dim, act_dim = int(rng.integers(2, 9)), int(rng.integers(1, 4))
        pol = GaussianPolicy(obs_dim, act_dim, MlpSpec(int(rng.integers(1, 3)), 32), g)
        obs = torch.randn(256, obs_dim, dtype=DTYPE, generator=g)
        with torch.no_grad():
            acts = pol(obs) + torch.randn(256, act_dim, dtype=DTYPE, generator=g)
            old_mean, old_std = pol(obs), pol.log_std.exp().clone()
            old_logp = pol.log_prob(obs, acts)
        adv = torch.randn(256, dtype=DTYPE, generator=g)
        check = finite_difference_check(
            pol, lambda: (torch.exp(pol.log_prob(obs, acts) - old_logp) * adv).mean(),
            tolerance=1e-4, n_coords=32, rng=rng)
        grad_fail += not check.passed
        worst_grad = max(worst_grad, check.max_rel_error)
        delta = float(10 ** rng.uniform(-2.5, -0.5))
        stats = trpo_update(pol, obs, acts, adv, delta)
        if stats.accepted:
            accepted += 1
            with torch.no_grad():
                kl = torch.distributions.kl_divergence(
                    torch.distributions.Normal(old_mean, old_std),
                    torch.distributions.Normal(pol(obs), pol.log_std.exp())).sum(-1).mean()
            worst_ratio = max(worst_ratio, float(kl) / delta)
            violations += float(kl) > 1.5 * delta
    ok = violations == 0 and grad_fail == 0 and accepted > 0
    report(capsys, 7, ok, f"{accepted}/100 accepted, max KL/delta {worst_ratio:.3f} <= 1.5, "
                          f"grad-check failures {grad_fail} (max rel err {worst_grad:.1e})")


# --- 8. soft value oracle ---------------------------------------------------------------------


def test_criterion_08_soft_value(capsys):
    critics = [lambda a: -(a - 0.3) ** 2, lambda a: np.sin(3 * a) + 0.5 * a,
               lambda a: 2 * np.abs(a), lambda a: np.cos(5 * a) * np.exp(-a)]
    m = 10_000
    grid = -1 + (np.arange(m) + 0.5) * 2 / m
    worst = 0.0
    for q in critics:
        for alpha in (0.05, 0.2, 1.0, 5.0):
            exact = alpha * math.log(0.5 * quad(lambda a: math.exp(q(a) / alpha), -1, 1,
                                                limit=200)[0])
            worst = max(worst, abs(float(soft_value(q(grid), alpha)) - exact))
    report(capsys, 8, worst <= 1e-3, f"max |err| {worst:.2e} <= 1e-3")


# --- 9. determinism ---------------------------------------------------------------------------


def test_criterion_09_repeatability(capsys):
    t0 = time.perf_counter()
    with capsys.disabled():
        code = cli.main(["repeat", "--task", "all", "--agent", "ppo", "--count", "4"])
    elapsed = time.perf_counter() - t0
    report(capsys, 9, code == 0 and elapsed < 300,
           f"repeat exit code {code}, {elapsed:.1f}s < 300s")


# --- 10/11. learning and scripted ordering on DXL-Reacher ------------------------------------

BASELINE_SEEDS = range(5)
BASELINE_STEPS = 10_000


@lru_cache(maxsize=None)
def baseline_returns(agent_id):
    return tuple(average_return(experiment.run_experiment("dxl-reacher", agent_id, env_seed=s,
                                                          init_seed=s, steps=BASELINE_STEPS))
                 for s in BASELINE_SEEDS)


def test_criterion_11_pid_beats_random(capsys):
    pid, rnd = np.array(baseline_returns("pid")), np.array(baseline_returns("random"))
    se = math.sqrt(pid.var(ddof=1) / len(pid) + rnd.var(ddof=1) / len(rnd))
    diff = pid.mean() - rnd.mean()
    report(capsys, 11, diff >= 5 * se and diff > 0,
           f"PID {pid.mean():.4f} vs random {rnd.mean():.4f}: difference {diff:.4f}, "
           f"{diff / se if se else math.inf:.1f} x stderr {se:.4f} >= 5")


@pytest.mark.slow
@pytest.mark.parametrize("algo", ["trpo", "ppo", "softq", "ddpg"])
def test_criterion_10_learning(capsys, algo):
    gap = np.mean(baseline_returns("pid")) - np.mean(baseline_returns("random"))
    t0 = time.perf_counter()
    rec = experiment.run_experiment("dxl-reacher", algo, experiment.default_config(algo),
                                    env_seed=0, steps=experiment.TASK_BUDGETS["dxl-reacher"])
    elapsed = time.perf_counter() - t0
    returns = np.array(rec.returns)
    k = max(1, len(returns) // 5)
    lift = (returns[-k:].mean() - returns[:k].mean()) / gap
    detail = f"{algo}: lift {lift:.2f} of PID-random gap {gap:.3f}, {elapsed:.0f}s <= 600s"
    if algo == "ddpg":
        # reported for reference; not held to the lift bar
        with capsys.disabled():
            print(f"\ncriterion 10: INFO  {detail} (exempt)")
        assert elapsed <= 600
        return
    report(capsys, 10, lift >= 0.3 and elapsed <= 600, detail + ", bar 0.30")


# --- 12. simulator invariants -----------------------------------------------------------------


def test_criterion_12_simulator_invariants(capsys):
    rng = np.random.default_rng(12)
    dev = Create2Device()
    p, arena = dev.params, dev.arena
    commands = rng.uniform(-p.max_wheel_speed, p.max_wheel_speed, size=(1_000_000, 2))
    escapes = docks = 0
    for c in commands:
        dev.step(c, 0.015)
        s = dev.state
        if not (p.radius - 1e-12 <= s.x <= arena.width - p.radius + 1e-12
                and p.radius - 1e-12 <= s.y <= arena.depth - p.radius + 1e-12):
            escapes += 1
        if s.docked:
            docks += 1
            dev.undock()
    lo, hi = Create2Params().ir_range
    ds = np.linspace(lo, hi, 10_001)
    ir_err = max(abs(signal_to_distance(ir_signal(d)) - d) for d in ds)
    dp = DxlParams()
    v_max = dp.terminal_velocity(dp.current_limit)
    dxl = DxlDevice(dp)
    worst_v = 0.0
    for i in rng.uniform(-2 * dp.current_limit, 2 * dp.current_limit, 200_000):
        dxl.step(i, float(rng.choice([0.001, 0.04, 0.5])))
        worst_v = max(worst_v, abs(dxl.state.velocity))
    ok = escapes == 0 and ir_err < 1e-9 and worst_v <= v_max
    report(capsys, 12, ok, f"Create escapes {escapes} in 1e6 steps ({docks} dockings), "
                           f"IR round-trip {ir_err:.1e} < 1e-9, "
                           f"DXL |v| max {worst_v:.4f} <= {v_max:.4f}")


# --- 13. statistics oracles -------------------------------------------------------------------


def percentile(s, q):
    pos = q * (len(s) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (pos - lo) * (s[hi] - s[lo])


def average_ranks(x):
    order = sorted(range(len(x)), key=lambda i: x[i])
    ranks = [0.0] * len(x)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and x[order[j + 1]] == x[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def pearson(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    r = sxy / math.sqrt(sxx * syy)
    df = n - 2
    if r * r == 1.0:
        return r, 0.0  # limit of the t-test p-value as |r| -> 1
    return r, betainc(df / 2, 0.5, df / (df + r * r * df / (1 - r * r)))


def test_criterion_13_statistics(capsys):
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(4, 60))
        x = rng.standard_t(3, n) * rng.uniform(0.1, 100)
        if rng.random() < 0.3:
            x = np.round(x)  # ties
        x = x.tolist()
        s = tukey_summary(x)
        srt = sorted(x)
        q1, med, q3 = (percentile(srt, q) for q in (0.25, 0.5, 0.75))
        lo_f, hi_f = q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1)
        inside = [v for v in x if lo_f <= v <= hi_f]
        out = sorted(v for v in x if v < lo_f or v > hi_f)
        worst = max(worst, abs(s.median - med), abs(s.q1 - q1), abs(s.q3 - q3),
                    abs(s.whisker_lo - min(inside)), abs(s.whisker_hi - max(inside)))
        if list(s.outliers) != out:
            worst = math.inf
        y = (0.5 * np.array(x) + rng.normal(size=n) * np.std(x)).tolist()
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            continue
        for method, (a, b) in (("pearson", (x, y)),
                               ("spearman", (average_ranks(x), average_ranks(y)))):
            r, p = cross_task_correlation(x, y, method)
            rb, pb = pearson(a, b)
            worst = max(worst, abs(r - rb), abs(p - pb))
    report(capsys, 13, worst <= 1e-12, f"max |err| {worst:.1e} <= 1e-12 on 1000 datasets")
