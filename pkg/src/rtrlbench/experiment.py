"""Experiment orchestration: single runs, config sweeps and the
identical-seed repeatability protocol."""
from __future__ import annotations

import logging
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .agents import LEARNERS, make_agent
from .config import HyperConfig
from .errors import ConfigurationError
from .records import RunRecord, RunWriter
from .runtime import Clock, Environment, run_episode
from .tasks import TASKS, make_task

log = logging.getLogger(__name__)

# Total agent steps per run, per task.
TASK_BUDGETS = {
    "ur-reacher-2": 150_000,
    "ur-reacher-6": 200_000,
    "dxl-reacher": 50_000,
    "dxl-tracker": 150_000,
    "create-mover": 40_000,
    "create-docker": 300_000,
}
PRESETS = {
    "full": TASK_BUDGETS,
    "smoke": {task: 5_000 for task in TASK_BUDGETS},
}

# Hand-picked configs that learn on the simulated DXL-Reacher within its
# 50k-step budget; the defaults when a learner is run without a config file.
DEFAULT_CONFIGS = {
    "trpo": dict(algorithm="trpo", batch_size=1024, hidden_layers=2, hidden_size=64,
                 vf_step_size=1e-3, delta_kl=0.02, gamma=0.98, lam=0.97),
    "ppo": dict(algorithm="ppo", batch_size=1024, hidden_layers=2, hidden_size=64,
                step_size=3e-4, opt_batch_size=64, gamma=0.98, lam=0.97),
    "softq": dict(algorithm="softq", batch_size=128, hidden_layers=2, hidden_size=64,
                  step_size=3e-4, epochs=1, reward_scale=10.0, gamma=0.98,
                  extra={"train_every": 4}),
    "ddpg": dict(algorithm="ddpg", batch_size=64, hidden_layers=2, hidden_size=64,
                 step_size=1e-3, sigma=0.2, reward_scale=1.0, gamma=0.98),
}


def default_config(algorithm: str) -> HyperConfig:
    try:
        return HyperConfig.from_dict(DEFAULT_CONFIGS[algorithm])
    except KeyError:
        raise ConfigurationError(f"no default config for {algorithm!r}") from None


def budget(task_id: str, steps: Optional[int] = None, preset: Optional[str] = None) -> int:
    if steps is not None:
        if steps < 1:
            raise ConfigurationError("steps must be positive")
        return int(steps)
    if task_id not in TASKS:
        raise ConfigurationError(f"unknown task {task_id!r}")
    try:
        return PRESETS[preset or "full"][task_id]
    except KeyError:
        raise ConfigurationError(f"unknown preset {preset!r}") from None


def run_experiment(task_id: str, agent_id: str, config: Optional[HyperConfig] = None,
                   env_seed: int = 0, init_seed: Optional[int] = None,
                   steps: Optional[int] = None, preset: Optional[str] = None,
                   log_path=None, clock: str = "virtual", device_params: Optional[dict] = None,
                   task_options: Optional[dict] = None) -> RunRecord:
    """Run one agent on one task for an exact step budget and return its record.

    With ``log_path`` every episode is appended to an NDJSON run log as it ends.
    """
    total = budget(task_id, steps, preset)
    if agent_id in LEARNERS and config is None:
        config = default_config(agent_id)
    if config is not None and init_seed is None:
        init_seed = config.init_seed
    task = make_task(task_id, **(task_options or {}))
    env = Environment(task, seed=env_seed, clock=Clock(clock), device_params=device_params)
    agent = make_agent(agent_id, env.spec, config, init_seed if init_seed is not None else env_seed)
    record = RunRecord(task_id, agent_id, config.to_dict() if config else None, env_seed,
                       init_seed, env.device.snapshot(),
                       meta={"clock": clock, "budget": total, "preset": preset,
                             "task_options": task_options or {}})
    try:
        with RunWriter(log_path, record) as writer:
            while env.total_steps < total:
                ep = run_episode(env, agent, max_steps=total - env.total_steps,
                                 keep_steps=False)
                writer.add_episode(ep.episode_return, ep.length, ep.end_step, ep.cause,
                                   ep.success, ep.start_time_us, ep.end_time_us)
    finally:
        env.close()
    return record


def _sweep_job(args) -> str:
    task_id, agent_id, cfg, seed, steps, preset, path = args
    run_experiment(task_id, agent_id, HyperConfig.from_dict(cfg), env_seed=seed, steps=steps,
                   preset=preset, log_path=path)
    return str(path)


def sweep(task_id: str, configs: Sequence[HyperConfig], out_dir, seeds: Sequence[int] = (0,),
          steps: Optional[int] = None, preset: Optional[str] = None, workers: int = 1) -> list:
    """Run every (config, seed) pair; one log file per run, ``c{index}_s{seed}.ndjson``.

    Runs that already have a log are skipped, so an interrupted sweep can resume.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = []
    for i, cfg in enumerate(configs):
        for seed in seeds:
            path = out_dir / f"c{i:03d}_s{seed}.ndjson"
            if path.exists():
                log.info("skipping %s (log exists)", path)
                continue
            jobs.append((task_id, cfg.algorithm, cfg.to_dict(), seed, steps, preset, path))
    if workers <= 1:
        return [_sweep_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_job, jobs))


@dataclass
class RepeatReport:
    task_id: str
    agent_id: str
    seeds: list
    returns: list = field(default_factory=list)  # one return sequence per run
    identical: bool = True
    divergence: Optional[dict] = None  # first mismatch: run, episode, end_step

    def summary(self) -> str:
        if self.identical:
            return (f"{self.task_id}/{self.agent_id}: {len(self.returns)} runs, "
                    f"{len(self.returns[0])} episodes each, identical")
        d = self.divergence
        return (f"{self.task_id}/{self.agent_id}: run {d['run']} diverges at episode "
                f"{d['episode']} (step {d['end_step']})")


def _return_bytes(values) -> bytes:
    return struct.pack(f"<{len(values)}d", *values)


def repeatability_experiment(task_id: str, agent_id: str, config: Optional[HyperConfig] = None,
                             seed: int = 0, count: int = 4, steps: int = 2000,
                             seeds: Optional[Sequence[int]] = None,
                             clock: str = "virtual") -> RepeatReport:
    """Repeat a run ``count`` times and compare the return sequences byte for byte.

    ``seeds`` overrides the per-run seeds (all equal to ``seed`` by default).
    """
    if clock != "virtual":
        raise ConfigurationError("repeatability needs the virtual clock; wall-clock runs "
                                 "are not reproducible by design")
    seeds = list(seeds) if seeds is not None else [seed] * count
    if len(seeds) < 2:
        raise ConfigurationError("need at least two runs to compare")
    report = RepeatReport(task_id, agent_id, seeds)
    runs = []
    for s in seeds:
        cfg = replace(config, init_seed=s, extra=dict(config.extra)) if config else None
        rec = run_experiment(task_id, agent_id, cfg, env_seed=s, init_seed=s, steps=steps)
        runs.append(rec)
        report.returns.append(rec.returns)
    ref = runs[0]
    for k, rec in enumerate(runs[1:], 1):
        if _return_bytes(rec.returns) == _return_bytes(ref.returns):
            continue
        report.identical = False
        n = min(len(rec.returns), len(ref.returns))
        ep = next((i for i in range(n) if _return_bytes([rec.returns[i]]) !=
                   _return_bytes([ref.returns[i]])), n)
        end = rec.end_steps[ep] if ep < len(rec.end_steps) else rec.total_steps
        report.divergence = {"run": k, "episode": ep, "end_step": end}
        break
    return report
