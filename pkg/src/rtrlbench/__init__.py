"""Simulated real-time robot learning benchmark.

Six tasks on simulated UR5, Dynamixel and Create 2 devices, a two-rate
sense-act runtime, four learners (TRPO, PPO, Soft-Q, DDPG), scripted
baselines, random hyper-parameter search and the analysis pipeline.
"""
from .agents import AGENT_IDS, make_agent
from .config import HyperConfig, gamma_from_c, load_configs, save_configs
from .errors import (BenchError, CommandError, ConfigurationError, DivergenceError,
                     InvalidBoundsError, NoDataError, SensorDataError)
from .experiment import TASK_BUDGETS, repeatability_experiment, run_experiment, sweep
from .records import RunRecord, read_run
from .runtime import Clock, CycleConfig, Environment, run_episode
from .stats import average_return, cross_task_correlation, learning_curve, tukey_summary
from .tasks import TASKS, make_task

__version__ = "0.1.0"

__all__ = [
    "AGENT_IDS", "BenchError", "Clock", "CommandError", "ConfigurationError", "CycleConfig",
    "DivergenceError", "Environment", "HyperConfig", "InvalidBoundsError", "NoDataError",
    "TASK_BUDGETS", "RunRecord", "SensorDataError", "TASKS", "average_return",
    "cross_task_correlation", "gamma_from_c", "learning_curve", "load_configs", "make_agent",
    "make_task", "read_run", "repeatability_experiment", "run_experiment", "run_episode",
    "save_configs", "sweep", "tukey_summary",
]
