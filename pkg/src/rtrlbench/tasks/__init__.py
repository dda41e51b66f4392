"""The six benchmark tasks, keyed by stable ids."""
from ..errors import ConfigurationError
from .base import Task, TaskSpec
from .create import (CreateDocker, CreateMover, DockerComponents, DockerRewardTerms,
                     docker_components, docker_raw_reward, docker_reward, mover_reward,
                     wall_proximity)
from .reacher import (DxlReacher, DxlTracker, ReacherGeometry, TrackerTarget, UrReacher2,
                      UrReacher6, dxl_reward, tracker_schedule, ur_reacher_reward)

TASKS = {
    "ur-reacher-2": UrReacher2,
    "ur-reacher-6": UrReacher6,
    "dxl-reacher": DxlReacher,
    "dxl-tracker": DxlTracker,
    "create-mover": CreateMover,
    "create-docker": CreateDocker,
}


def make_task(task_id: str, **options) -> Task:
    try:
        cls = TASKS[task_id]
    except KeyError:
        raise ConfigurationError(
            f"unknown task {task_id!r}; choose from {', '.join(TASKS)}") from None
    return cls(**options)


def generate_target(task_id: str, rng):
    return make_task(task_id).generate_target(rng)


__all__ = [
    "TASKS", "CreateDocker", "CreateMover", "DockerComponents", "DockerRewardTerms",
    "DxlReacher", "DxlTracker", "ReacherGeometry", "Task", "TaskSpec", "TrackerTarget",
    "UrReacher2", "UrReacher6", "docker_components", "docker_raw_reward", "docker_reward",
    "dxl_reward", "generate_target", "make_task", "mover_reward", "tracker_schedule",
    "ur_reacher_reward", "wall_proximity",
]
