"""Run logs as newline-delimited JSON.

One file per run::

    {"type": "header", "version": 1, "task_id": ..., "agent_id": ..., "config": {...},
     "env_seed": ..., "init_seed": ..., "device": {...}, "started_at": ...}
    {"type": "episode", "index": 0, "return": ..., "length": ..., "end_step": ...,
     "cause": "time", "success": false, "start_us": ..., "end_us": ...}
    ...
    {"type": "footer", "total_steps": ..., "episodes": ..., "finished_at": ...}

Episodes are appended and flushed as they finish, so a crashed run keeps
everything up to its last episode (it just lacks the footer).
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigurationError, DivergenceError, NoDataError

FORMAT_VERSION = 1


@dataclass(frozen=True)
class EpisodeEntry:
    index: int
    episode_return: float
    length: int
    end_step: int
    cause: str
    success: bool = False
    start_us: int = 0
    end_us: int = 0

    def to_json(self) -> dict:
        d = asdict(self)
        d["return"] = d.pop("episode_return")
        return {"type": "episode", **d}

    @classmethod
    def from_json(cls, d: dict) -> "EpisodeEntry":
        return cls(d["index"], d["return"], d["length"], d["end_step"], d["cause"],
                   d.get("success", False), d.get("start_us", 0), d.get("end_us", 0))


@dataclass
class RunRecord:
    task_id: str
    agent_id: str
    config: Optional[dict]
    env_seed: int
    init_seed: Optional[int]
    device: dict = field(default_factory=dict)
    episodes: list = field(default_factory=list)
    total_steps: int = 0
    started_at: float = 0.0
    finished_at: Optional[float] = None
    meta: dict = field(default_factory=dict)

    @property
    def returns(self) -> list:
        return [e.episode_return for e in self.episodes]

    @property
    def end_steps(self) -> list:
        return [e.end_step for e in self.episodes]

    @property
    def complete(self) -> bool:
        return self.finished_at is not None

    def header(self) -> dict:
        return {"type": "header", "version": FORMAT_VERSION, "task_id": self.task_id,
                "agent_id": self.agent_id, "config": self.config, "env_seed": self.env_seed,
                "init_seed": self.init_seed, "device": self.device,
                "started_at": self.started_at, "meta": self.meta}

    def footer(self) -> dict:
        return {"type": "footer", "total_steps": self.total_steps,
                "episodes": len(self.episodes), "finished_at": self.finished_at}


class RunWriter:
    """Append-only writer; use as a context manager or call :meth:`close`.

    With ``path=None`` the record is only kept in memory.
    """

    def __init__(self, path, record: RunRecord):
        self.path = Path(path) if path is not None else None
        self.record = record
        if not record.started_at:
            record.started_at = time.time()
        self._fh = None
        self._closed = False
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "x", encoding="utf-8")
        self._write(record.header())

    def _write(self, obj: dict) -> None:
        if self._fh is not None:
            self._fh.write(json.dumps(obj, sort_keys=True, allow_nan=False) + "\n")
            self._fh.flush()

    def add_episode(self, episode_return: float, length: int, end_step: int, cause: str,
                    success: bool = False, start_us: int = 0, end_us: int = 0) -> EpisodeEntry:
        if not math.isfinite(episode_return):
            raise DivergenceError(f"non-finite episode return {episode_return!r}")
        entry = EpisodeEntry(len(self.record.episodes), float(episode_return), int(length),
                             int(end_step), cause, bool(success), int(start_us), int(end_us))
        self.record.episodes.append(entry)
        self.record.total_steps = entry.end_step
        self._write(entry.to_json())
        return entry

    def close(self) -> RunRecord:
        if not self._closed:
            self._closed = True
            self.record.finished_at = time.time()
            self._write(self.record.footer())
            if self._fh is not None:
                self._fh.close()
        return self.record

    def abort(self) -> None:
        """Close without a footer: the run did not finish."""
        self._closed = True
        if self._fh is not None:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        else:
            self.abort()


def read_run(path) -> RunRecord:
    path = Path(path)
    record = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            kind = obj.get("type")
            if kind == "header":
                if obj.get("version") != FORMAT_VERSION:
                    raise ConfigurationError(f"{path}: unsupported log version {obj.get('version')}")
                record = RunRecord(obj["task_id"], obj["agent_id"], obj.get("config"),
                                   obj["env_seed"], obj.get("init_seed"), obj.get("device", {}),
                                   started_at=obj.get("started_at", 0.0),
                                   meta=obj.get("meta", {}))
            elif record is None:
                raise ConfigurationError(f"{path}:{lineno}: record before header")
            elif kind == "episode":
                record.episodes.append(EpisodeEntry.from_json(obj))
                record.total_steps = record.episodes[-1].end_step
            elif kind == "footer":
                record.total_steps = obj["total_steps"]
                record.finished_at = obj.get("finished_at")
            else:
                raise ConfigurationError(f"{path}:{lineno}: unknown record type {kind!r}")
    if record is None:
        raise NoDataError(f"{path}: empty run log")
    return record


def read_runs(paths) -> list:
    return [read_run(p) for p in sorted(Path(p) for p in paths)]
