"""Hyper-parameter configurations and their on-disk forms.

A configuration stores the discount and trace horizons as positions ``u`` in
``[0, 1]`` along the searched ``c`` range rather than as ``gamma``/``lambda``
themselves. The range's lower end depends on the episode length ``N``, so
the same configuration resolves to different ``gamma``/``lambda`` on tasks
with different ``N`` (this is why one sampled configuration shows different
discount values on different tasks). Explicit ``gamma``/``lam`` values take
precedence, which is how published table rows are loaded.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

import yaml

from .errors import ConfigurationError

ALGORITHMS = ("trpo", "ppo", "softq", "ddpg")
C_LOG_HI = 1.5  # c ranges end at 10**1.5
PPO_CLIP = 0.2
PPO_EPOCHS = 10


def c_log_lo(n_steps: int) -> float:
    return math.log10(10.0 / n_steps)


def c_from_unit(u: float, n_steps: int) -> float:
    lo = c_log_lo(n_steps)
    return 10.0 ** (lo + u * (C_LOG_HI - lo))


def unit_from_c(c: float, n_steps: int) -> float:
    lo = c_log_lo(n_steps)
    return (math.log10(c) - lo) / (C_LOG_HI - lo)


def gamma_from_c(c: float, n_steps: int) -> float:
    """Discount (or trace) parameter for time-scale factor ``c``: 1 - 1/(c N)."""
    if n_steps < 1:
        raise ConfigurationError(f"episode length must be >= 1 step, got {n_steps}")
    if not c * n_steps > 1:
        raise ConfigurationError(f"c*N = {c * n_steps} must exceed 1")
    return 1.0 - 1.0 / (c * n_steps)


def c_from_gamma(gamma: float, n_steps: int) -> float:
    return 1.0 / ((1.0 - gamma) * n_steps)


@dataclass
class HyperConfig:
    algorithm: str
    batch_size: int
    hidden_layers: int
    hidden_size: int
    step_size: Optional[float] = None  # ppo, softq, ddpg
    vf_step_size: Optional[float] = None  # trpo
    delta_kl: Optional[float] = None  # trpo
    opt_batch_size: Optional[int] = None  # ppo
    clip_eps: Optional[float] = None  # ppo
    epochs: Optional[int] = None  # ppo (fixed), softq (searched)
    reward_scale: Optional[float] = None  # softq, ddpg
    sigma: Optional[float] = None  # ddpg exploration
    u_gamma: Optional[float] = None
    u_lambda: Optional[float] = None
    gamma: Optional[float] = None
    lam: Optional[float] = None
    init_seed: int = 0
    extra: dict = field(default_factory=dict)  # implementation knobs outside the search

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm == "ppo":
            if self.clip_eps is None:
                self.clip_eps = PPO_CLIP
            if self.epochs is None:
                self.epochs = PPO_EPOCHS
        self.validate()

    def validate(self) -> None:
        need = {
            "trpo": ("vf_step_size", "delta_kl"),
            "ppo": ("step_size", "opt_batch_size"),
            "softq": ("step_size", "epochs", "reward_scale"),
            "ddpg": ("step_size", "sigma", "reward_scale"),
        }[self.algorithm]
        missing = [name for name in need if getattr(self, name) is None]
        if missing:
            raise ConfigurationError(f"{self.algorithm} config lacks {', '.join(missing)}")
        if self.batch_size < 1 or self.hidden_size < 1 or not 1 <= self.hidden_layers <= 4:
            raise ConfigurationError("batch size, hidden size and layers must be positive "
                                     "(1 to 4 layers)")
        if self.opt_batch_size is not None and self.opt_batch_size > self.batch_size:
            raise ConfigurationError("opt_batch_size exceeds batch_size")
        for name in ("gamma", "lam"):
            v = getattr(self, name)
            if v is not None and not 0.0 < v < 1.0:
                raise ConfigurationError(f"{name} must lie in (0, 1), got {v}")
        for name in ("u_gamma", "u_lambda"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {v}")

    @property
    def uses_lambda(self) -> bool:
        return self.algorithm in ("trpo", "ppo")

    def resolve_gamma(self, n_steps: int) -> float:
        if self.gamma is not None:
            return self.gamma
        if self.u_gamma is None:
            raise ConfigurationError("config sets neither gamma nor u_gamma")
        return gamma_from_c(c_from_unit(self.u_gamma, n_steps), n_steps)

    def resolve_lambda(self, n_steps: int) -> Optional[float]:
        if not self.uses_lambda:
            return None
        if self.lam is not None:
            return self.lam
        if self.u_lambda is None:
            raise ConfigurationError("config sets neither lam nor u_lambda")
        return gamma_from_c(c_from_unit(self.u_lambda, n_steps), n_steps)

    def for_task(self, n_steps: int) -> "HyperConfig":
        """Copy with gamma (and lambda) fixed for an episode of ``n_steps``."""
        return replace(self, gamma=self.resolve_gamma(n_steps),
                       lam=self.resolve_lambda(n_steps), extra=dict(self.extra))

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if v is not None}
        if not d.get("extra"):
            d.pop("extra", None)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "HyperConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)


def save_configs(path, configs, manifest: Optional[dict] = None) -> None:
    doc = {"configs": [c.to_dict() for c in configs]}
    if manifest:
        doc = {"manifest": manifest, **doc}
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)


def load_configs(path) -> list:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    if isinstance(doc, dict) and "configs" in doc:
        items = doc["configs"]
    elif isinstance(doc, dict):
        items = [doc]
    elif isinstance(doc, list):
        items = doc
    else:
        raise ConfigurationError(f"{path}: expected a config mapping or list")
    return [HyperConfig.from_dict(d) for d in items]


def load_manifest(path) -> dict:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return doc.get("manifest", {}) if isinstance(doc, dict) else {}


# Published table rows: "return & batch & ... & layers & sizes".
TABLE_COLUMNS = {
    "trpo": ("batch_size", "vf_step_size", "delta_kl", "gamma", "lam"),
    "ppo": ("batch_size", "step_size", "opt_batch_size", "gamma", "lam"),
    "softq": ("batch_size", "step_size", "epochs", "gamma", "reward_scale"),
    "ddpg": ("batch_size", "step_size", "sigma", "gamma", "reward_scale"),
}
_INT_FIELDS = {"batch_size", "opt_batch_size", "epochs", "hidden_layers", "hidden_size"}


def parse_table_row(algorithm: str, row: str) -> tuple:
    """Parse a results-table row into ``(average_return, HyperConfig)``."""
    cells = [c.strip() for c in row.replace("\\\\", "").split("&")]
    cells = [c for c in cells if c]
    cols = TABLE_COLUMNS[algorithm]
    if len(cells) != len(cols) + 3:
        raise ConfigurationError(
            f"{algorithm} row needs {len(cols) + 3} cells, got {len(cells)}: {row!r}")
    values = {}
    for name, cell in zip(cols + ("hidden_layers", "hidden_size"), cells[1:]):
        values[name] = int(cell) if name in _INT_FIELDS else float(cell)
    return float(cells[0]), HyperConfig(algorithm=algorithm, **values)


def format_table_row(average_return: float, config: HyperConfig) -> str:
    cols = TABLE_COLUMNS[config.algorithm] + ("hidden_layers", "hidden_size")
    cells = [f"{average_return:.2f}"]
    for name in cols:
        v = getattr(config, name)
        if v is None:
            raise ConfigurationError(f"{name} is unset; resolve the config for a task first")
        cells.append(str(int(v)) if name in _INT_FIELDS else f"{v:.5f}")
    return " & ".join(cells)
