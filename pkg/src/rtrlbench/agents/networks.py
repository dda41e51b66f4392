"""Tanh MLPs, the Gaussian policy, observation normalization and checkpoints."""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import torch
from torch import nn

from ..errors import ConfigurationError

DTYPE = torch.float64
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class MlpSpec:
    hidden_layers: int
    hidden_size: int
    activation: str = "tanh"

    def __post_init__(self):
        if not 1 <= self.hidden_layers <= 4:
            raise ConfigurationError(f"hidden layers must be in [1, 4], got {self.hidden_layers}")
        if self.hidden_size < 1 or self.hidden_size & (self.hidden_size - 1):
            raise ConfigurationError(f"hidden size must be a power of two, got {self.hidden_size}")
        if self.activation != "tanh":
            raise ConfigurationError("only tanh activations are supported")

    def dims(self, in_dim: int, out_dim: int) -> list:
        return [in_dim] + [self.hidden_size] * self.hidden_layers + [out_dim]

    def weight_count(self, in_dim: int, out_dim: int) -> int:
        d = self.dims(in_dim, out_dim)
        return sum((a + 1) * b for a, b in zip(d[:-1], d[1:]))


def policy_weight_count(spec: MlpSpec, obs_dim: int, act_dim: int) -> int:
    """Mean network plus one log-std per action dimension."""
    return spec.weight_count(obs_dim, act_dim) + act_dim


def mlp(in_dim: int, out_dim: int, spec: MlpSpec, generator: torch.Generator,
        out_gain: float = 1.0) -> nn.Sequential:
    """Tanh MLP with orthogonal weights (gain sqrt(2) hidden, ``out_gain`` last) and zero biases."""
    layers = []
    dims = spec.dims(in_dim, out_dim)
    for i, (a, b) in enumerate(zip(dims[:-1], dims[1:])):
        lin = nn.Linear(a, b, dtype=DTYPE)
        last = i == len(dims) - 2
        with torch.no_grad():
            nn.init.orthogonal_(lin.weight, gain=out_gain if last else math.sqrt(2.0),
                                generator=generator)
            lin.bias.zero_()
        layers.append(lin)
        if not last:
            layers.append(nn.Tanh())
    return nn.Sequential(*layers)


def count_parameters(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


class RunningNorm:
    """Running mean/variance of observations (parallel-moments update)."""

    def __init__(self, dim: int, clip: float = 5.0, eps: float = 1e-8):
        self.mean = np.zeros(dim)
        self.var = np.ones(dim)
        self.count = eps
        self.clip = clip

    def update(self, x) -> None:
        x = np.asarray(x, dtype=np.float64).reshape(-1, self.mean.size)
        n = x.shape[0]
        if n == 0:
            return
        b_mean = x.mean(axis=0)
        b_var = x.var(axis=0)
        delta = b_mean - self.mean
        total = self.count + n
        self.mean = self.mean + delta * n / total
        m2 = self.var * self.count + b_var * n + delta ** 2 * self.count * n / total
        self.var = m2 / total
        self.count = total

    def __call__(self, x) -> np.ndarray:
        z = (np.asarray(x, dtype=np.float64) - self.mean) / np.sqrt(self.var + 1e-8)
        return np.clip(z, -self.clip, self.clip)

    def state(self) -> dict:
        return {"obs_mean": self.mean.copy(), "obs_var": self.var.copy(),
                "obs_count": np.array([self.count])}

    def load(self, state: dict) -> None:
        self.mean = np.asarray(state["obs_mean"], dtype=np.float64).copy()
        self.var = np.asarray(state["obs_var"], dtype=np.float64).copy()
        self.count = float(np.asarray(state["obs_count"]).reshape(-1)[0])


class GaussianPolicy(nn.Module):
    """Diagonal Gaussian with an MLP mean and a state-independent log-std.

    Samples are unbounded; the runtime clips executed actions to the
    ``[-1, 1]`` box while learners keep the raw sample for log-probabilities.
    """

    def __init__(self, obs_dim: int, act_dim: int, spec: MlpSpec,
                 generator: torch.Generator, init_log_std: float = 0.0):
        super().__init__()
        self.mean_net = mlp(obs_dim, act_dim, spec, generator, out_gain=0.01)
        self.log_std = nn.Parameter(torch.full((act_dim,), float(init_log_std), dtype=DTYPE))

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        return self.mean_net(obs)

    def log_prob(self, obs: torch.Tensor, act: torch.Tensor) -> torch.Tensor:
        return gaussian_log_prob(self(obs), self.log_std, act)


def gaussian_log_prob(mean, log_std, act):
    z = (act - mean) * torch.exp(-log_std)
    return -0.5 * (z * z).sum(-1) - log_std.sum() - 0.5 * mean.shape[-1] * LOG_2PI


def gaussian_kl(mean0, log_std0, mean1, log_std1):
    """KL(N0 || N1) per row for diagonal Gaussians."""
    var0 = torch.exp(2 * log_std0)
    var1 = torch.exp(2 * log_std1)
    return (log_std1 - log_std0 + (var0 + (mean0 - mean1) ** 2) / (2 * var1) - 0.5).sum(-1)


def flat_grad(y: torch.Tensor, params, **kw) -> torch.Tensor:
    grads = torch.autograd.grad(y, params, allow_unused=True, **kw)
    return torch.cat([(torch.zeros_like(p) if g is None else g).reshape(-1)
                      for g, p in zip(grads, params)])


def get_flat(params) -> torch.Tensor:
    return torch.cat([p.data.reshape(-1) for p in params])


def set_flat(params, flat: torch.Tensor) -> None:
    i = 0
    for p in params:
        n = p.numel()
        p.data.copy_(flat[i:i + n].view_as(p))
        i += n


@dataclass
class GradCheckReport:
    max_rel_error: float
    tolerance: float
    coordinates: int
    passed: bool


def finite_difference_check(module: nn.Module, loss_fn: Callable[[], torch.Tensor],
                            tolerance: float = 1e-4, h: float = 1e-5,
                            n_coords: Optional[int] = 64,
                            rng: Optional[np.random.Generator] = None) -> GradCheckReport:
    """Compare autograd gradients with central differences on sampled coordinates.

    The relative error of a coordinate is ``|g - fd| / max(1, |g|, |fd|)``,
    so coordinates with tiny gradients are judged on absolute error.
    """
    params = [p for p in module.parameters() if p.requires_grad]
    analytic = flat_grad(loss_fn(), params).detach()
    flat = get_flat(params).clone()
    total = flat.numel()
    if n_coords is None or n_coords >= total:
        coords = np.arange(total)
    else:
        rng = rng or np.random.default_rng(0)
        coords = rng.choice(total, size=n_coords, replace=False)
    worst = 0.0
    with torch.no_grad():
        for c in coords:
            c = int(c)
            bumped = flat.clone()
            bumped[c] += h
            set_flat(params, bumped)
            up = float(loss_fn())
            bumped[c] -= 2 * h
            set_flat(params, bumped)
            down = float(loss_fn())
            fd = (up - down) / (2 * h)
            g = float(analytic[c])
            worst = max(worst, abs(g - fd) / max(1.0, abs(g), abs(fd)))
        set_flat(params, flat)
    return GradCheckReport(worst, tolerance, len(coords), worst <= tolerance)


# Checkpoints -------------------------------------------------------------
# Layout (little-endian):
#   magic  b"RTRLCKPT"
#   u32    version (1)
#   u32    tensor count
#   per tensor:
#     u16 name length, name bytes (utf-8)
#     u8  ndim, u32 x ndim shape
#     f64 x prod(shape) values, row-major
CKPT_MAGIC = b"RTRLCKPT"
CKPT_VERSION = 1


def save_checkpoint(path, tensors: dict) -> None:
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(struct.pack("<II", CKPT_VERSION, len(tensors)))
        for name, value in tensors.items():
            if isinstance(value, torch.Tensor):
                value = value.detach().cpu().numpy()
            arr = np.ascontiguousarray(value, dtype="<f8")
            raw = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.tobytes(order="C"))


def load_checkpoint(path) -> dict:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != CKPT_MAGIC:
        raise ConfigurationError(f"{path} is not a checkpoint")
    version, count = struct.unpack_from("<II", data, 8)
    if version != CKPT_VERSION:
        raise ConfigurationError(f"unsupported checkpoint version {version}")
    pos = 16
    out = {}
    for _ in range(count):
        (n,) = struct.unpack_from("<H", data, pos)
        pos += 2
        name = data[pos:pos + n].decode("utf-8")
        pos += n
        (ndim,) = struct.unpack_from("<B", data, pos)
        pos += 1
        shape = struct.unpack_from(f"<{ndim}I", data, pos)
        pos += 4 * ndim
        size = int(np.prod(shape)) if ndim else 1
        out[name] = np.frombuffer(data, dtype="<f8", count=size, offset=pos).reshape(shape).copy()
        pos += 8 * size
    return out


def module_tensors(prefix: str, module: nn.Module) -> dict:
    return {f"{prefix}.{k}": v for k, v in module.state_dict().items()}


def load_module_tensors(prefix: str, module: nn.Module, tensors: dict) -> None:
    state = {k[len(prefix) + 1:]: torch.as_tensor(v, dtype=DTYPE)
             for k, v in tensors.items() if k.startswith(prefix + ".")}
    module.load_state_dict(state)
