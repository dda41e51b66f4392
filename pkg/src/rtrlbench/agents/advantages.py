"""Generalized advantage estimation."""
from __future__ import annotations

import numpy as np

from .. import _kernels


def gae_advantages(rewards, values, gamma: float, lam: float, ends=None, next_values=None):
    """Advantages and value targets for a batch of steps.

    ``values`` holds V(s_t) for each step. Either pass ``next_values`` (the
    bootstrap V(s_{t+1}), 0 after a terminal state) with ``ends`` marking
    the last step of each segment, or pass ``len(rewards) + 1`` values for a
    single segment whose final entry is the bootstrap value.

    Returns raw advantages; see :func:`normalize_advantages`.
    """
    r = np.asarray(rewards, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    n = r.shape[0]
    if n == 0:
        raise ValueError("empty trajectory")
    if next_values is None:
        if v.shape[0] != n + 1:
            raise ValueError("need len(rewards)+1 values when next_values is omitted")
        next_values = v[1:]
        v = v[:-1]
    nv = np.asarray(next_values, dtype=np.float64)
    if ends is None:
        ends = np.zeros(n, dtype=bool)
        ends[-1] = True
    ends = np.asarray(ends, dtype=bool)
    if not (v.shape[0] == nv.shape[0] == ends.shape[0] == n):
        raise ValueError("rewards, values, next_values and ends differ in length")
    adv = _kernels.gae(r, v, nv, ends, float(gamma), float(lam))
    return adv, adv + v


def normalize_advantages(adv) -> np.ndarray:
    adv = np.asarray(adv, dtype=np.float64)
    std = adv.std()
    return (adv - adv.mean()) / (std if std > 1e-8 else 1.0)
