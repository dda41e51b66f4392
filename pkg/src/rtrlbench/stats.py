"""Summary statistics over runs: box-plot summaries, cross-task correlation
and binned learning curves."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as _st

from .errors import ConfigurationError, NoDataError

TUKEY_K = 1.5
DEFAULT_BINS = 20


@dataclass(frozen=True)
class SummaryStats:
    median: float
    q1: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    outliers: tuple

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def tukey_summary(values: Sequence[float], k: float = TUKEY_K) -> SummaryStats:
    """Quartiles (linear interpolation) and whiskers at the last points inside k*IQR."""
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size < 4:
        raise ValueError(f"tukey_summary needs at least 4 values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("values must be finite")
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    lo_fence = q1 - k * (q3 - q1)
    hi_fence = q3 + k * (q3 - q1)
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    outliers = tuple(sorted(float(v) for v in x[(x < lo_fence) | (x > hi_fence)]))
    return SummaryStats(float(med), float(q1), float(q3), float(inside.min()),
                        float(inside.max()), outliers)


def _pearson(x: np.ndarray, y: np.ndarray) -> tuple:
    n = x.size
    dx = x - x.mean()
    dy = y - y.mean()
    den = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if den == 0.0:
        raise ValueError("correlation is undefined for a constant vector")
    r = min(1.0, max(-1.0, float(dx @ dy) / den))
    if n < 3:
        return r, 1.0
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return r, float(2.0 * _st.t.sf(abs(t), n - 2))


def cross_task_correlation(returns_a, returns_b, method: str = "pearson") -> tuple:
    """Correlation of paired per-config returns with its two-sided p-value.

    ``method`` is ``"pearson"`` or ``"spearman"`` (Pearson on average ranks).
    """
    a = np.asarray(returns_a, dtype=np.float64).ravel()
    b = np.asarray(returns_b, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise ValueError("need at least two pairs")
    if method == "spearman":
        a, b = _st.rankdata(a), _st.rankdata(b)
    elif method != "pearson":
        raise ValueError(f"unknown correlation method {method!r}")
    return _pearson(a, b)


def average_return(run) -> float:
    """Mean of every episodic return in a run (RunRecord or a plain sequence)."""
    returns = run.returns if hasattr(run, "returns") else list(run)
    if not returns:
        raise NoDataError("run has no episodes")
    return float(np.mean(returns))


@dataclass(frozen=True)
class LearningCurve:
    edges: np.ndarray  # bin upper edges in steps
    mean: np.ndarray
    stderr: np.ndarray
    filled: np.ndarray  # (runs, bins) True where a bin was carried forward

    def rows(self) -> list:
        return [(int(e), float(m), float(s), bool(f))
                for e, m, s, f in zip(self.edges, self.mean, self.stderr, self.filled.any(0))]


def _binned(returns, end_steps, edges) -> tuple:
    idx = np.searchsorted(edges, np.asarray(end_steps), side="left")
    out = np.full(len(edges), np.nan)
    for b in range(len(edges)):
        sel = [r for r, i in zip(returns, idx) if i == b]
        if sel:
            out[b] = np.mean(sel)
    filled = np.isnan(out)
    if filled.all():
        raise NoDataError("run has no episodes")
    # carry the previous bin forward; leading gaps take the first observed bin
    first = np.flatnonzero(~filled)[0]
    out[:first] = out[first]
    for b in range(first + 1, len(out)):
        if filled[b]:
            out[b] = out[b - 1]
    return out, filled


def learning_curve(runs: Sequence, bin_steps: int | None = None,
                   n_bins: int = DEFAULT_BINS) -> LearningCurve:
    """Across-run mean and standard error of returns binned by episode end step."""
    if len(runs) < 2:
        raise ValueError("learning_curve needs at least two runs")
    tasks = {r.task_id for r in runs}
    if len(tasks) != 1:
        raise ConfigurationError(f"runs mix tasks: {sorted(tasks)}")
    total = max(r.total_steps for r in runs)
    if bin_steps is None:
        bin_steps = max(1, math.ceil(total / n_bins))
    edges = np.arange(bin_steps, total + bin_steps, bin_steps)
    per_run, flags = zip(*(_binned(r.returns, r.end_steps, edges) for r in runs))
    values = np.vstack(per_run)
    stderr = values.std(axis=0, ddof=1) / math.sqrt(len(runs))
    return LearningCurve(edges, values.mean(axis=0), stderr, np.vstack(flags))
