"""Summary metrics over simulated trajectories.

Steady state is read as the mean over the last quarter of the run; the
convergence time is the first instant after which the queue stays inside
a tolerance band around the target for a sustained window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import TimeSeries

#: Queue tolerance band as a fraction of the target, and how long the
#: trajectory must stay inside it to count as converged.
CONVERGENCE_EPS_FRAC = 0.05
CONVERGENCE_HOLD_S = 10.0
SETTLED_FRACTION = 0.25


@dataclass(frozen=True)
class RunMetrics:
    """Settled behavior of one run; ``convergence_time`` is None when the
    queue never holds the band (reported as "did not converge")."""

    settled_q: float
    settled_p: float
    convergence_time: float | None
    bound_gap: float | None = None


def settled_slice(n: int, fraction: float = SETTLED_FRACTION) -> slice:
    """Index slice covering the trailing ``fraction`` of ``n`` samples."""
    start = n - max(1, int(round(n * fraction)))
    return slice(start, n)


def convergence_time(
    ts: TimeSeries,
    q_ref: float,
    eps_frac: float = CONVERGENCE_EPS_FRAC,
    hold: float = CONVERGENCE_HOLD_S,
) -> float | None:
    """First t such that |q - q_ref| <= eps_frac*q_ref holds for ``hold`` seconds."""
    eps = eps_frac * q_ref
    inside = np.abs(ts.q - q_ref) <= eps
    win = max(1, int(round(hold / ts.dt)))
    if inside.shape[0] < win:
        return None
    counts = np.concatenate(([0], np.cumsum(inside)))
    sustained = counts[win:] - counts[:-win] == win
    if not sustained.any():
        return None
    return float(np.argmax(sustained) * ts.dt)


def compute_metrics(ts: TimeSeries, q_ref: float) -> RunMetrics:
    sl = settled_slice(len(ts))
    return RunMetrics(
        settled_q=float(ts.q[sl].mean()),
        settled_p=float(ts.p[sl].mean()),
        convergence_time=convergence_time(ts, q_ref),
    )


def bound_gap(ts_a: TimeSeries, ts_b: TimeSeries) -> float:
    """Max queue disagreement between two runs over their settled windows.

    Used to measure how tightly the two scenario laws bracket each other
    once both have settled; the runs must share the sampling grid.
    """
    if len(ts_a) != len(ts_b) or ts_a.dt != ts_b.dt:
        raise ValueError("bound gap requires runs on the same sampling grid")
    sl = settled_slice(len(ts_a))
    return float(np.abs(ts_a.q[sl] - ts_b.q[sl]).max())
