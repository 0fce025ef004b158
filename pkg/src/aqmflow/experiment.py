"""Experiment orchestration: multi-model runs and parameter sweeps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .analysis import OperatingPoint, operating_point
from .config import ExperimentConfig
from .core import ModelKind, ModelSpec, NetworkParams, mbps_to_pps
from .metrics import RunMetrics, bound_gap, compute_metrics
from .models import TimeSeries, simulate

SWEEP_AXES = ("n_flows", "capacity", "prop_delay")

#: Caps how many sweep runs execute concurrently.
THREADS_ENV = "AQMFLOW_THREADS"


@dataclass(frozen=True)
class RunResult:
    label: str
    model: ModelSpec
    series: TimeSeries
    metrics: RunMetrics
    op: OperatingPoint


def run_experiment(cfg: ExperimentConfig) -> list[RunResult]:
    """Simulate every model entry of ``cfg`` on the shared network.

    When the run contains scenario pairs, the i-th slow-start entry and the
    i-th avoidance entry are treated as a bracketing pair and their settled
    queue disagreement is recorded as ``bound_gap`` on both.
    """
    results: list[RunResult] = []
    for model in cfg.models:
        series = simulate(
            cfg.params,
            model,
            cfg.aqm,
            dt=cfg.dt,
            duration=cfg.duration,
            schedule=cfg.schedule,
            stride=cfg.stride,
        )
        metrics = compute_metrics(series, cfg.params.q_ref)
        results.append(
            RunResult(
                label=f"{cfg.label}__{model.label}",
                model=model,
                series=series,
                metrics=metrics,
                op=operating_point(cfg.params, model),
            )
        )

    a_runs = [i for i, r in enumerate(results) if r.model.kind is ModelKind.SCENARIO_A]
    b_runs = [i for i, r in enumerate(results) if r.model.kind is ModelKind.SCENARIO_B]
    for ia, ib in zip(a_runs, b_runs):
        gap = bound_gap(results[ia].series, results[ib].series)
        for i in (ia, ib):
            results[i] = replace(
                results[i], metrics=replace(results[i].metrics, bound_gap=gap)
            )
    return results


@dataclass(frozen=True)
class SweepRow:
    value: float
    label: str
    w_bar: float | None
    p0_theory: float | None
    metrics: RunMetrics | None
    error: str | None = None


def _apply_axis(params: NetworkParams, axis: str, value: float) -> NetworkParams:
    if axis == "n_flows":
        return replace(params, n_flows=int(value))
    if axis == "capacity":
        # sweep values are Mb/s, matching the configuration boundary
        return replace(params, capacity=mbps_to_pps(value, params.mean_pkt_bytes))
    if axis == "prop_delay":
        return replace(params, prop_delay=float(value))
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def run_sweep(
    cfg: ExperimentConfig,
    axis: str,
    values: list[float],
    max_workers: int | None = None,
) -> list[SweepRow]:
    """One row per (value, model): run the experiment with ``axis`` overridden.

    Rows that fail (solver or validation errors) carry the error message and
    the sweep continues.  Runs execute concurrently up to AQMFLOW_THREADS.
    """
    if not values:
        raise ValueError("sweep needs at least one value")
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    if max_workers is None:
        env = os.environ.get(THREADS_ENV)
        max_workers = max(1, int(env)) if env else min(4, os.cpu_count() or 1)

    def one(value: float) -> list[SweepRow]:
        try:
            params = _apply_axis(cfg.params, axis, value)
            sub = ExperimentConfig(
                params=params,
                models=cfg.models,
                aqm=cfg.aqm,
                dt=cfg.dt,
                duration=cfg.duration,
                stride=cfg.stride,
                schedule=cfg.schedule,
                label=f"{cfg.label}__{axis}{value:g}",
            )
            rows = []
            for res in run_experiment(sub):
                rows.append(
                    SweepRow(
                        value=value,
                        label=res.label,
                        w_bar=res.op.w_bar,
                        p0_theory=res.op.p0,
                        metrics=res.metrics,
                    )
                )
            return rows
        except Exception as exc:  # per-row failure, sweep continues
            return [SweepRow(value=value, label=f"{cfg.label}__{axis}{value:g}",
                             w_bar=None, p0_theory=None, metrics=None, error=str(exc))]

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        nested = list(pool.map(one, values))
    return [row for rows in nested for row in rows]
