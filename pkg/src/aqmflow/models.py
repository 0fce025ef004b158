"""Discrete-time fluid integrators for the window and queue dynamics.

The aggregate window evolves under one of the model laws driven by values
read one feedback delay in the past; the queue integrates the mismatch
between the arrival rate and the link capacity.  The public step functions
are literal one-step forms (rate times dt) of the continuous laws exposed
by :func:`continuous_rhs`, so the two agree bit for bit.

The production loop in :func:`simulate` is a numba kernel: explicit Euler
at dt with a ring-buffer delay line, zero-order-hold AQM updates every
sampling period, and optional population-change events.  All arithmetic
is ordered identically to the public step functions so a pure-Python
re-implementation of the loop reproduces the kernel exactly.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np
from numba import njit

from .aqm import AqmConfig, PiConfig, RaqConfig, RemConfig
from .analysis import OperatingPoint
from .core import ModelKind, ModelSpec, NetworkParams, history_capacity

#: Aggregate windows are floored here to keep the avoidance law's 1/ws
#: term finite; one packet in flight total is below any operating point.
WS_FLOOR = 1.0

CSV_HEADER = "t,q,p,ws,r,lambda"


@dataclass(frozen=True)
class StepInput:
    """Values feeding one window step: current window plus delayed reads."""

    ws_now: float
    ws_delayed: float
    p_delayed: float
    q_delayed: float
    r_delayed: float
    dt: float

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")


def _require_positive_rtt(r: float) -> None:
    if r <= 0:
        raise ValueError(f"delayed rtt must be > 0, got {r} (corrupted state)")


def continuous_rhs(
    ws_now: float,
    ws_delayed: float,
    p_delayed: float,
    r_delayed: float,
    params: NetworkParams,
    model: ModelSpec,
) -> float:
    """Instantaneous window rate for ``model``.

    Scenario laws return the aggregate rate in packets/second; the
    baseline laws return the per-session rate (scale by n_flows for the
    aggregate), matching the units of the corresponding step functions.
    """
    _require_positive_rtt(r_delayed)
    n = params.n_flows
    kind = model.kind
    if kind is ModelKind.SCENARIO_A:
        return (
            ws_delayed / r_delayed * (1.0 - p_delayed)
            - model.rho * ws_now * ws_delayed / (2.0 * n * r_delayed) * p_delayed
        )
    if kind is ModelKind.SCENARIO_B:
        if ws_now <= 0:
            raise ValueError(f"ws_now must be > 0 for {kind.value}, got {ws_now}")
        return (
            n * ws_delayed / (r_delayed * ws_now) * (1.0 - p_delayed)
            - model.rho * ws_now * ws_delayed / (2.0 * n * r_delayed) * p_delayed
        )
    p_eff = p_delayed
    if kind is ModelKind.MGT_TRUNCATED:
        p_eff = min(max(p_delayed, 0.0), 1.0)
    return 1.0 / r_delayed - (ws_delayed / n) * (ws_now / n) / (2.0 * r_delayed) * p_eff


def step_scenario_a(inp: StepInput, params: NetworkParams, rho: float) -> float:
    """Aggregate window increment under the slow-start law."""
    spec = ModelSpec(kind=ModelKind.SCENARIO_A, rho=rho)
    return (
        continuous_rhs(inp.ws_now, inp.ws_delayed, inp.p_delayed, inp.r_delayed, params, spec)
        * inp.dt
    )


def step_scenario_b(inp: StepInput, params: NetworkParams, rho: float) -> float:
    """Aggregate window increment under the congestion-avoidance law."""
    spec = ModelSpec(kind=ModelKind.SCENARIO_B, rho=rho)
    return (
        continuous_rhs(inp.ws_now, inp.ws_delayed, inp.p_delayed, inp.r_delayed, params, spec)
        * inp.dt
    )


def step_mgt(inp: StepInput, params: NetworkParams, truncate: bool = True) -> float:
    """Per-session window increment under the baseline law.

    Returns the per-session delta; the simulation loop scales it by
    n_flows to advance the aggregate.  ``truncate`` clamps the delayed
    marking probability into [0, 1] before use.
    """
    kind = ModelKind.MGT_TRUNCATED if truncate else ModelKind.MGT_UNTRUNCATED
    spec = ModelSpec(kind=kind)
    return (
        continuous_rhs(inp.ws_now, inp.ws_delayed, inp.p_delayed, inp.r_delayed, params, spec)
        * inp.dt
    )


def queue_rhs(ws: float, q: float, p: float, params: NetworkParams) -> float:
    """Queue growth rate: arrivals minus capacity, minus drops when ECN is off."""
    r = params.prop_delay + q / params.capacity
    lam = ws / r
    if params.ecn_on:
        return lam - params.capacity
    return lam - params.capacity - p * lam


def step_queue(ws: float, q: float, p: float, params: NetworkParams, dt: float) -> float:
    """Queue increment over dt, clamped so the queue stays within [0, buffer]."""
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    qn = q + queue_rhs(ws, q, p, params) * dt
    if qn < 0.0:
        qn = 0.0
    elif qn > params.buffer:
        qn = params.buffer
    return qn - q


@dataclass
class TimeSeries:
    """Sampled trajectory at fixed spacing ``dt`` (the output spacing)."""

    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    ws: np.ndarray
    r: np.ndarray
    lam: np.ndarray
    dt: float

    def __len__(self) -> int:
        return self.t.shape[0]

    def to_csv(self, dest: TextIO | str) -> None:
        """Write ``t,q,p,ws,r,lambda`` rows at 6 significant digits."""
        cols = np.column_stack([self.t, self.q, self.p, self.ws, self.r, self.lam])
        if isinstance(dest, str):
            with open(dest, "w", newline="\n") as fh:
                self._write(fh, cols)
        else:
            self._write(dest, cols)

    @staticmethod
    def _write(fh: TextIO, cols: np.ndarray) -> None:
        fh.write(CSV_HEADER + "\n")
        np.savetxt(fh, cols, fmt="%.6g", delimiter=",")

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


# --- integration kernel -----------------------------------------------------
_MODEL_CODE = {
    ModelKind.SCENARIO_A: 0,
    ModelKind.SCENARIO_B: 1,
    ModelKind.MGT_TRUNCATED: 2,
    ModelKind.MGT_UNTRUNCATED: 3,
}


@njit(cache=True, nogil=True)
def _sim_kernel(
    n_steps,
    stride,
    dt,
    n0,
    capacity,
    prop_delay,
    buffer,
    q_ref,
    model_code,
    rho,
    ecn_on,
    aqm_code,
    g0,
    g1,
    g2,
    T,
    m_update,
    clamp_p,
    ws_init,
    q_init,
    p_init,
    aux_init,
    ev_steps,
    ev_deltas,
    ring_len,
):
    # Delay line pre-filled with the initial sample so early reads see t=0.
    r_init = prop_delay + q_init / capacity
    ws_h = np.full(ring_len, ws_init)
    p_h = np.full(ring_len, p_init)
    r_h = np.full(ring_len, r_init)

    ws = ws_init
    q = q_init
    p = p_init
    aux = aux_init
    n = float(n0)

    n_out = n_steps // stride + 1
    out_ws = np.empty(n_out)
    out_q = np.empty(n_out)
    out_p = np.empty(n_out)
    k = 0
    ev_i = 0
    n_ev = ev_steps.shape[0]

    for j in range(n_steps + 1):
        while ev_i < n_ev and ev_steps[ev_i] == j:
            dn = ev_deltas[ev_i]
            if dn > 0.0:
                ws = ws + dn  # joiners start with one packet each
            else:
                ws = ws * ((n + dn) / n)  # leavers take their mean window
            n = n + dn
            ev_i += 1

        r = prop_delay + q / capacity
        lam = ws / r

        if j > 0 and j % m_update == 0:
            if aqm_code == 0:
                pn = p + g0 * (q - q_ref) - g1 * (aux - q_ref)
                if clamp_p:
                    if pn < 0.0:
                        pn = 0.0
                    elif pn > 1.0:
                        pn = 1.0
                p = pn
                aux = q
            elif aqm_code == 1:
                aux = aux + g0 * (g2 * (q - q_ref) + (lam - capacity) * T)
                if aux < 0.0:
                    aux = 0.0
                p = 1.0 - g1 ** (-aux)
            else:
                accepted = lam if ecn_on else (1.0 - p) * lam
                e = (q - q_ref) / buffer
                pn = p + g0 * (e - aux) + g1 * e + g2 * (accepted - capacity) / capacity
                if clamp_p:
                    if pn < 0.0:
                        pn = 0.0
                    elif pn > 1.0:
                        pn = 1.0
                p = pn
                aux = e

        s = j % ring_len
        ws_h[s] = ws
        p_h[s] = p
        r_h[s] = r

        if j % stride == 0:
            out_ws[k] = ws
            out_q[k] = q
            out_p[k] = p
            k += 1
        if j == n_steps:
            break

        lag = int(r / dt)
        d = (j - lag) % ring_len
        wsd = ws_h[d]
        pd = p_h[d]
        rd = r_h[d]

        if model_code == 0:
            dws = (
                wsd / rd * (1.0 - pd)
                - rho * ws * wsd / (2.0 * n * rd) * pd
            ) * dt
        elif model_code == 1:
            dws = (
                n * wsd / (rd * ws) * (1.0 - pd)
                - rho * ws * wsd / (2.0 * n * rd) * pd
            ) * dt
        else:
            pe = pd
            if model_code == 2:
                if pe < 0.0:
                    pe = 0.0
                elif pe > 1.0:
                    pe = 1.0
            dws = n * (
                (1.0 / rd - (wsd / n) * (ws / n) / (2.0 * rd) * pe) * dt
            )

        if ecn_on:
            dq = (lam - capacity) * dt
        else:
            dq = (lam - capacity - p * lam) * dt

        ws = ws + dws
        if ws < WS_FLOOR:
            ws = WS_FLOOR
        q = q + dq
        if q < 0.0:
            q = 0.0
        elif q > buffer:
            q = buffer

    return out_ws, out_q, out_p


def _aqm_kernel_args(aqm: AqmConfig) -> tuple[int, float, float, float]:
    if isinstance(aqm, PiConfig):
        return 0, aqm.a, aqm.b, 0.0
    if isinstance(aqm, RemConfig):
        return 1, aqm.gamma, aqm.phi, aqm.alpha
    if isinstance(aqm, RaqConfig):
        return 2, aqm.q_kp, aqm.q_ki, aqm.r_kp
    raise TypeError(f"unknown AQM config {aqm!r}")


def _aux_init(aqm: AqmConfig, params: NetworkParams, q0: float, p0: float) -> float:
    if isinstance(aqm, PiConfig):
        return q0
    if isinstance(aqm, RemConfig):
        if p0 <= 0.0:
            return 0.0
        if p0 >= 1.0:
            raise ValueError(f"REM cannot be seeded at p0 >= 1, got {p0}")
        return -math.log(1.0 - p0) / math.log(aqm.phi)
    return (q0 - params.q_ref) / params.buffer


def simulate(
    params: NetworkParams,
    model: ModelSpec,
    aqm: AqmConfig,
    dt: float = 5e-4,
    duration: float = 200.0,
    schedule: Sequence[tuple[float, int]] | None = None,
    stride: int = 1,
    start_at: OperatingPoint | None = None,
) -> TimeSeries:
    """Run the coupled window/queue loop and return the sampled trajectory.

    Each dt step reads the delayed (ws, p, r) at lag floor(rtt/dt), applies
    the model's window delta and the queue delta, and every sampling
    period T lets the AQM recompute the held marking probability.

    Args:
        schedule: population changes as (time_s, delta_n) pairs; joining
            sessions add one packet each to the aggregate window, leaving
            sessions remove their proportional share.
        stride: emit every stride-th step; must divide the step count.
        start_at: seed state, delay line, and controller at this operating
            point instead of the cold start (ws = n_flows, empty queue).

    Raises:
        ValueError: on dt/T mismatch, bad stride, or out-of-range schedule.
    """
    model.validate_against(params)
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if duration <= 0:
        raise ValueError(f"duration must be > 0, got {duration}")
    if dt > aqm.T * (1 + 1e-12):
        raise ValueError(f"dt={dt} must not exceed the AQM sampling period T={aqm.T}")
    m_update = int(round(aqm.T / dt))
    if abs(m_update * dt - aqm.T) > 1e-9 * aqm.T:
        raise ValueError(f"AQM period T={aqm.T} must be an integer multiple of dt={dt}")

    n_steps = int(round(duration / dt))
    if n_steps < 1:
        raise ValueError("duration shorter than one step")
    if stride < 1 or n_steps % stride != 0:
        raise ValueError(f"stride={stride} must be >= 1 and divide the step count {n_steps}")

    events: list[tuple[int, float]] = []
    if schedule:
        population = params.n_flows
        for t_ev, dn in sorted(schedule, key=lambda e: e[0]):
            if not 0.0 <= t_ev <= duration:
                raise ValueError(f"schedule time {t_ev} outside [0, {duration}]")
            population += dn
            if population < 1:
                raise ValueError(f"schedule drives n_flows below 1 at t={t_ev}")
            events.append((int(round(t_ev / dt)), float(dn)))
    ev_steps = np.array([e[0] for e in events], dtype=np.int64)
    ev_deltas = np.array([e[1] for e in events], dtype=np.float64)

    if start_at is not None:
        ws0, q0, p0 = start_at.ws0, start_at.q0, start_at.p0
    else:
        ws0, q0, p0 = float(params.n_flows), 0.0, 0.0

    aqm_code, g0, g1, g2 = _aqm_kernel_args(aqm)
    clamp_p = model.kind is not ModelKind.MGT_UNTRUNCATED
    aux0 = _aux_init(aqm, params, q0, p0)

    out_ws, out_q, out_p = _sim_kernel(
        n_steps,
        stride,
        dt,
        params.n_flows,
        params.capacity,
        params.prop_delay,
        params.buffer,
        params.q_ref,
        _MODEL_CODE[model.kind],
        model.rho,
        params.ecn_on,
        aqm_code,
        g0,
        g1,
        g2,
        aqm.T,
        m_update,
        clamp_p,
        ws0,
        q0,
        p0,
        aux0,
        ev_steps,
        ev_deltas,
        history_capacity(params, dt),
    )

    sample_dt = stride * dt
    t = np.arange(out_q.shape[0]) * sample_dt
    r = params.prop_delay + out_q / params.capacity
    lam = out_ws / r
    return TimeSeries(t=t, q=out_q, p=out_p, ws=out_ws, r=r, lam=lam, dt=sample_dt)
