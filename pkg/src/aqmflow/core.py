"""Domain types, unit conventions, and shared link kinematics.

Internally every rate is packets/second and every length is packets;
megabit-per-second capacities are converted exactly once at configuration
boundaries via :func:`mbps_to_pps`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class ModelKind(str, Enum):
    """Which window-dynamics law drives the aggregate congestion window."""

    SCENARIO_A = "scenario_a"          # every flow below ssthresh (slow start)
    SCENARIO_B = "scenario_b"          # every flow in congestion avoidance
    MGT_TRUNCATED = "mgt_truncated"    # classic baseline, marking clamped to [0, 1]
    MGT_UNTRUNCATED = "mgt_untruncated"

    @property
    def is_scenario(self) -> bool:
        return self in (ModelKind.SCENARIO_A, ModelKind.SCENARIO_B)

    @property
    def is_mgt(self) -> bool:
        return not self.is_scenario


@dataclass(frozen=True)
class NetworkParams:
    """Bottleneck link and flow-population constants.

    Attributes:
        n_flows: number of long-lived TCP sessions sharing the link.
        capacity: link service rate in packets/second.
        prop_delay: round-trip propagation delay in seconds.
        buffer: queue capacity in packets.
        q_ref: controller target queue length in packets.
        ecn_on: mark packets when True, drop them when False.
        mean_pkt_bytes: used only to convert Mb/s capacities to packets/s.
    """

    n_flows: int = 500
    capacity: float = 5625.0
    prop_delay: float = 0.1
    buffer: float = 1125.0
    q_ref: float = 500.0
    ecn_on: bool = True
    mean_pkt_bytes: float = 1000.0

    def __post_init__(self) -> None:
        if self.n_flows < 1:
            raise ValueError(f"n_flows must be >= 1, got {self.n_flows}")
        if self.capacity <= 0:
            raise ValueError(f"capacity must be > 0, got {self.capacity}")
        if self.prop_delay <= 0:
            raise ValueError(f"prop_delay must be > 0, got {self.prop_delay}")
        if not 0 < self.q_ref <= self.buffer:
            raise ValueError(
                f"q_ref must satisfy 0 < q_ref <= buffer, got q_ref={self.q_ref} buffer={self.buffer}"
            )
        if self.mean_pkt_bytes <= 0:
            raise ValueError("mean_pkt_bytes must be > 0")

    @property
    def max_rtt(self) -> float:
        """RTT with the buffer full; upper bound on any feedback delay."""
        return self.prop_delay + self.buffer / self.capacity


@dataclass(frozen=True)
class ModelSpec:
    """A window-dynamics law plus its dispersion parameter rho.

    rho summarizes how unevenly the per-flow windows are spread: 1 means
    all flows hold equal windows, n_flows means a single flow holds
    everything.  It only affects the two scenario laws.
    """

    kind: ModelKind
    rho: float = 1.0

    def __post_init__(self) -> None:
        if self.kind.is_scenario and self.rho < 1.0:
            raise ValueError(f"rho must be >= 1 for {self.kind.value}, got {self.rho}")

    def validate_against(self, params: NetworkParams) -> None:
        """Enforce rho <= n_flows, which needs the flow population."""
        if self.kind.is_scenario and self.rho > params.n_flows:
            raise ValueError(
                f"rho={self.rho} exceeds n_flows={params.n_flows} for {self.kind.value}"
            )

    @property
    def label(self) -> str:
        if self.kind.is_scenario:
            return f"{self.kind.value}_rho{self.rho:g}"
        return self.kind.value


def rtt(q: float, params: NetworkParams) -> float:
    """Round-trip time at queue length ``q``: propagation plus queueing delay."""
    if q < 0:
        raise ValueError(f"queue length must be >= 0, got {q}")
    return params.prop_delay + q / params.capacity


def arrival_rate(ws: float, r: float) -> float:
    """Aggregate packet arrival rate ws / r in packets/second."""
    if r <= 0:
        raise ValueError(f"rtt must be > 0, got {r}")
    return ws / r


def mbps_to_pps(mbps: float, pkt_bytes: float) -> float:
    """Convert a megabit/second link rate to packets/second."""
    if mbps <= 0 or pkt_bytes <= 0:
        raise ValueError("rate and packet size must be > 0")
    return mbps * 1e6 / (8.0 * pkt_bytes)


def history_capacity(params: NetworkParams, dt: float) -> int:
    """Ring size needed so a delayed read can always reach back one full RTT."""
    return math.ceil(params.max_rtt / dt) + 2


@dataclass
class SimState:
    """Mutable integration state: current values plus a delay-line ring.

    The ring stores one (ws, p, q, r) sample per dt step.  ``delayed(lag)``
    returns the sample ``lag`` steps back; before the simulation has run
    that long it returns the pre-fill (the initial conditions).
    """

    t: float
    ws: float
    q: float
    p: float
    dt: float
    _ring: np.ndarray = field(repr=False)
    _step: int = 0

    @classmethod
    def initial(
        cls,
        params: NetworkParams,
        dt: float,
        ws: float | None = None,
        q: float = 0.0,
        p: float = 0.0,
    ) -> "SimState":
        """State at t=0; defaults to one packet in flight per session and an empty queue."""
        if ws is None:
            ws = float(params.n_flows)
        cap = history_capacity(params, dt)
        ring = np.empty((cap, 4))
        ring[:] = (ws, p, q, rtt(q, params))
        return cls(t=0.0, ws=ws, q=q, p=p, dt=dt, _ring=ring)

    @property
    def capacity(self) -> int:
        return self._ring.shape[0]

    def record(self, r: float) -> None:
        """Store the current sample and advance one dt step."""
        self._ring[self._step % self.capacity] = (self.ws, self.p, self.q, r)
        self._step += 1
        self.t += self.dt

    def delayed(self, lag: int) -> tuple[float, float, float, float]:
        """(ws, p, q, r) from ``lag`` steps before the last recorded sample."""
        if lag < 0 or lag >= self.capacity:
            raise ValueError(f"lag {lag} outside ring capacity {self.capacity}")
        idx = (self._step - 1 - lag) % self.capacity
        ws, p, q, r = self._ring[idx]
        return float(ws), float(p), float(q), float(r)
