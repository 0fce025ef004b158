"""Time-driven AQM controllers with zero-order hold between updates.

Each controller recomputes the marking probability once per sampling
period T from the queue length (and, for the rate-aware schemes, the
aggregate arrival rate); the simulator holds the output constant in
between.  The three laws:

* PI: incremental update p += a*(q - q_ref) - b*(q_prev - q_ref).
* REM: a nonnegative price integrates the weighted queue error plus the
  per-period packet surplus, and p = 1 - phi**(-price).  The price sees
  the offered arrival rate, so persistent drops bias its settled queue.
* RaQ: PI on the buffer-normalized queue error plus a proportional term
  on the relative mismatch between the accepted rate and capacity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .core import NetworkParams


@dataclass(frozen=True)
class PiConfig:
    a: float = 1.822e-5       # 1/packet
    b: float = 1.816e-5       # 1/packet
    T: float = 0.005          # seconds

    kind = "pi"

    def __post_init__(self) -> None:
        _check_common(self.T, self.a, self.b)


@dataclass(frozen=True)
class RemConfig:
    gamma: float = 0.001      # 1/packet
    phi: float = 1.001
    alpha: float = 0.1
    T: float = 0.005

    kind = "rem"

    def __post_init__(self) -> None:
        _check_common(self.T, self.gamma, self.alpha)
        if self.phi <= 1.0:
            raise ValueError(f"phi must be > 1, got {self.phi}")


@dataclass(frozen=True)
class RaqConfig:
    q_kp: float = 0.0077
    q_ki: float = 0.0005
    r_kp: float = 0.0095
    T: float = 0.005

    kind = "raq"

    def __post_init__(self) -> None:
        _check_common(self.T, self.q_kp, self.q_ki, self.r_kp)


AqmConfig = Union[PiConfig, RemConfig, RaqConfig]


def _check_common(T: float, *gains: float) -> None:
    if T <= 0:
        raise ValueError(f"sampling period T must be > 0, got {T}")
    for g in gains:
        if g < 0:
            raise ValueError(f"controller gains must be >= 0, got {g}")


def _clamp01(p: float) -> float:
    if p < 0.0:
        return 0.0
    if p > 1.0:
        return 1.0
    return p


class PiController:
    """Incremental PI on the queue error.

    With ``clamp=False`` the output is used raw (no [0, 1] truncation);
    that mode exists solely to drive the untruncated baseline model.
    """

    def __init__(self, cfg: PiConfig, q_ref: float, q0: float = 0.0, p0: float = 0.0,
                 clamp: bool = True):
        self.cfg = cfg
        self.q_ref = q_ref
        self.p = p0
        self.q_prev = q0
        self.clamp = clamp

    def update(self, q: float, lam: float = 0.0) -> float:
        p = self.p + self.cfg.a * (q - self.q_ref) - self.cfg.b * (self.q_prev - self.q_ref)
        self.p = _clamp01(p) if self.clamp else p
        self.q_prev = q
        return self.p

    def hold(self) -> float:
        """Output between sampling instants: unchanged."""
        return self.p


class RemController:
    """Price-based marking: p = 1 - phi**(-price), price >= 0.

    The price increment per period is gamma * (alpha*(q - q_ref) +
    (lam - C)*T): a queue-error term in packets plus the packet surplus
    that arrived beyond what the link drained in one period.  ``lam`` is
    the offered arrival rate, before any drops.
    """

    def __init__(self, cfg: RemConfig, q_ref: float, capacity: float,
                 price0: float = 0.0):
        self.cfg = cfg
        self.q_ref = q_ref
        self.capacity = capacity
        self.price = price0
        self.p = 1.0 - cfg.phi ** (-price0)

    @classmethod
    def at_equilibrium(cls, cfg: RemConfig, q_ref: float, capacity: float,
                       p0: float) -> "RemController":
        if not 0.0 <= p0 < 1.0:
            raise ValueError(f"REM can only realize p in [0, 1), got {p0}")
        price0 = -math.log(1.0 - p0) / math.log(cfg.phi)
        return cls(cfg, q_ref, capacity, price0=price0)

    def update(self, q: float, lam: float) -> float:
        step = self.cfg.gamma * (
            self.cfg.alpha * (q - self.q_ref) + (lam - self.capacity) * self.cfg.T
        )
        self.price = max(0.0, self.price + step)
        self.p = 1.0 - self.cfg.phi ** (-self.price)
        return self.p

    def hold(self) -> float:
        return self.p


class RaqController:
    """Queue-and-rate law: PI on the normalized queue error plus rate feedback.

    The queue error is normalized by the buffer size so the published gains
    act on a dimensionless signal; the rate term uses the accepted (post
    drop) rate so its equilibrium coincides with the drained link in both
    ECN modes.
    """

    def __init__(self, cfg: RaqConfig, q_ref: float, capacity: float, buffer: float,
                 ecn_on: bool = True, e0: float | None = None, p0: float = 0.0,
                 clamp: bool = True):
        self.cfg = cfg
        self.q_ref = q_ref
        self.capacity = capacity
        self.buffer = buffer
        self.ecn_on = ecn_on
        self.p = p0
        self.e_prev = (0.0 - q_ref) / buffer if e0 is None else e0
        self.clamp = clamp

    @classmethod
    def at_equilibrium(cls, cfg: RaqConfig, q_ref: float, capacity: float, buffer: float,
                       ecn_on: bool, q0: float, p0: float) -> "RaqController":
        return cls(cfg, q_ref, capacity, buffer, ecn_on,
                   e0=(q0 - q_ref) / buffer, p0=p0)

    def update(self, q: float, lam: float) -> float:
        accepted = lam if self.ecn_on else (1.0 - self.p) * lam
        e = (q - self.q_ref) / self.buffer
        p = (
            self.p
            + self.cfg.q_kp * (e - self.e_prev)
            + self.cfg.q_ki * e
            + self.cfg.r_kp * (accepted - self.capacity) / self.capacity
        )
        self.p = _clamp01(p) if self.clamp else p
        self.e_prev = e
        return self.p

    def hold(self) -> float:
        return self.p


def make_controller(
    cfg: AqmConfig,
    params: NetworkParams,
    clamp: bool = True,
    q0: float = 0.0,
    p0: float = 0.0,
    at_equilibrium: bool = False,
):
    """Instantiate the controller for ``cfg``, optionally seeded at (q0, p0)."""
    if isinstance(cfg, PiConfig):
        if at_equilibrium:
            return PiController(cfg, params.q_ref, q0=q0, p0=p0, clamp=clamp)
        return PiController(cfg, params.q_ref, clamp=clamp)
    if isinstance(cfg, RemConfig):
        if at_equilibrium:
            return RemController.at_equilibrium(cfg, params.q_ref, params.capacity, p0)
        return RemController(cfg, params.q_ref, params.capacity)
    if isinstance(cfg, RaqConfig):
        if at_equilibrium:
            return RaqController.at_equilibrium(
                cfg, params.q_ref, params.capacity, params.buffer, params.ecn_on, q0, p0
            )
        return RaqController(cfg, params.q_ref, params.capacity, params.buffer,
                             params.ecn_on, clamp=clamp)
    raise TypeError(f"unknown AQM config {cfg!r}")
