"""Steady-state analysis: operating points, rho inversion, congestion levels.

The closed-loop equilibrium couples the window law with the queue balance.
With marking (ECN on) the balance pins ws0 = R0*C and every p0 has a closed
form.  With dropping (ECN off) ws0 = R0*C/(1-p0) and p0 must be solved from
the resulting scalar fixed-point equation, which we bracket and bisect.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .core import ModelKind, ModelSpec, NetworkParams, rtt


class SolverError(RuntimeError):
    """A root-find or fixed-point solve failed; inputs are likely inconsistent."""


class CongestionLevel(str, Enum):
    MILD = "mild"
    MODERATE = "moderate"
    SEVERE = "severe"
    MILD_MODERATE = "mild_moderate"
    MODERATE_SEVERE = "moderate_severe"


#: Half-width of the band around w_bar = 1 and w_bar = 2 that is labelled
#: as a boundary case rather than a plain region.
BOUNDARY_BAND = 0.15


@dataclass(frozen=True)
class OperatingPoint:
    """Steady state of the coupled window/queue system.

    w_bar is the mean per-session window ws0 / n_flows and drives the
    congestion-level classification.  truncation_required flags the
    baseline model's p0 > 1 pathology in heavy load.
    """

    ws0: float
    q0: float
    p0: float
    r0: float
    w_bar: float
    level: CongestionLevel
    truncation_required: bool = False


def classify_congestion(w_bar: float, band: float = BOUNDARY_BAND) -> CongestionLevel:
    """Label the congestion level from the mean per-session window.

    Above 2 packets per session the link is mildly congested, below 1 it is
    severely congested, in between moderately.  Within ``band`` of either
    threshold the boundary label is returned instead.
    """
    if w_bar <= 0:
        raise ValueError(f"w_bar must be > 0, got {w_bar}")
    if abs(w_bar - 2.0) <= band:
        return CongestionLevel.MILD_MODERATE
    if abs(w_bar - 1.0) <= band:
        return CongestionLevel.MODERATE_SEVERE
    if w_bar > 2.0:
        return CongestionLevel.MILD
    if w_bar >= 1.0:
        return CongestionLevel.MODERATE
    return CongestionLevel.SEVERE


def p0_closed_form(kind: ModelKind, n: int, rho: float, ws0: float) -> float:
    """Equilibrium marking probability for a given aggregate window ws0."""
    if kind is ModelKind.SCENARIO_A:
        return 2.0 * n / (2.0 * n + rho * ws0)
    if kind is ModelKind.SCENARIO_B:
        return 2.0 * n * n / (2.0 * n * n + rho * ws0 * ws0)
    # baseline: independent of rho, can exceed 1
    return 2.0 * n * n / (ws0 * ws0)


def solve_p0_drop_mode(
    n: int,
    rho: float,
    r0c: float,
    kind: ModelKind,
    tol: float = 0.0,
) -> float:
    """Solve the drop-mode (ECN off) fixed point for p0 by bisection.

    The coupled system is ws0 = r0c / (1 - p0) with the scenario's own p0
    law evaluated at that ws0.  The residual g(p) = p - p0_law(ws0(p)) is
    strictly increasing on (0, 1), so the bracket (0, 1) always contains
    exactly one root.  Bisection runs to floating-point exhaustion
    (``tol=0``) unless a coarser tolerance is requested.
    """
    if rho <= 0:
        raise SolverError(f"rho must be > 0, got {rho}")
    if not kind.is_scenario:
        raise SolverError("drop-mode fixed point is defined for the scenario laws only")

    def residual(p: float) -> float:
        ws0 = r0c / (1.0 - p)
        return p - p0_closed_form(kind, n, rho, ws0)

    lo, hi = 0.0, 1.0 - 1e-15
    if residual(hi) < 0.0:
        raise SolverError("no root in (0, 1): residual negative at the upper bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if tol > 0.0 and hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def operating_point(params: NetworkParams, model: ModelSpec) -> OperatingPoint:
    """Steady state for the given model at the controller target queue.

    q0 is taken as the target queue length: any settled loop built around
    an integrating queue controller ends there, and controllers whose
    equilibrium deviates (rate-priced ones under dropping) are compared
    against this point through run metrics.  The baseline model carries no
    drop-mode correction, so its formulas ignore the ECN flag.
    """
    model.validate_against(params)
    n = params.n_flows
    q0 = params.q_ref
    r0 = rtt(q0, params)
    r0c = r0 * params.capacity

    if params.ecn_on or model.kind.is_mgt:
        ws0 = r0c
        p0 = p0_closed_form(model.kind, n, model.rho, ws0)
    else:
        p0 = solve_p0_drop_mode(n, model.rho, r0c, model.kind)
        ws0 = r0c / (1.0 - p0)

    w_bar = ws0 / n
    return OperatingPoint(
        ws0=ws0,
        q0=q0,
        p0=p0,
        r0=r0,
        w_bar=w_bar,
        level=classify_congestion(w_bar),
        truncation_required=p0 > 1.0,
    )


def operating_point_ecn_off(params: NetworkParams, model: ModelSpec) -> OperatingPoint:
    """Drop-mode operating point, regardless of the ECN flag on ``params``."""
    if not model.kind.is_scenario:
        raise SolverError("drop-mode operating point is defined for the scenario laws only")
    forced = NetworkParams(
        n_flows=params.n_flows,
        capacity=params.capacity,
        prop_delay=params.prop_delay,
        buffer=params.buffer,
        q_ref=params.q_ref,
        ecn_on=False,
        mean_pkt_bytes=params.mean_pkt_bytes,
    )
    return operating_point(forced, model)


def rho_from_p0(
    p0: float,
    params: NetworkParams,
    kind: ModelKind,
    ecn_on: bool | None = None,
) -> float:
    """Invert a measured equilibrium marking probability into rho.

    This is the practical route to rho: measure p0 on the real system,
    invert the matching scenario law.  In drop mode the inversion accounts
    for ws0 = R0*C/(1-p0).
    """
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"p0 must lie in (0, 1), got {p0}")
    if not kind.is_scenario:
        raise ValueError("rho is defined for the scenario laws only")
    if ecn_on is None:
        ecn_on = params.ecn_on
    n = params.n_flows
    r0c = rtt(params.q_ref, params) * params.capacity

    if ecn_on:
        ws0 = r0c
        if kind is ModelKind.SCENARIO_A:
            return 2.0 * n * (1.0 - p0) / (p0 * ws0)
        return 2.0 * n * n * (1.0 - p0) / (p0 * ws0 * ws0)
    if kind is ModelKind.SCENARIO_A:
        return 2.0 * n * (1.0 - p0) ** 2 / (p0 * r0c)
    return (1.0 - p0) ** 3 * 2.0 * n * n / (r0c * r0c * p0)


def rho_a_from_rho_b(rho_b: float, ws0: float, n_flows: int) -> float:
    """The slow-start-law rho that shares p0 with a given avoidance-law rho.

    Scaling by the mean per-session window makes the two closed forms agree
    identically, so paired runs of the two laws settle together.
    """
    if rho_b <= 0:
        raise ValueError(f"rho_b must be > 0, got {rho_b}")
    return (ws0 / n_flows) * rho_b
