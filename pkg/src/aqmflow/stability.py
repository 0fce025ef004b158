"""Linearized closed-loop stability under a PI queue controller.

The window law is linearized at the operating point in the four channels
that feed it (own window, delayed window, delayed marking probability,
delayed queue).  Closing the loop through the queue integrator and a PI
controller, with the feedback delay approximated by a first-order lag
1/(1 + s R0), yields a quartic characteristic polynomial whose
Routh-Hurwitz sign conditions decide stability.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analysis import OperatingPoint, SolverError, operating_point
from .core import ModelKind, ModelSpec, NetworkParams


@dataclass(frozen=True)
class Linearization:
    """Partial derivatives of the aggregate-window rate at the operating point.

    d_ws and d_wsr are 1/s sensitivities to the current and delayed window,
    d_pr (packets/s) to the delayed marking probability, d_qr (1/s) to the
    delayed queue.  Marking always shrinks windows, so d_pr < 0.
    """

    d_ws: float
    d_wsr: float
    d_pr: float
    d_qr: float


@dataclass(frozen=True)
class StabilityReport:
    alpha: tuple[float, float, float, float]
    beta1: float
    beta2: float
    stable: bool


def pi_transfer_gains(a: float, b: float) -> tuple[float, float]:
    """Map the incremental PI gains (a, b) to transfer-form (k_p, k_i).

    The incremental update p += a*e - b*e_prev applied every period acts as
    a proportional term b on the error plus an accumulating term (a - b);
    hence k_p = b and k_i = a - b.
    """
    return b, a - b


def linearize(
    op: OperatingPoint,
    rho: float,
    params: NetworkParams,
    kind: ModelKind,
) -> Linearization:
    """Partials of the chosen window law at ``op``."""
    if not kind.is_scenario:
        raise ValueError("linearization is defined for the scenario laws only")
    if not 0.0 < op.p0 < 1.0:
        raise SolverError(f"operating point must have p0 in (0, 1), got {op.p0}")
    n = params.n_flows
    ws0, p0, r0 = op.ws0, op.p0, op.r0
    c = params.capacity
    decay = rho * ws0 * p0 / (2.0 * n * r0)

    if kind is ModelKind.SCENARIO_A:
        d_ws = -decay
        d_wsr = (1.0 - p0) / r0 - decay
        d_pr = -ws0 / r0 - rho * ws0 * ws0 / (2.0 * n * r0)
        d_qr = -ws0 * (1.0 - p0) / (r0 * r0 * c) + rho * ws0 * ws0 * p0 / (2.0 * n * r0 * r0 * c)
    else:
        growth = n * (1.0 - p0) / (r0 * ws0)
        d_ws = -growth - decay
        d_wsr = growth - decay
        d_pr = -n / r0 - rho * ws0 * ws0 / (2.0 * n * r0)
        d_qr = -n * (1.0 - p0) / (r0 * r0 * c) + rho * ws0 * ws0 * p0 / (2.0 * n * r0 * r0 * c)

    return Linearization(d_ws=d_ws, d_wsr=d_wsr, d_pr=d_pr, d_qr=d_qr)


def characteristic_coeffs(
    lin: Linearization,
    op: OperatingPoint,
    params: NetworkParams,
    k_p: float,
    k_i: float,
) -> tuple[float, float, float, float]:
    """Coefficients (a1..a4) of the monic closed-loop quartic."""
    if k_i <= 0:
        raise ValueError(f"k_i must be > 0, got {k_i}")
    r0, ws0 = op.r0, op.ws0
    c = params.capacity
    qdecay = ws0 / (r0 * r0 * c)  # queue self-relaxation rate, 1/s

    a1 = 1.0 / r0 - lin.d_ws + qdecay
    a2 = -(lin.d_ws + lin.d_wsr) / r0 + ws0 * (1.0 - lin.d_ws * r0) / (r0 ** 3 * c)
    a3 = -ws0 * (lin.d_ws + lin.d_wsr) / (r0 ** 3 * c) - (lin.d_qr + lin.d_pr * k_p) / r0 ** 2
    a4 = -lin.d_pr * k_i / r0 ** 2
    return a1, a2, a3, a4


def routh_check(alpha: tuple[float, float, float, float]) -> StabilityReport:
    """Routh-Hurwitz verdict for the monic quartic with coefficients ``alpha``.

    beta1 and beta2 are the first-column Routh entries beyond the
    coefficients themselves; the system is stable iff a1, beta1, beta2 and
    a4 are all strictly positive.
    """
    a1, a2, a3, a4 = alpha
    beta1 = a1 * a2 - a3
    beta2 = a3 * (a1 * a2 - a3) - a1 * a1 * a4
    stable = a1 > 0.0 and beta1 > 0.0 and beta2 > 0.0 and a4 > 0.0
    return StabilityReport(alpha=(a1, a2, a3, a4), beta1=beta1, beta2=beta2, stable=stable)


def stability_report(
    params: NetworkParams,
    kind: ModelKind,
    rho: float,
    p0: float | None = None,
    pi_a: float = 1.822e-5,
    pi_b: float = 1.816e-5,
) -> tuple[Linearization, StabilityReport, OperatingPoint]:
    """One-call pipeline: operating point, linearization, Routh verdict.

    ``p0`` overrides the closed-form equilibrium when a measured value with
    its matching rho should anchor the linearization instead.
    """
    op = operating_point(params, ModelSpec(kind=kind, rho=rho))
    if p0 is not None:
        op = OperatingPoint(
            ws0=op.ws0,
            q0=op.q0,
            p0=p0,
            r0=op.r0,
            w_bar=op.w_bar,
            level=op.level,
            truncation_required=p0 > 1.0,
        )
    lin = linearize(op, rho, params, kind)
    k_p, k_i = pi_transfer_gains(pi_a, pi_b)
    report = routh_check(characteristic_coeffs(lin, op, params, k_p, k_i))
    return lin, report, op
