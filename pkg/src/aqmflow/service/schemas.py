"""Request/response models for the HTTP service.

These mirror the core dataclasses with wire-friendly field names; the
converters at the bottom build validated core objects from requests.
Capacities cross this boundary in Mb/s and are converted to packets/s
exactly once.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from ..aqm import AqmConfig, PiConfig, RaqConfig, RemConfig
from ..core import ModelKind, ModelSpec, NetworkParams, mbps_to_pps


class NetworkIn(BaseModel):
    n_flows: int = Field(default=500, ge=1)
    capacity_mbps: float = Field(default=45.0, gt=0)
    mean_pkt_bytes: float = Field(default=1000.0, gt=0)
    prop_delay_s: float = Field(default=0.1, gt=0)
    buffer_pkts: float = Field(default=1125.0, gt=0)
    q_ref_pkts: float = Field(default=500.0, gt=0)
    ecn_on: bool = True

    @model_validator(mode="after")
    def _target_fits_buffer(self) -> "NetworkIn":
        if self.q_ref_pkts > self.buffer_pkts:
            raise ValueError("q_ref_pkts must not exceed buffer_pkts")
        return self


class ModelIn(BaseModel):
    kind: Literal["scenario_a", "scenario_b", "mgt_truncated", "mgt_untruncated"]
    rho: float = Field(default=1.0, gt=0)


class AqmIn(BaseModel):
    kind: Literal["pi", "rem", "raq"] = "pi"
    T_s: float = Field(default=0.005, gt=0)
    a: float = Field(default=1.822e-5, ge=0)
    b: float = Field(default=1.816e-5, ge=0)
    gamma: float = Field(default=0.001, ge=0)
    phi: float = Field(default=1.001, gt=1)
    alpha: float = Field(default=0.1, ge=0)
    q_kp: float = Field(default=0.0077, ge=0)
    q_ki: float = Field(default=0.0005, ge=0)
    r_kp: float = Field(default=0.0095, ge=0)


class ScheduleEventIn(BaseModel):
    t_s: float = Field(ge=0)
    delta_n: int


class SimulateRequest(BaseModel):
    network: NetworkIn = NetworkIn()
    model: ModelIn
    aqm: AqmIn = AqmIn()
    dt_s: float = Field(default=5e-4, gt=0)
    duration_s: float = Field(default=200.0, gt=0)
    schedule: list[ScheduleEventIn] = []
    stride: int = Field(default=1, ge=1)
    start_at_operating_point: bool = False
    label: str = "run"


class MetricsOut(BaseModel):
    settled_q: float
    settled_p: float
    convergence_time: Optional[float]
    bound_gap: Optional[float] = None


class SimulateResponse(BaseModel):
    label: str
    model_kind: str
    rho: float
    metrics: MetricsOut
    csv: str


class RunRequest(BaseModel):
    network: NetworkIn = NetworkIn()
    models: list[ModelIn] = Field(min_length=1)
    aqm: AqmIn = AqmIn()
    dt_s: float = Field(default=5e-4, gt=0)
    duration_s: float = Field(default=200.0, gt=0)
    schedule: list[ScheduleEventIn] = []
    stride: int = Field(default=1, ge=1)
    label: str = "run"


class RunResponse(BaseModel):
    runs: list[SimulateResponse]


class OperatingPointRequest(BaseModel):
    network: NetworkIn = NetworkIn()
    models: list[ModelIn] = [
        ModelIn(kind="mgt_truncated"),
        ModelIn(kind="scenario_a"),
        ModelIn(kind="scenario_b"),
    ]
    measured_p0: Optional[float] = Field(default=None, gt=0, lt=1)


class OperatingPointOut(BaseModel):
    model_kind: str
    rho: float
    ws0: float
    q0: float
    p0: float
    r0: float
    w_bar: float
    level: str
    truncation_required: bool


class InversionOut(BaseModel):
    measured_p0: float
    rho_scenario_a: float
    rho_scenario_b: float
    p0_at_rho_a: float
    p0_at_rho_b: float


class OperatingPointResponse(BaseModel):
    points: list[OperatingPointOut]
    inversion: Optional[InversionOut] = None


class StabilityRequest(BaseModel):
    network: NetworkIn = NetworkIn()
    scenario: Literal["scenario_a", "scenario_b"] = "scenario_a"
    rho: float = Field(default=1.0, gt=0)
    p0: Optional[float] = Field(default=None, gt=0, lt=1)
    pi_a: float = Field(default=1.822e-5, gt=0)
    pi_b: float = Field(default=1.816e-5, gt=0)


class LinearizationOut(BaseModel):
    d_ws: float
    d_wsr: float
    d_pr: float
    d_qr: float


class StabilityResponse(BaseModel):
    scenario: str
    rho: float
    p0: float
    k_p: float
    k_i: float
    linearization: LinearizationOut
    alpha: list[float]
    beta1: float
    beta2: float
    stable: bool


class SweepRequest(BaseModel):
    base: RunRequest
    axis: Literal["n_flows", "capacity", "prop_delay"]
    values: list[float] = Field(min_length=1)


class SweepRowOut(BaseModel):
    value: float
    label: str
    w_bar: Optional[float]
    p0_theory: Optional[float]
    metrics: Optional[MetricsOut]
    error: Optional[str] = None


class SweepResponse(BaseModel):
    axis: str
    rows: list[SweepRowOut]


class PresetOut(BaseModel):
    name: str
    description: str


def to_network(net: NetworkIn) -> NetworkParams:
    return NetworkParams(
        n_flows=net.n_flows,
        capacity=mbps_to_pps(net.capacity_mbps, net.mean_pkt_bytes),
        prop_delay=net.prop_delay_s,
        buffer=net.buffer_pkts,
        q_ref=net.q_ref_pkts,
        ecn_on=net.ecn_on,
        mean_pkt_bytes=net.mean_pkt_bytes,
    )


def to_model(model: ModelIn) -> ModelSpec:
    kind = ModelKind(model.kind)
    return ModelSpec(kind=kind, rho=model.rho if kind.is_scenario else 1.0)


def to_aqm(aqm: AqmIn) -> AqmConfig:
    if aqm.kind == "pi":
        return PiConfig(a=aqm.a, b=aqm.b, T=aqm.T_s)
    if aqm.kind == "rem":
        return RemConfig(gamma=aqm.gamma, phi=aqm.phi, alpha=aqm.alpha, T=aqm.T_s)
    return RaqConfig(q_kp=aqm.q_kp, q_ki=aqm.q_ki, r_kp=aqm.r_kp, T=aqm.T_s)
