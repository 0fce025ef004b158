"""HTTP service exposing simulation, operating-point, stability, and sweeps.

Error mapping: request-shape problems surface as FastAPI's usual 422;
semantically invalid configurations (e.g. dt above the AQM period) are
422 with ``type: config_error``; root-find failures are 500 with
``type: solver_error``.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .. import __version__
from ..analysis import (
    SolverError,
    operating_point,
    rho_from_p0,
)
from ..config import ConfigError, ExperimentConfig
from ..core import ModelKind, ModelSpec
from ..experiment import run_experiment, run_sweep
from ..metrics import RunMetrics
from ..presets import PRESET_DESCRIPTIONS, PRESETS, preset_config
from ..stability import stability_report
from . import schemas as sc


def _metrics_out(metrics: RunMetrics) -> sc.MetricsOut:
    return sc.MetricsOut(
        settled_q=metrics.settled_q,
        settled_p=metrics.settled_p,
        convergence_time=metrics.convergence_time,
        bound_gap=metrics.bound_gap,
    )


def _run_request_to_config(req: sc.RunRequest) -> ExperimentConfig:
    return ExperimentConfig(
        params=sc.to_network(req.network),
        models=tuple(sc.to_model(m) for m in req.models),
        aqm=sc.to_aqm(req.aqm),
        dt=req.dt_s,
        duration=req.duration_s,
        stride=req.stride,
        schedule=tuple((ev.t_s, ev.delta_n) for ev in req.schedule),
        label=req.label,
    )


def _config_to_run_request(cfg: ExperimentConfig) -> sc.RunRequest:
    return sc.RunRequest(
        network=sc.NetworkIn(
            n_flows=cfg.params.n_flows,
            capacity_mbps=cfg.params.capacity * 8.0 * cfg.params.mean_pkt_bytes / 1e6,
            mean_pkt_bytes=cfg.params.mean_pkt_bytes,
            prop_delay_s=cfg.params.prop_delay,
            buffer_pkts=cfg.params.buffer,
            q_ref_pkts=cfg.params.q_ref,
            ecn_on=cfg.params.ecn_on,
        ),
        models=[sc.ModelIn(kind=m.kind.value, rho=m.rho) for m in cfg.models],
        aqm=_aqm_to_in(cfg),
        dt_s=cfg.dt,
        duration_s=cfg.duration,
        schedule=[sc.ScheduleEventIn(t_s=t, delta_n=dn) for t, dn in cfg.schedule],
        stride=cfg.stride,
        label=cfg.label,
    )


def _aqm_to_in(cfg: ExperimentConfig) -> sc.AqmIn:
    aqm = cfg.aqm
    base = sc.AqmIn(kind=aqm.kind, T_s=aqm.T)
    if aqm.kind == "pi":
        return base.model_copy(update={"a": aqm.a, "b": aqm.b})
    if aqm.kind == "rem":
        return base.model_copy(update={"gamma": aqm.gamma, "phi": aqm.phi, "alpha": aqm.alpha})
    return base.model_copy(update={"q_kp": aqm.q_kp, "q_ki": aqm.q_ki, "r_kp": aqm.r_kp})


def create_app() -> FastAPI:
    app = FastAPI(
        title="aqmflow",
        version=__version__,
        description="Fluid-model TCP/AQM simulation and stability analysis service",
    )

    @app.exception_handler(SolverError)
    async def _solver_error(request, exc: SolverError):
        return JSONResponse(
            status_code=500,
            content={"detail": {"type": "solver_error", "message": str(exc)}},
        )

    @app.exception_handler(ConfigError)
    async def _config_error(request, exc: ConfigError):
        return JSONResponse(
            status_code=422,
            content={"detail": {"type": "config_error", "message": str(exc)}},
        )

    @app.exception_handler(ValueError)
    async def _value_error(request, exc: ValueError):
        return JSONResponse(
            status_code=422,
            content={"detail": {"type": "config_error", "message": str(exc)}},
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/presets", response_model=list[sc.PresetOut])
    def presets() -> list[sc.PresetOut]:
        return [
            sc.PresetOut(name=name, description=PRESET_DESCRIPTIONS.get(name, ""))
            for name in sorted(PRESETS)
        ]

    @app.get("/presets/{name}", response_model=sc.RunRequest)
    def preset(name: str) -> sc.RunRequest:
        if name not in PRESETS:
            raise HTTPException(status_code=404, detail=f"unknown preset {name!r}")
        return _config_to_run_request(preset_config(name))

    @app.post("/run", response_model=sc.RunResponse)
    def run(req: sc.RunRequest) -> sc.RunResponse:
        cfg = _run_request_to_config(req)
        results = run_experiment(cfg)
        return sc.RunResponse(
            runs=[
                sc.SimulateResponse(
                    label=res.label,
                    model_kind=res.model.kind.value,
                    rho=res.model.rho,
                    metrics=_metrics_out(res.metrics),
                    csv=res.series.to_csv_text(),
                )
                for res in results
            ]
        )

    @app.post("/simulate", response_model=sc.SimulateResponse)
    def simulate_one(req: sc.SimulateRequest) -> sc.SimulateResponse:
        from ..metrics import compute_metrics
        from ..models import simulate

        params = sc.to_network(req.network)
        model = sc.to_model(req.model)
        start_at = operating_point(params, model) if req.start_at_operating_point else None
        series = simulate(
            params,
            model,
            sc.to_aqm(req.aqm),
            dt=req.dt_s,
            duration=req.duration_s,
            schedule=[(ev.t_s, ev.delta_n) for ev in req.schedule],
            stride=req.stride,
            start_at=start_at,
        )
        metrics = compute_metrics(series, params.q_ref)
        return sc.SimulateResponse(
            label=f"{req.label}__{model.label}",
            model_kind=model.kind.value,
            rho=model.rho,
            metrics=_metrics_out(metrics),
            csv=series.to_csv_text(),
        )

    @app.post("/operating-point", response_model=sc.OperatingPointResponse)
    def operating_points(req: sc.OperatingPointRequest) -> sc.OperatingPointResponse:
        params = sc.to_network(req.network)
        points = []
        for m in req.models:
            model = sc.to_model(m)
            op = operating_point(params, model)
            points.append(
                sc.OperatingPointOut(
                    model_kind=model.kind.value,
                    rho=model.rho,
                    ws0=op.ws0,
                    q0=op.q0,
                    p0=op.p0,
                    r0=op.r0,
                    w_bar=op.w_bar,
                    level=op.level.value,
                    truncation_required=op.truncation_required,
                )
            )
        inversion = None
        if req.measured_p0 is not None:
            rho_a = rho_from_p0(req.measured_p0, params, ModelKind.SCENARIO_A)
            rho_b = rho_from_p0(req.measured_p0, params, ModelKind.SCENARIO_B)
            inversion = sc.InversionOut(
                measured_p0=req.measured_p0,
                rho_scenario_a=rho_a,
                rho_scenario_b=rho_b,
                p0_at_rho_a=operating_point(
                    params, ModelSpec(kind=ModelKind.SCENARIO_A, rho=rho_a)
                ).p0,
                p0_at_rho_b=operating_point(
                    params, ModelSpec(kind=ModelKind.SCENARIO_B, rho=rho_b)
                ).p0,
            )
        return sc.OperatingPointResponse(points=points, inversion=inversion)

    @app.post("/stability", response_model=sc.StabilityResponse)
    def stability(req: sc.StabilityRequest) -> sc.StabilityResponse:
        params = sc.to_network(req.network)
        kind = ModelKind(req.scenario)
        lin, report, op = stability_report(
            params, kind, req.rho, p0=req.p0, pi_a=req.pi_a, pi_b=req.pi_b
        )
        from ..stability import pi_transfer_gains

        k_p, k_i = pi_transfer_gains(req.pi_a, req.pi_b)
        return sc.StabilityResponse(
            scenario=kind.value,
            rho=req.rho,
            p0=op.p0,
            k_p=k_p,
            k_i=k_i,
            linearization=sc.LinearizationOut(
                d_ws=lin.d_ws, d_wsr=lin.d_wsr, d_pr=lin.d_pr, d_qr=lin.d_qr
            ),
            alpha=list(report.alpha),
            beta1=report.beta1,
            beta2=report.beta2,
            stable=report.stable,
        )

    @app.post("/sweep", response_model=sc.SweepResponse)
    def sweep(req: sc.SweepRequest) -> sc.SweepResponse:
        cfg = _run_request_to_config(req.base)
        rows = run_sweep(cfg, req.axis, req.values)
        return sc.SweepResponse(
            axis=req.axis,
            rows=[
                sc.SweepRowOut(
                    value=row.value,
                    label=row.label,
                    w_bar=row.w_bar,
                    p0_theory=row.p0_theory,
                    metrics=_metrics_out(row.metrics) if row.metrics else None,
                    error=row.error,
                )
                for row in rows
            ],
        )

    return app


app = create_app()
