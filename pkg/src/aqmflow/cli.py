"""Command-line front end.

The CLI is a thin client of the HTTP service: every computation goes
through the service API as JSON.  By default the service app is mounted
in-process (no separate server needed); ``--server URL`` points the same
commands at a remote instance.  Exit codes: 0 success, 2 configuration
error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import asyncio
import os
import sys
from pathlib import Path

import httpx

from .config import ConfigError, ExperimentConfig, parse_config
from .presets import PRESET_DESCRIPTIONS, PRESETS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


class ServiceClient:
    """JSON-over-HTTP client; in-process ASGI transport unless a server is given."""

    def __init__(self, server: str | None = None):
        self.server = server

    def request(self, method: str, path: str, json_body: dict | None = None) -> httpx.Response:
        if self.server:
            with httpx.Client(base_url=self.server, timeout=None) as client:
                return client.request(method, path, json=json_body)

        async def _go() -> httpx.Response:
            from .service.app import app

            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://aqmflow.local", timeout=None
            ) as client:
                return await client.request(method, path, json=json_body)

        return asyncio.run(_go())

    def get(self, path: str) -> httpx.Response:
        return self.request("GET", path)

    def post(self, path: str, json_body: dict) -> httpx.Response:
        return self.request("POST", path, json_body)


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _handle_http_error(resp: httpx.Response) -> int:
    try:
        detail = resp.json().get("detail")
    except Exception:
        detail = resp.text
    if isinstance(detail, dict):
        kind = detail.get("type")
        message = detail.get("message", str(detail))
        if kind == "solver_error":
            return _fail(message, EXIT_SOLVER)
        return _fail(message, EXIT_CONFIG)
    return _fail(str(detail), EXIT_CONFIG)


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    text = ""
    if args.config:
        text = Path(args.config).read_text()
    preset = None
    if getattr(args, "preset", None):
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}", source="preset")
        preset = PRESETS[args.preset]
    overrides = {}
    for item in getattr(args, "set", None) or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}", source="override")
        overrides[key.strip()] = value.strip()
    return parse_config(text, preset=preset, overrides=overrides)


def _config_to_run_payload(cfg: ExperimentConfig) -> dict:
    from .service.app import _config_to_run_request

    return _config_to_run_request(cfg).model_dump()


def _fmt(value, missing: str = "") -> str:
    if value is None:
        return missing
    return f"{value:.6g}"


def _cmd_run(args: argparse.Namespace, client: ServiceClient) -> int:
    cfg = _load_config(args)
    resp = client.post("/run", _config_to_run_payload(cfg))
    if resp.status_code != 200:
        return _handle_http_error(resp)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    runs = resp.json()["runs"]
    metrics_rows = []
    for run in runs:
        csv_path = outdir / f"{run['label']}.csv"
        csv_path.write_text(run["csv"], newline="\n")
        m = run["metrics"]
        metrics_rows.append(
            f"{run['label']},{run['model_kind']},{_fmt(run['rho'])},"
            f"{_fmt(m['settled_q'])},{_fmt(m['settled_p'])},"
            f"{_fmt(m['convergence_time'])},{_fmt(m['bound_gap'])}"
        )
        conv = _fmt(m["convergence_time"], missing="did not converge")
        print(
            f"{run['label']}: settled_q={m['settled_q']:.2f} settled_p={m['settled_p']:.4f} "
            f"convergence={conv} -> {csv_path}"
        )
    metrics_path = outdir / f"{cfg.label}__metrics.csv"
    metrics_path.write_text(
        "label,model,rho,settled_q,settled_p,convergence_time,bound_gap\n"
        + "\n".join(metrics_rows)
        + "\n",
        newline="\n",
    )
    print(f"metrics -> {metrics_path}")
    return EXIT_OK


def _cmd_op(args: argparse.Namespace, client: ServiceClient) -> int:
    cfg = _load_config(args)
    net = _config_to_run_payload(cfg)["network"]
    scenario_rhos: dict[str, float] = {}
    for m in cfg.models:
        if m.kind.is_scenario and m.kind.value not in scenario_rhos:
            scenario_rhos[m.kind.value] = m.rho
    models = [{"kind": "mgt_truncated", "rho": 1.0}]
    models.append({"kind": "scenario_a", "rho": scenario_rhos.get("scenario_a", 1.0)})
    models.append({"kind": "scenario_b", "rho": scenario_rhos.get("scenario_b", 1.0)})
    payload: dict = {"network": net, "models": models}
    if args.measured_p0 is not None:
        payload["measured_p0"] = args.measured_p0
    resp = client.post("/operating-point", payload)
    if resp.status_code != 200:
        return _handle_http_error(resp)
    body = resp.json()

    header = f"{'model':<16} {'rho':>8} {'ws0':>10} {'q0':>8} {'p0':>10} {'r0':>8} {'w_bar':>8}  level"
    print(header)
    print("-" * len(header))
    lines = [header, "-" * len(header)]
    for pt in body["points"]:
        flag = "  [p0 > 1, truncation required]" if pt["truncation_required"] else ""
        line = (
            f"{pt['model_kind']:<16} {pt['rho']:>8.4g} {pt['ws0']:>10.4f} {pt['q0']:>8.1f} "
            f"{pt['p0']:>10.6f} {pt['r0']:>8.5f} {pt['w_bar']:>8.4f}  {pt['level']}{flag}"
        )
        print(line)
        lines.append(line)
    if body.get("inversion"):
        inv = body["inversion"]
        inv_lines = [
            "",
            f"measured p0 = {inv['measured_p0']:.6g}",
            f"  rho (slow-start law)  = {inv['rho_scenario_a']:.6f}  (p0 check {inv['p0_at_rho_a']:.6f})",
            f"  rho (avoidance law)   = {inv['rho_scenario_b']:.6f}  (p0 check {inv['p0_at_rho_b']:.6f})",
        ]
        for line in inv_lines:
            print(line)
        lines.extend(inv_lines)
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        rows = ["model,rho,ws0,q0,p0,r0,w_bar,level,truncation_required"]
        for pt in body["points"]:
            rows.append(
                f"{pt['model_kind']},{_fmt(pt['rho'])},{_fmt(pt['ws0'])},{_fmt(pt['q0'])},"
                f"{_fmt(pt['p0'])},{_fmt(pt['r0'])},{_fmt(pt['w_bar'])},{pt['level']},"
                f"{str(pt['truncation_required']).lower()}"
            )
        path = outdir / f"{cfg.label}__op.csv"
        path.write_text("\n".join(rows) + "\n", newline="\n")
        print(f"\nop table -> {path}")
    return EXIT_OK


def _cmd_stability(args: argparse.Namespace, client: ServiceClient) -> int:
    cfg = _load_config(args)
    net = _config_to_run_payload(cfg)["network"]
    scenarios = [(m.kind.value, m.rho) for m in cfg.models if m.kind.is_scenario]
    if not scenarios:
        scenarios = [("scenario_a", 1.0)]
    seen = set()
    reports = []
    for scenario, rho in scenarios:
        if (scenario, rho) in seen:
            continue
        seen.add((scenario, rho))
        payload = {"network": net, "scenario": scenario, "rho": rho}
        if args.p0 is not None:
            payload["p0"] = args.p0
        resp = client.post("/stability", payload)
        if resp.status_code != 200:
            return _handle_http_error(resp)
        reports.append(resp.json())

    header = (
        f"{'scenario':<12} {'rho':>8} {'p0':>9} {'alpha1':>10} {'alpha2':>10} "
        f"{'alpha3':>10} {'alpha4':>10} {'beta1':>12} {'beta2':>12}  verdict"
    )
    print(header)
    print("-" * len(header))
    rows = ["scenario,rho,p0,alpha1,alpha2,alpha3,alpha4,beta1,beta2,stable"]
    for rep in reports:
        a = rep["alpha"]
        verdict = "stable" if rep["stable"] else "unstable"
        print(
            f"{rep['scenario']:<12} {rep['rho']:>8.4g} {rep['p0']:>9.4f} "
            f"{a[0]:>10.4f} {a[1]:>10.4f} {a[2]:>10.4f} {a[3]:>10.4f} "
            f"{rep['beta1']:>12.4f} {rep['beta2']:>12.5g}  {verdict}"
        )
        rows.append(
            f"{rep['scenario']},{_fmt(rep['rho'])},{_fmt(rep['p0'])},"
            f"{_fmt(a[0])},{_fmt(a[1])},{_fmt(a[2])},{_fmt(a[3])},"
            f"{_fmt(rep['beta1'])},{_fmt(rep['beta2'])},{str(rep['stable']).lower()}"
        )
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / f"{cfg.label}__stability.csv"
        path.write_text("\n".join(rows) + "\n", newline="\n")
        print(f"\nstability table -> {path}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace, client: ServiceClient) -> int:
    cfg = _load_config(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be a comma list of numbers, got {args.values!r}",
                          source="override") from None
    if not values:
        raise ConfigError("--values is empty", source="override")
    payload = {"base": _config_to_run_payload(cfg), "axis": args.axis, "values": values}
    resp = client.post("/sweep", payload)
    if resp.status_code != 200:
        return _handle_http_error(resp)
    body = resp.json()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = ["axis,value,label,w_bar,p0_theory,settled_q,settled_p,convergence_time,bound_gap,error"]
    for row in body["rows"]:
        m = row["metrics"] or {}
        rows.append(
            f"{body['axis']},{_fmt(row['value'])},{row['label']},{_fmt(row['w_bar'])},"
            f"{_fmt(row['p0_theory'])},{_fmt(m.get('settled_q'))},{_fmt(m.get('settled_p'))},"
            f"{_fmt(m.get('convergence_time'))},{_fmt(m.get('bound_gap'))},{row['error'] or ''}"
        )
        status = row["error"] or (
            f"settled_q={m['settled_q']:.2f} settled_p={m['settled_p']:.4f}"
        )
        print(f"{body['axis']}={row['value']:g} {row['label']}: {status}")
    path = outdir / f"{cfg.label}__sweep_{args.axis}.csv"
    path.write_text("\n".join(rows) + "\n", newline="\n")
    print(f"sweep table -> {path}")
    return EXIT_OK


def _cmd_presets(args: argparse.Namespace, client: ServiceClient) -> int:
    resp = client.get("/presets")
    if resp.status_code != 200:
        return _handle_http_error(resp)
    for entry in resp.json():
        print(f"{entry['name']:<28} {entry['description']}")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace, client: ServiceClient) -> int:
    import uvicorn

    uvicorn.run("aqmflow.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aqmflow",
        description="Fluid-model TCP/AQM simulation and analysis",
    )
    parser.add_argument("--server", default=os.environ.get("AQMFLOW_SERVER"),
                        help="remote service URL (default: run in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out_default: str | None = ".") -> None:
        p.add_argument("--config", help="experiment config file")
        p.add_argument("--preset", help="named preset (see 'aqmflow presets')")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        if out_default is not None:
            p.add_argument("--out", default=out_default, help="output directory")
        else:
            p.add_argument("--out", default=None, help="output directory for CSV (optional)")

    p_run = sub.add_parser("run", help="simulate and emit time-series CSV per model")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_op = sub.add_parser("op", help="operating points, classification, rho inversion")
    common(p_op, out_default=None)
    p_op.add_argument("--measured-p0", type=float, default=None,
                      help="invert this measured equilibrium marking probability into rho")
    p_op.set_defaults(func=_cmd_op)

    p_st = sub.add_parser("stability", help="linearized closed-loop stability report")
    common(p_st, out_default=None)
    p_st.add_argument("--p0", type=float, default=None,
                      help="linearize at this measured p0 instead of the closed form")
    p_st.set_defaults(func=_cmd_stability)

    p_sw = sub.add_parser("sweep", help="sweep one axis and tabulate run metrics")
    common(p_sw)
    p_sw.add_argument("--axis", required=True, choices=["n_flows", "capacity", "prop_delay"])
    p_sw.add_argument("--values", required=True,
                      help="comma-separated values (capacity in Mb/s)")
    p_sw.set_defaults(func=_cmd_sweep)

    p_ls = sub.add_parser("presets", help="list available presets")
    p_ls.set_defaults(func=_cmd_presets)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    client = ServiceClient(args.server)
    try:
        return args.func(args, client)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    except FileNotFoundError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    except httpx.HTTPError as exc:
        return _fail(f"service request failed: {exc}", 1)


if __name__ == "__main__":
    sys.exit(main())
