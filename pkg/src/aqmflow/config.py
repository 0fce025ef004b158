"""Experiment configuration: flat key-value files with dotted sections.

The format is line oriented: ``key = value`` pairs, ``#`` comments, blank
lines ignored.  Controller settings live under the ``aqm.`` prefix.  A
missing key falls back to the built-in defaults (the standard 45 Mb/s,
500-flow bottleneck).  Parse errors carry the offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .aqm import AqmConfig, PiConfig, RaqConfig, RemConfig
from .core import ModelKind, ModelSpec, NetworkParams, mbps_to_pps


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based, 0 for non-file sources."""

    def __init__(self, message: str, line: int = 0, source: str = "config"):
        self.line = line
        self.source = source
        where = f"{source} line {line}" if line else source
        super().__init__(f"{where}: {message}")


DEFAULTS: dict[str, str] = {
    "label": "run",
    "n_flows": "500",
    "capacity_mbps": "45",
    "mean_pkt_bytes": "1000",
    "prop_delay": "0.1",
    "buffer": "1125",
    "q_ref": "500",
    "ecn": "on",
    "model": "scenario_b",
    "rho": "1",
    "dt": "0.0005",
    "duration": "200",
    "stride": "1",
    "schedule": "",
    "aqm.kind": "pi",
    "aqm.T": "0.005",
    "aqm.a": "1.822e-5",
    "aqm.b": "1.816e-5",
    "aqm.gamma": "0.001",
    "aqm.phi": "1.001",
    "aqm.alpha": "0.1",
    "aqm.q_kp": "0.0077",
    "aqm.q_ki": "0.0005",
    "aqm.r_kp": "0.0095",
}

_MODEL_ALIASES = {
    "scenario_a": ModelKind.SCENARIO_A,
    "a": ModelKind.SCENARIO_A,
    "scenario_b": ModelKind.SCENARIO_B,
    "b": ModelKind.SCENARIO_B,
    "mgt": ModelKind.MGT_TRUNCATED,
    "mgt_truncated": ModelKind.MGT_TRUNCATED,
    "mgt_untruncated": ModelKind.MGT_UNTRUNCATED,
    "untruncated": ModelKind.MGT_UNTRUNCATED,
}

_BOOL = {"on": True, "true": True, "1": True, "yes": True,
         "off": False, "false": False, "0": False, "no": False}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully validated experiment: network, model list, controller, run shape."""

    params: NetworkParams
    models: tuple[ModelSpec, ...]
    aqm: AqmConfig
    dt: float
    duration: float
    stride: int = 1
    schedule: tuple[tuple[float, int], ...] = ()
    label: str = "run"


def parse_config(
    text: str = "",
    preset: dict[str, str] | None = None,
    overrides: dict[str, str] | None = None,
) -> ExperimentConfig:
    """Build a validated :class:`ExperimentConfig`.

    Precedence, lowest first: built-in defaults, ``preset`` entries, keys
    from ``text``, then ``overrides`` (command-line settings).
    """
    entries: dict[str, tuple[str, int, str]] = {
        k: (v, 0, "default") for k, v in DEFAULTS.items()
    }
    if preset:
        for k, v in preset.items():
            _require_known(k, 0, "preset")
            entries[k] = (v, 0, "preset")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        _require_known(key, lineno, "config")
        entries[key] = (value, lineno, "config")
    if overrides:
        for k, v in overrides.items():
            _require_known(k, 0, "override")
            entries[k] = (v, 0, "override")

    get = lambda key: entries[key]  # noqa: E731

    label = get("label")[0] or "run"
    n_flows = _parse_int("n_flows", *get("n_flows"))
    capacity_mbps = _parse_float("capacity_mbps", *get("capacity_mbps"))
    mean_pkt_bytes = _parse_float("mean_pkt_bytes", *get("mean_pkt_bytes"))
    prop_delay = _parse_float("prop_delay", *get("prop_delay"))
    buffer_pkts = _parse_float("buffer", *get("buffer"))
    q_ref = _parse_float("q_ref", *get("q_ref"))
    ecn_raw, ecn_line, ecn_src = get("ecn")
    if ecn_raw.lower() not in _BOOL:
        raise ConfigError(f"ecn must be on/off, got {ecn_raw!r}", ecn_line, ecn_src)
    ecn_on = _BOOL[ecn_raw.lower()]
    dt = _parse_float("dt", *get("dt"))
    duration = _parse_float("duration", *get("duration"))
    stride = _parse_int("stride", *get("stride"))
    rho_default = _parse_float("rho", *get("rho"))

    try:
        params = NetworkParams(
            n_flows=n_flows,
            capacity=mbps_to_pps(capacity_mbps, mean_pkt_bytes),
            prop_delay=prop_delay,
            buffer=buffer_pkts,
            q_ref=q_ref,
            ecn_on=ecn_on,
            mean_pkt_bytes=mean_pkt_bytes,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    models = _parse_models(*get("model"), rho_default=rho_default, params=params)
    aqm = _parse_aqm(entries)

    dt_line, dt_src = get("dt")[1], get("dt")[2]
    if dt > aqm.T * (1 + 1e-12):
        raise ConfigError(
            f"dt={dt} must not exceed the AQM sampling period aqm.T={aqm.T}", dt_line, dt_src
        )
    if abs(round(aqm.T / dt) * dt - aqm.T) > 1e-9 * aqm.T:
        raise ConfigError(
            f"aqm.T={aqm.T} must be an integer multiple of dt={dt}", dt_line, dt_src
        )
    n_steps = int(round(duration / dt))
    if stride < 1 or n_steps % stride != 0:
        raise ConfigError(f"stride={stride} must divide the {n_steps} steps", *get("stride")[1:])

    schedule = _parse_schedule(*get("schedule"), duration=duration, n_flows=n_flows)

    return ExperimentConfig(
        params=params,
        models=models,
        aqm=aqm,
        dt=dt,
        duration=duration,
        stride=stride,
        schedule=schedule,
        label=label,
    )


def _require_known(key: str, line: int, source: str) -> None:
    if key not in DEFAULTS:
        raise ConfigError(f"unknown key {key!r}", line, source)


def _parse_float(name: str, value: str, line: int, source: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{name}: malformed number {value!r}", line, source) from None


def _parse_int(name: str, value: str, line: int, source: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{name}: malformed integer {value!r}", line, source) from None


def _parse_models(
    value: str, line: int, source: str, rho_default: float, params: NetworkParams
) -> tuple[ModelSpec, ...]:
    specs: list[ModelSpec] = []
    if value.strip().lower() == "all":
        entries = ["mgt", f"scenario_a:{rho_default}", f"scenario_b:{rho_default}"]
    else:
        entries = [e.strip() for e in value.split(",") if e.strip()]
    if not entries:
        raise ConfigError("model list is empty", line, source)
    for entry in entries:
        kind_str, _, rho_str = entry.partition(":")
        kind = _MODEL_ALIASES.get(kind_str.strip().lower())
        if kind is None:
            raise ConfigError(f"unknown model {kind_str!r}", line, source)
        rho = rho_default
        if rho_str:
            rho = _parse_float("rho", rho_str.strip(), line, source)
        try:
            spec = ModelSpec(kind=kind, rho=rho if kind.is_scenario else 1.0)
            spec.validate_against(params)
        except ValueError as exc:
            raise ConfigError(str(exc), line, source) from exc
        specs.append(spec)
    return tuple(specs)


def _parse_aqm(entries: dict[str, tuple[str, int, str]]) -> AqmConfig:
    kind_raw, line, source = entries["aqm.kind"]
    kind = kind_raw.strip().lower()
    pick = lambda key: _parse_float(key, *entries[key])  # noqa: E731
    try:
        if kind == "pi":
            return PiConfig(a=pick("aqm.a"), b=pick("aqm.b"), T=pick("aqm.T"))
        if kind == "rem":
            return RemConfig(
                gamma=pick("aqm.gamma"), phi=pick("aqm.phi"),
                alpha=pick("aqm.alpha"), T=pick("aqm.T"),
            )
        if kind == "raq":
            return RaqConfig(
                q_kp=pick("aqm.q_kp"), q_ki=pick("aqm.q_ki"),
                r_kp=pick("aqm.r_kp"), T=pick("aqm.T"),
            )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), line, source) from exc
    raise ConfigError(f"unknown aqm.kind {kind_raw!r}", line, source)


def _parse_schedule(
    value: str, line: int, source: str, duration: float, n_flows: int
) -> tuple[tuple[float, int], ...]:
    value = value.strip()
    if not value:
        return ()
    events: list[tuple[float, int]] = []
    for chunk in value.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        t_str, sep, dn_str = chunk.partition(":")
        if not sep:
            raise ConfigError(f"schedule entry {chunk!r} must look like 'time:+delta'", line, source)
        t_ev = _parse_float("schedule time", t_str.strip(), line, source)
        dn = _parse_int("schedule delta", dn_str.strip(), line, source)
        if not 0.0 <= t_ev <= duration:
            raise ConfigError(
                f"schedule time {t_ev} outside [0, {duration}]", line, source
            )
        events.append((t_ev, dn))
    events.sort(key=lambda e: e[0])
    population = n_flows
    for t_ev, dn in events:
        population += dn
        if population < 1:
            raise ConfigError(f"schedule drives n_flows below 1 at t={t_ev}", line, source)
    return tuple(events)
