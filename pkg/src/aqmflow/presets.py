"""Named experiment presets.

Each preset is a set of config-key overrides on top of the built-in
defaults, covering the standard study grid: the five congestion levels,
the untruncated baseline, ECN off, a varying population, RTT and capacity
variations, and the coarse-step case.  Model entries with an explicit
rho carry the values measured for that setup; the plain ``:1`` entries
are the conservative bound.
"""

from __future__ import annotations

from .config import ExperimentConfig, parse_config

PRESETS: dict[str, dict[str, str]] = {
    "fig-pi-n200": {
        "label": "fig-pi-n200",
        "n_flows": "200",
        "model": "mgt, scenario_b:1, scenario_b:1.5318",
        "duration": "150",
    },
    "fig-rem-n200": {
        "label": "fig-rem-n200",
        "n_flows": "200",
        "model": "mgt, scenario_b:1, scenario_b:1.5318",
        "duration": "150",
        "aqm.kind": "rem",
    },
    "fig-raq-n200": {
        "label": "fig-raq-n200",
        "n_flows": "200",
        "model": "mgt, scenario_b:1, scenario_b:1.5318",
        "duration": "150",
        "aqm.kind": "raq",
    },
    "fig-pi-n2000": {
        "label": "fig-pi-n2000",
        "n_flows": "2000",
        "model": "mgt, scenario_a:1, scenario_a:3.9516",
        "duration": "200",
    },
    "fig-rem-n2000": {
        "label": "fig-rem-n2000",
        "n_flows": "2000",
        "model": "mgt, scenario_a:1, scenario_a:3.9516",
        "duration": "200",
        "aqm.kind": "rem",
    },
    "fig-raq-n2000": {
        "label": "fig-raq-n2000",
        "n_flows": "2000",
        "model": "mgt, scenario_a:1, scenario_a:3.9516",
        "duration": "200",
        "aqm.kind": "raq",
    },
    "fig-untruncated-pi-n2000": {
        "label": "fig-untruncated-pi-n2000",
        "n_flows": "2000",
        "model": "mgt_untruncated",
        "duration": "3000",
        "stride": "100",
    },
    "fig-untruncated-rem-n2000": {
        "label": "fig-untruncated-rem-n2000",
        "n_flows": "2000",
        "model": "mgt_untruncated",
        "duration": "1000",
        "stride": "100",
        "aqm.kind": "rem",
    },
    "fig-untruncated-raq-n2000": {
        "label": "fig-untruncated-raq-n2000",
        "n_flows": "2000",
        "model": "mgt_untruncated",
        "duration": "600",
        "stride": "100",
        "aqm.kind": "raq",
    },
    "fig-pi-n500": {
        "label": "fig-pi-n500",
        "model": "mgt, scenario_b:1, scenario_a:1, scenario_b:1.7670, scenario_a:3.7551",
    },
    "fig-pi-n800": {
        "label": "fig-pi-n800",
        "n_flows": "800",
        "model": "mgt, scenario_b:1, scenario_a:1, scenario_b:2.1022, scenario_a:2.7921",
    },
    "fig-pi-n1100": {
        "label": "fig-pi-n1100",
        "n_flows": "1100",
        "model": "mgt, scenario_b:1, scenario_a:1, scenario_b:2.9450, scenario_a:2.8448",
    },
    "ecn-off-n500": {
        "label": "ecn-off-n500",
        "ecn": "off",
        "model": "mgt, scenario_b:1, scenario_b:1.9789",
    },
    "ecn-off-rem-n500": {
        "label": "ecn-off-rem-n500",
        "ecn": "off",
        "model": "mgt, scenario_b:1, scenario_b:1.9789",
        "aqm.kind": "rem",
    },
    "ecn-off-raq-n500": {
        "label": "ecn-off-raq-n500",
        "ecn": "off",
        "model": "mgt, scenario_b:1, scenario_b:1.9789",
        "aqm.kind": "raq",
    },
    "vary-n": {
        "label": "vary-n",
        "n_flows": "300",
        "schedule": "65:+200, 130:-200",
        "model": "mgt, scenario_b:1",
    },
    "vary-n-rem": {
        "label": "vary-n-rem",
        "n_flows": "300",
        "schedule": "65:+200, 130:-200",
        "model": "mgt, scenario_b:1",
        "aqm.kind": "rem",
    },
    "vary-n-raq": {
        "label": "vary-n-raq",
        "n_flows": "300",
        "schedule": "65:+200, 130:-200",
        "model": "mgt, scenario_b:1",
        "aqm.kind": "raq",
    },
    "fig-pi-rtt005": {
        "label": "fig-pi-rtt005",
        "prop_delay": "0.05",
        "model": "mgt, scenario_b:1, scenario_b:2.0107",
    },
    "fig-pi-rtt015": {
        "label": "fig-pi-rtt015",
        "prop_delay": "0.15",
        "model": "mgt, scenario_b:1, scenario_b:1.6984",
    },
    "fig-pi-cap15": {
        "label": "fig-pi-cap15",
        "capacity_mbps": "15",
        "model": "mgt, scenario_b:1, scenario_b:2.0297",
    },
    "fig-pi-cap95": {
        "label": "fig-pi-cap95",
        "capacity_mbps": "95",
        "model": "mgt, scenario_b:1, scenario_b:1.6286",
    },
    "dt-02": {
        "label": "dt-02",
        "model": "mgt, scenario_b:1, scenario_b:1.7670",
        "dt": "0.2",
        "duration": "2000",
        "aqm.kind": "raq",
        "aqm.T": "0.2",
    },
}

PRESET_DESCRIPTIONS: dict[str, str] = {
    "fig-pi-n200": "mild congestion, 200 flows, PI",
    "fig-rem-n200": "mild congestion, 200 flows, REM",
    "fig-raq-n200": "mild congestion, 200 flows, RaQ",
    "fig-pi-n2000": "severe congestion, 2000 flows, PI",
    "fig-rem-n2000": "severe congestion, 2000 flows, REM",
    "fig-raq-n2000": "severe congestion, 2000 flows, RaQ",
    "fig-untruncated-pi-n2000": "untruncated baseline, 2000 flows, PI, long run",
    "fig-untruncated-rem-n2000": "untruncated baseline, 2000 flows, REM",
    "fig-untruncated-raq-n2000": "untruncated baseline, 2000 flows, RaQ",
    "fig-pi-n500": "mild/moderate boundary, 500 flows, PI, both scenario laws",
    "fig-pi-n800": "moderate congestion, 800 flows, PI, both scenario laws",
    "fig-pi-n1100": "moderate/severe boundary, 1100 flows, PI, both scenario laws",
    "ecn-off-n500": "drop mode (ECN off), 500 flows, PI",
    "ecn-off-rem-n500": "drop mode (ECN off), 500 flows, REM",
    "ecn-off-raq-n500": "drop mode (ECN off), 500 flows, RaQ",
    "vary-n": "population steps 300 -> 500 -> 300, PI",
    "vary-n-rem": "population steps 300 -> 500 -> 300, REM",
    "vary-n-raq": "population steps 300 -> 500 -> 300, RaQ",
    "fig-pi-rtt005": "short RTT (prop delay 0.05 s), PI",
    "fig-pi-rtt015": "long RTT (prop delay 0.15 s), PI",
    "fig-pi-cap15": "15 Mb/s bottleneck, PI",
    "fig-pi-cap95": "95 Mb/s bottleneck, PI",
    "dt-02": "coarse step dt = T = 0.2 s, RaQ",
}


def preset_config(name: str) -> ExperimentConfig:
    """Resolve a preset into a validated experiment config."""
    if name not in PRESETS:
        known = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown preset {name!r}; available: {known}")
    return parse_config(preset=PRESETS[name])
