"""aqmflow: fluid-model simulation and analysis of TCP/AQM bottlenecks."""

__version__ = "0.1.0"

from .analysis import (
    CongestionLevel,
    OperatingPoint,
    SolverError,
    classify_congestion,
    operating_point,
    operating_point_ecn_off,
    rho_a_from_rho_b,
    rho_from_p0,
)
from .aqm import (
    AqmConfig,
    PiConfig,
    PiController,
    RaqConfig,
    RaqController,
    RemConfig,
    RemController,
    make_controller,
)
from .config import ConfigError, ExperimentConfig, parse_config
from .core import (
    ModelKind,
    ModelSpec,
    NetworkParams,
    SimState,
    arrival_rate,
    history_capacity,
    mbps_to_pps,
    rtt,
)
from .experiment import RunResult, SweepRow, run_experiment, run_sweep
from .metrics import RunMetrics, bound_gap, compute_metrics, convergence_time
from .models import (
    StepInput,
    TimeSeries,
    continuous_rhs,
    queue_rhs,
    simulate,
    step_mgt,
    step_queue,
    step_scenario_a,
    step_scenario_b,
)
from .presets import PRESETS, preset_config
from .stability import (
    Linearization,
    StabilityReport,
    characteristic_coeffs,
    linearize,
    pi_transfer_gains,
    routh_check,
    stability_report,
)

__all__ = [
    "__version__",
    "CongestionLevel",
    "OperatingPoint",
    "SolverError",
    "classify_congestion",
    "operating_point",
    "operating_point_ecn_off",
    "rho_a_from_rho_b",
    "rho_from_p0",
    "AqmConfig",
    "PiConfig",
    "PiController",
    "RaqConfig",
    "RaqController",
    "RemConfig",
    "RemController",
    "make_controller",
    "pi_transfer_gains",
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "ModelKind",
    "ModelSpec",
    "NetworkParams",
    "SimState",
    "arrival_rate",
    "history_capacity",
    "mbps_to_pps",
    "rtt",
    "RunResult",
    "SweepRow",
    "run_experiment",
    "run_sweep",
    "RunMetrics",
    "bound_gap",
    "compute_metrics",
    "convergence_time",
    "StepInput",
    "TimeSeries",
    "continuous_rhs",
    "queue_rhs",
    "simulate",
    "step_mgt",
    "step_queue",
    "step_scenario_a",
    "step_scenario_b",
    "PRESETS",
    "preset_config",
    "Linearization",
    "StabilityReport",
    "characteristic_coeffs",
    "linearize",
    "routh_check",
    "stability_report",
]
