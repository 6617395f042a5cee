"""Optimal sequential attacks on autoregressive forecasters.

The victim publishes forecasts from a linear AR model while the series
itself evolves under linear or nonlinear dynamics.  An attacker adds a
scalar control to each step to steer chosen forecasts toward chosen
targets at minimum effort.  The package solves that control problem
exactly for linear environments (lqr), approximately for nonlinear ones
(ilqr + mpc, greedy), and blind via online least squares (sysid), and
ships the four reference scenarios with a trial harness, statistics,
and file reports (experiments, stats, reporting, cli).
"""

from . import greedy, ilqr, lqr, mpc, sysid
from .core import (
    ArCoefficients,
    AttackPattern,
    AttackProblem,
    CostReport,
    TargetSchedule,
    Trajectory,
    companion_matrix,
    forecast,
    forecast_rows,
    lift_state,
    realized_cost,
    weight_lambda,
)
from .environment import (
    DivergenceError,
    GaussianStream,
    LinearDynamics,
    NoiseModel,
    RationalMapDynamics,
    ThresholdGnpDynamics,
    delayed,
    gnp_regime,
    rollout,
    simulate,
    step,
    zero_controller,
)
from .experiments import (
    ConfigError,
    InsufficientTrialsError,
    Scenario,
    SolverParams,
    SummaryStats,
    TrialResult,
    build_scenario,
    preset_ids,
    run_scenario,
    summarize,
    validate_config,
)
from .ilqr import IlqrConfig
from .reporting import emit
from .stats import TTestResult, paired_t

__version__ = "0.1.0"

__all__ = [
    "ArCoefficients",
    "AttackPattern",
    "AttackProblem",
    "ConfigError",
    "CostReport",
    "DivergenceError",
    "GaussianStream",
    "IlqrConfig",
    "InsufficientTrialsError",
    "LinearDynamics",
    "NoiseModel",
    "RationalMapDynamics",
    "Scenario",
    "SolverParams",
    "SummaryStats",
    "TTestResult",
    "TargetSchedule",
    "Trajectory",
    "TrialResult",
    "build_scenario",
    "companion_matrix",
    "delayed",
    "emit",
    "forecast",
    "forecast_rows",
    "gnp_regime",
    "greedy",
    "ilqr",
    "lift_state",
    "lqr",
    "mpc",
    "paired_t",
    "preset_ids",
    "realized_cost",
    "rollout",
    "run_scenario",
    "simulate",
    "step",
    "summarize",
    "sysid",
    "validate_config",
    "weight_lambda",
    "zero_controller",
]
