"""Packaged scenarios and the trial harness that runs attackers over them.

A scenario bundles one environment, one victim forecaster, an attack
pattern with its targets, and default attacker line-up, trial count, and
seed.  Four ship with the package (S1..S4); anything else arrives as a
JSON config with the same fields.  Configs are validated strictly and
echoed verbatim into the run summary so a run can be reproduced from its
own output.

Trial i of a scenario with seed s draws its process noise from stream
s + i, and (when the forecaster is fitted rather than fixed) its fitting
prelude from stream s + 1_000_000 + i.  Within a trial every attacker
sees the identical noise sequence, which is what makes the paired t-tests
in the summary meaningful.
"""

from __future__ import annotations

import copy
import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import (
    ArCoefficients,
    AttackPattern,
    AttackProblem,
    CostReport,
    TargetSchedule,
    Trajectory,
    companion_matrix,
    lift_state,
    realized_cost,
    weight_lambda,
)
from .environment import (
    Dynamics,
    GaussianStream,
    LinearDynamics,
    NoiseModel,
    RationalMapDynamics,
    ThresholdGnpDynamics,
    delayed,
    rollout,
    simulate,
    zero_controller,
)
from . import greedy, lqr, mpc
from .ilqr import IlqrConfig
from .stats import TTestResult, mean_stderr, paired_t
from .sysid import SysIdController

PRELUDE_SEED_OFFSET = 1_000_000

ATTACKER_NAMES = ("none", "lqr", "greedy", "mpc-ilqr", "sysid", "oracle")
PATTERN_KINDS = ("tomorrow", "last_day", "all")
DYNAMICS_KINDS = ("linear", "gnp_threshold", "rational_map")
NOISE_KINDS = ("none", "gaussian", "gnp_regime")


class ConfigError(ValueError):
    """A scenario config failed validation; the message names the field."""


class InsufficientTrialsError(ValueError):
    """Summary statistics need at least two trials."""


@dataclass(frozen=True)
class SolverParams:
    """Knobs for the iterative attackers.

    lookahead is the receding-horizon window for mpc-ilqr and for the
    black-box attacker's inner plan; fit_window/fit_order size the
    black-box rolling regression; oracle_lookahead is the wider window
    granted to the full-information oracle.
    """

    lookahead: int = 5
    tol: float = 1e-4
    maxiter: int = 1000
    fit_window: int = 15
    fit_order: int = 3
    oracle_lookahead: int = 10

    def to_config(self) -> dict:
        return {
            "lookahead": self.lookahead,
            "tol": self.tol,
            "maxiter": self.maxiter,
            "fit_window": self.fit_window,
            "fit_order": self.fit_order,
            "oracle_lookahead": self.oracle_lookahead,
        }


@dataclass(frozen=True, eq=False)
class Scenario:
    scenario_id: str
    dynamics: Dynamics
    noise: NoiseModel
    forecaster: ArCoefficients | None  # None: fitted per trial from a prelude
    fading_intercept: bool
    prelude_length: int
    prelude_sigma: float
    pattern_kind: str
    target_kind: str
    target_value: float
    lambda_tilde: float
    horizon: int
    x0_history: tuple[float, ...]
    trials: int
    seed: int
    attackers: tuple[str, ...]
    solver: SolverParams
    active_from: int

    @property
    def dim(self) -> int:
        fc_order = 1 if self.forecaster is None else self.forecaster.order
        return max(self.dynamics.order, fc_order)

    def to_config(self) -> dict:
        """Canonical config dict; build_scenario on it reproduces this scenario."""
        if isinstance(self.dynamics, LinearDynamics):
            dyn = {
                "kind": "linear",
                "intercept": self.dynamics.coeffs.intercept,
                "lags": list(self.dynamics.coeffs.lags),
            }
        elif isinstance(self.dynamics, ThresholdGnpDynamics):
            dyn = {"kind": "gnp_threshold"}
        else:
            dyn = {"kind": "rational_map"}
        noise: dict = {"kind": self.noise.kind}
        if self.noise.kind == "gaussian":
            noise["sigma"] = self.noise.sigma
        if self.forecaster is None:
            fc = {
                "kind": "prelude_ar1",
                "length": self.prelude_length,
                "sigma": self.prelude_sigma,
            }
        else:
            fc = {
                "kind": "fixed",
                "intercept": self.forecaster.intercept,
                "lags": list(self.forecaster.lags),
                "fading_intercept": self.fading_intercept,
            }
        target: dict = {"kind": self.target_kind}
        if self.target_kind == "constant":
            target["value"] = self.target_value
        return {
            "id": self.scenario_id,
            "horizon": self.horizon,
            "trials": self.trials,
            "seed": self.seed,
            "lambda_tilde": self.lambda_tilde,
            "x0": list(self.x0_history),
            "dynamics": dyn,
            "noise": noise,
            "forecaster": fc,
            "pattern": self.pattern_kind,
            "target": target,
            "attackers": list(self.attackers),
            "active_from": self.active_from,
            "solver": self.solver.to_config(),
        }


@dataclass(frozen=True, eq=False)
class TrialResult:
    trial: int
    reports: dict[str, CostReport]
    trajectories: dict[str, Trajectory]
    fallbacks: dict[str, tuple[int, ...]]


@dataclass(frozen=True)
class AttackerStats:
    mean_total: float
    stderr_total: float
    mean_tracking: float
    mean_control: float
    trials: int


@dataclass(frozen=True)
class PairedComparison:
    first: str
    second: str
    result: TTestResult


@dataclass(frozen=True, eq=False)
class SummaryStats:
    attackers: dict[str, AttackerStats]
    tests: tuple[PairedComparison, ...]


def parse_attacker(token: str) -> tuple[str, str | None]:
    """Split 'name' or 'name:pattern' into its parts, validating both."""
    name, _, suffix = token.partition(":")
    if name not in ATTACKER_NAMES:
        raise ConfigError(
            f"attackers: unknown attacker {name!r}, expected one of {ATTACKER_NAMES}"
        )
    if not suffix:
        return name, None
    if suffix not in PATTERN_KINDS:
        raise ConfigError(
            f"attackers: unknown pattern override {suffix!r} in {token!r}"
        )
    return name, suffix


def _require(config: Mapping, key: str, kind, what: str):
    if key not in config:
        raise ConfigError(f"{what}: missing required field {key!r}")
    value = config[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{what}: field {key!r} must be a number")
        return float(value)
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{what}: field {key!r} must be an integer")
        return value
    if not isinstance(value, kind):
        raise ConfigError(f"{what}: field {key!r} has the wrong type")
    return value


def _number_list(config: Mapping, key: str, what: str) -> list[float]:
    value = _require(config, key, (list, tuple), what)
    if not value or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(f"{what}: field {key!r} must be a non-empty number list")
    return [float(v) for v in value]


_TOP_LEVEL_KEYS = {
    "id", "horizon", "trials", "seed", "lambda_tilde", "x0", "dynamics",
    "noise", "forecaster", "pattern", "target", "attackers", "active_from",
    "solver",
}


def validate_config(config: Mapping) -> dict:
    """Check a scenario config and return it in canonical form.

    Raises ConfigError with the offending field in the message.  Optional
    fields (active_from, solver and its entries) are filled with defaults
    so the returned dict is fully explicit.
    """
    if not isinstance(config, Mapping):
        raise ConfigError("config: expected a JSON object")
    unknown = set(config) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"config: unknown fields {sorted(unknown)}")

    out: dict = {}
    out["id"] = _require(config, "id", str, "config")
    horizon = _require(config, "horizon", int, "config")
    if horizon < 2:
        raise ConfigError("horizon: must be at least 2")
    out["horizon"] = horizon
    trials = _require(config, "trials", int, "config")
    if trials < 1:
        raise ConfigError("trials: must be at least 1")
    out["trials"] = trials
    out["seed"] = _require(config, "seed", int, "config")
    lt = _require(config, "lambda_tilde", float, "config")
    if not lt > 0.0:
        raise ConfigError("lambda_tilde: must be positive")
    out["lambda_tilde"] = lt
    out["x0"] = _number_list(config, "x0", "config")

    dyn = _require(config, "dynamics", Mapping, "config")
    kind = _require(dyn, "kind", str, "dynamics")
    if kind not in DYNAMICS_KINDS:
        raise ConfigError(f"dynamics: unknown kind {kind!r}")
    if kind == "linear":
        out["dynamics"] = {
            "kind": "linear",
            "intercept": _require(dyn, "intercept", float, "dynamics"),
            "lags": _number_list(dyn, "lags", "dynamics"),
        }
    else:
        if set(dyn) - {"kind"}:
            raise ConfigError(f"dynamics: kind {kind!r} takes no extra fields")
        out["dynamics"] = {"kind": kind}

    noise = _require(config, "noise", Mapping, "config")
    nkind = _require(noise, "kind", str, "noise")
    if nkind not in NOISE_KINDS:
        raise ConfigError(f"noise: unknown kind {nkind!r}")
    if nkind == "gaussian":
        sigma = _require(noise, "sigma", float, "noise")
        if sigma < 0.0:
            raise ConfigError("noise: field 'sigma' must be non-negative")
        out["noise"] = {"kind": "gaussian", "sigma": sigma}
    else:
        if set(noise) - {"kind"}:
            raise ConfigError(f"noise: kind {nkind!r} takes no extra fields")
        if nkind == "gnp_regime" and kind != "gnp_threshold":
            raise ConfigError(
                "noise: kind 'gnp_regime' requires gnp_threshold dynamics"
            )
        out["noise"] = {"kind": nkind}

    fc = _require(config, "forecaster", Mapping, "config")
    fkind = _require(fc, "kind", str, "forecaster")
    if fkind == "fixed":
        out["forecaster"] = {
            "kind": "fixed",
            "intercept": _require(fc, "intercept", float, "forecaster"),
            "lags": _number_list(fc, "lags", "forecaster"),
            "fading_intercept": bool(fc.get("fading_intercept", False)),
        }
    elif fkind == "prelude_ar1":
        length = _require(fc, "length", int, "forecaster")
        if length < 2:
            raise ConfigError("forecaster: field 'length' must be at least 2")
        psigma = _require(fc, "sigma", float, "forecaster")
        if psigma < 0.0:
            raise ConfigError("forecaster: field 'sigma' must be non-negative")
        out["forecaster"] = {"kind": "prelude_ar1", "length": length, "sigma": psigma}
    else:
        raise ConfigError(f"forecaster: unknown kind {fkind!r}")

    pattern = _require(config, "pattern", str, "config")
    if pattern not in PATTERN_KINDS:
        raise ConfigError(f"pattern: unknown kind {pattern!r}")
    out["pattern"] = pattern

    target = _require(config, "target", Mapping, "config")
    tkind = _require(target, "kind", str, "target")
    if tkind == "constant":
        out["target"] = {"kind": "constant", "value": _require(target, "value", float, "target")}
    elif tkind == "half_noise_free":
        if set(target) - {"kind"}:
            raise ConfigError("target: kind 'half_noise_free' takes no extra fields")
        out["target"] = {"kind": "half_noise_free"}
    else:
        raise ConfigError(f"target: unknown kind {tkind!r}")

    raw_attackers = _require(config, "attackers", (list, tuple), "config")
    if not raw_attackers:
        raise ConfigError("attackers: must list at least one attacker")
    tokens = []
    for token in raw_attackers:
        if not isinstance(token, str):
            raise ConfigError("attackers: entries must be strings")
        parse_attacker(token)
        tokens.append(token)
    if len(set(tokens)) != len(tokens):
        raise ConfigError("attackers: duplicate entries")
    out["attackers"] = tokens

    active_from = config.get("active_from", 0)
    if not isinstance(active_from, int) or isinstance(active_from, bool) or active_from < 0:
        raise ConfigError("active_from: must be a non-negative integer")
    if active_from >= horizon - 1:
        raise ConfigError("active_from: leaves no decision step before the horizon")
    out["active_from"] = active_from

    solver_cfg = config.get("solver", {})
    if not isinstance(solver_cfg, Mapping):
        raise ConfigError("solver: expected a JSON object")
    defaults = SolverParams().to_config()
    unknown = set(solver_cfg) - set(defaults)
    if unknown:
        raise ConfigError(f"solver: unknown fields {sorted(unknown)}")
    merged = dict(defaults)
    merged.update(solver_cfg)
    for key in ("lookahead", "maxiter", "fit_window", "fit_order", "oracle_lookahead"):
        if not isinstance(merged[key], int) or isinstance(merged[key], bool) or merged[key] < 1:
            raise ConfigError(f"solver: field {key!r} must be a positive integer")
    tol = merged["tol"]
    if not isinstance(tol, (int, float)) or isinstance(tol, bool) or not tol > 0:
        raise ConfigError("solver: field 'tol' must be positive")
    merged["tol"] = float(tol)
    out["solver"] = merged

    _cross_validate(out)
    return out


def _cross_validate(config: dict) -> None:
    """Consistency checks that span fields."""
    env_order = (
        len(config["dynamics"]["lags"])
        if config["dynamics"]["kind"] == "linear"
        else 2 if config["dynamics"]["kind"] == "gnp_threshold" else 1
    )
    fc = config["forecaster"]
    fc_order = len(fc["lags"]) if fc["kind"] == "fixed" else 1
    dim = max(env_order, fc_order)
    if len(config["x0"]) != dim:
        raise ConfigError(
            f"x0: expected {dim} values (max of dynamics order {env_order} "
            f"and forecaster order {fc_order}), got {len(config['x0'])}"
        )
    solver = config["solver"]
    passive = solver["fit_window"] + solver["fit_order"] - 1
    for token in config["attackers"]:
        name, _ = parse_attacker(token)
        if name == "lqr" and config["dynamics"]["kind"] != "linear":
            raise ConfigError(
                "attackers: 'lqr' needs linear dynamics; use mpc-ilqr or greedy"
            )
        if name == "sysid":
            if config["active_from"] != passive:
                raise ConfigError(
                    f"active_from: must equal fit_window + fit_order - 1 = {passive} "
                    "when the sysid attacker runs"
                )
            if config["horizon"] <= passive:
                raise ConfigError("horizon: ends during the sysid passive phase")


DEFAULT_SEED = 20260823

_PRESETS: dict[str, dict] = {
    "S1": {
        "id": "S1-patterns",
        "horizon": 10,
        "trials": 5,
        "seed": DEFAULT_SEED,
        "lambda_tilde": 0.1,
        "x0": [0.0],
        "dynamics": {"kind": "linear", "intercept": 1.0, "lags": [0.5]},
        "noise": {"kind": "gaussian", "sigma": 0.1},
        "forecaster": {"kind": "fixed", "intercept": 0.9, "lags": [0.6]},
        "pattern": "tomorrow",
        "target": {"kind": "constant", "value": 1.0},
        "attackers": ["none", "lqr:tomorrow", "lqr:last_day", "lqr:all"],
    },
    "S2": {
        "id": "S2-lqr-vs-greedy",
        "horizon": 15,
        "trials": 50,
        "seed": DEFAULT_SEED,
        "lambda_tilde": 0.1,
        "x0": [10.0, 0.0, 0.0],
        "dynamics": {"kind": "linear", "intercept": 0.0, "lags": [0.4, -0.3, -0.7]},
        "noise": {"kind": "gaussian", "sigma": 0.1},
        "forecaster": {"kind": "fixed", "intercept": 0.0, "lags": [0.41, -0.29, -0.68]},
        "pattern": "tomorrow",
        "target": {"kind": "half_noise_free"},
        "attackers": ["none", "lqr", "greedy"],
    },
    "S3": {
        "id": "S3-gnp",
        "horizon": 10,
        "trials": 50,
        "seed": DEFAULT_SEED,
        "lambda_tilde": 0.001,
        "x0": [0.0065, 0.0],
        "dynamics": {"kind": "gnp_threshold"},
        "noise": {"kind": "gnp_regime"},
        "forecaster": {
            "kind": "fixed",
            "intercept": 0.0041,
            "lags": [0.33, 0.13],
            "fading_intercept": True,
        },
        "pattern": "last_day",
        "target": {"kind": "constant", "value": 0.01},
        "attackers": ["none", "mpc-ilqr", "greedy"],
        "solver": {"lookahead": 5, "tol": 1e-4, "maxiter": 1000},
    },
    "S4": {
        "id": "S4-sysid",
        "horizon": 50,
        "trials": 100,
        "seed": DEFAULT_SEED,
        "lambda_tilde": 0.01,
        "x0": [3.0],
        "dynamics": {"kind": "rational_map"},
        "noise": {"kind": "gaussian", "sigma": 0.1},
        "forecaster": {"kind": "prelude_ar1", "length": 50, "sigma": 0.1},
        "pattern": "tomorrow",
        "target": {"kind": "constant", "value": 2.0},
        "attackers": ["sysid", "oracle"],
        "active_from": 17,
        "solver": {
            "lookahead": 5,
            "tol": 1e-4,
            "maxiter": 1000,
            "fit_window": 15,
            "fit_order": 3,
            "oracle_lookahead": 10,
        },
    },
}

_ALIASES = {
    "S1-patterns": "S1",
    "S2-lqr-vs-greedy": "S2",
    "S3-gnp": "S3",
    "S4-sysid": "S4",
}


def preset_ids() -> tuple[str, ...]:
    return tuple(_PRESETS)


def preset_config(scenario_id: str) -> dict:
    key = _ALIASES.get(scenario_id, scenario_id)
    if key not in _PRESETS:
        raise ConfigError(
            f"id: unknown scenario {scenario_id!r}; known ids are {preset_ids()}"
        )
    return copy.deepcopy(_PRESETS[key])


def build_scenario(spec: str | Mapping) -> Scenario:
    """Scenario from a preset id ('S1'..'S4') or a full config mapping."""
    config = validate_config(preset_config(spec) if isinstance(spec, str) else spec)

    dyn_cfg = config["dynamics"]
    if dyn_cfg["kind"] == "linear":
        dynamics: Dynamics = LinearDynamics(
            ArCoefficients(dyn_cfg["intercept"], tuple(dyn_cfg["lags"]))
        )
    elif dyn_cfg["kind"] == "gnp_threshold":
        dynamics = ThresholdGnpDynamics()
    else:
        dynamics = RationalMapDynamics()

    noise_cfg = config["noise"]
    noise = NoiseModel(
        noise_cfg["kind"], noise_cfg.get("sigma", 0.0), config["seed"]
    )

    fc_cfg = config["forecaster"]
    if fc_cfg["kind"] == "fixed":
        forecaster = ArCoefficients(fc_cfg["intercept"], tuple(fc_cfg["lags"]))
        fading = fc_cfg["fading_intercept"]
        prelude_length, prelude_sigma = 0, 0.0
    else:
        forecaster = None
        fading = False
        prelude_length, prelude_sigma = fc_cfg["length"], fc_cfg["sigma"]

    return Scenario(
        scenario_id=config["id"],
        dynamics=dynamics,
        noise=noise,
        forecaster=forecaster,
        fading_intercept=fading,
        prelude_length=prelude_length,
        prelude_sigma=prelude_sigma,
        pattern_kind=config["pattern"],
        target_kind=config["target"]["kind"],
        target_value=config["target"].get("value", 0.0),
        lambda_tilde=config["lambda_tilde"],
        horizon=config["horizon"],
        x0_history=tuple(config["x0"]),
        trials=config["trials"],
        seed=config["seed"],
        attackers=tuple(config["attackers"]),
        solver=SolverParams(**config["solver"]),
        active_from=config["active_from"],
    )


def make_pattern(kind: str, horizon: int) -> AttackPattern:
    if kind == "tomorrow":
        return AttackPattern.tomorrow(horizon)
    if kind == "last_day":
        return AttackPattern.last_day(horizon)
    if kind == "all":
        return AttackPattern.all_pairs(horizon)
    raise ConfigError(f"pattern: unknown kind {kind!r}")


def make_targets(scenario: Scenario, pattern: AttackPattern) -> TargetSchedule:
    if scenario.target_kind == "constant":
        return TargetSchedule.constant(pattern, scenario.target_value)
    # half_noise_free: run the environment open loop without noise, then
    # aim every forecast of time t' at half the undisturbed value there.
    x0 = lift_state(scenario.x0_history, scenario.dim)
    states = rollout(scenario.dynamics, x0, [0.0] * scenario.horizon)
    return TargetSchedule(
        {(t, tp): 0.5 * float(states[tp, 1]) for t, tp in pattern.pairs()}
    )


def fit_ar1_through_origin(series: Sequence[float]) -> ArCoefficients:
    """Least-squares slope of x_{s+1} on x_s with no intercept term."""
    x = np.asarray(series, dtype=float)
    if x.size < 2:
        raise ValueError("need at least one transition to fit")
    denom = float(x[:-1] @ x[:-1])
    if denom == 0.0:
        raise ValueError("degenerate prelude: all-zero states")
    return ArCoefficients(0.0, (float(x[:-1] @ x[1:]) / denom,))


def _prelude_forecaster(scenario: Scenario, trial: int) -> ArCoefficients:
    """The victim's AR(1) model, fitted on a fresh noisy rollout."""
    stream = GaussianStream(scenario.seed + PRELUDE_SEED_OFFSET + trial)
    order = scenario.dynamics.order
    history = list(scenario.x0_history[:order])
    series = [history[0]]
    for _ in range(scenario.prelude_length):
        mean = scenario.dynamics.mean_next(np.asarray(history[:order]))
        value = float(mean) + scenario.prelude_sigma * stream.next()
        history.insert(0, value)
        series.append(value)
    return fit_ar1_through_origin(series)


def _restrict(pattern: AttackPattern, targets: TargetSchedule, start: int):
    kept = {
        (t, tp): w for (t, tp), w in pattern.weights.items() if t >= start
    }
    return (
        AttackPattern(pattern.horizon, kept),
        TargetSchedule({pair: targets.values[pair] for pair in kept}),
    )


def _make_controller(name: str, scenario: Scenario, problem: AttackProblem):
    """Controller plus the forecast leads the harness must surface to it."""
    sol = scenario.solver
    if name == "none":
        return zero_controller, ()
    if name == "lqr":
        return lqr.controller(problem), ()
    if name == "greedy":
        return greedy.controller(problem), ()
    cfg = IlqrConfig(tol=sol.tol, maxiter=sol.maxiter)
    if name == "mpc-ilqr":
        ctrl = mpc.controller(problem, sol.lookahead, cfg)
        if scenario.active_from > 0:
            ctrl = delayed(ctrl, scenario.active_from)
        return ctrl, ()
    if name == "oracle":
        ctrl = mpc.controller(problem, sol.oracle_lookahead, cfg)
        return delayed(ctrl, scenario.active_from), ()
    if name == "sysid":
        ctrl = SysIdController(
            sol.fit_order,
            sol.fit_window,
            sol.lookahead,
            problem.pattern,
            problem.targets,
            scenario.lambda_tilde,
        )
        return ctrl, (1,)
    raise ConfigError(f"attackers: unknown attacker {name!r}")


def _run_trial(scenario: Scenario, tokens: Sequence[str], trial: int) -> TrialResult:
    dim = scenario.dim
    coeffs = (
        scenario.forecaster
        if scenario.forecaster is not None
        else _prelude_forecaster(scenario, trial)
    )
    fc_matrix = companion_matrix(coeffs, dim, scenario.fading_intercept)
    x0 = lift_state(scenario.x0_history, dim)
    reports: dict[str, CostReport] = {}
    trajectories: dict[str, Trajectory] = {}
    fallbacks: dict[str, tuple[int, ...]] = {}
    for token in tokens:
        name, override = parse_attacker(token)
        pattern = make_pattern(override or scenario.pattern_kind, scenario.horizon)
        targets = make_targets(scenario, pattern)
        lam = weight_lambda(scenario.lambda_tilde, pattern)
        problem = AttackProblem(
            scenario.dynamics, fc_matrix, pattern, targets, lam, x0
        )
        controller, leads = _make_controller(name, scenario, problem)
        traj = simulate(
            scenario.dynamics,
            scenario.noise.reseeded(scenario.seed + trial),
            x0,
            controller,
            scenario.horizon,
            forecaster=fc_matrix,
            pattern=pattern,
            visible_leads=leads,
        )
        report_problem = problem
        if scenario.active_from > 0:
            rpat, rtargets = _restrict(pattern, targets, scenario.active_from)
            report_problem = AttackProblem(
                scenario.dynamics, fc_matrix, rpat, rtargets, lam, x0
            )
        reports[token] = realized_cost(traj, report_problem)
        trajectories[token] = traj
        fallbacks[token] = (
            tuple(controller.fallback_times)
            if isinstance(controller, SysIdController)
            else ()
        )
    return TrialResult(trial, reports, trajectories, fallbacks)


def run_scenario(
    scenario: Scenario,
    attackers: Sequence[str] | None = None,
    trials: int | None = None,
) -> list[TrialResult]:
    """Run every requested attacker over every trial of the scenario.

    Trials are independent given their index, so the list is the same
    whatever order they execute in; this implementation just runs them in
    sequence.
    """
    tokens = tuple(attackers) if attackers is not None else scenario.attackers
    if not tokens:
        raise ConfigError("attackers: must list at least one attacker")
    probe = scenario.to_config()
    probe["attackers"] = list(tokens)
    validate_config(probe)  # re-checks applicability of overridden attackers
    count = scenario.trials if trials is None else trials
    if count < 1:
        raise ConfigError("trials: must be at least 1")
    return [_run_trial(scenario, tokens, i) for i in range(count)]


def summarize(
    results: Sequence[TrialResult],
    pairs: Sequence[tuple[str, str]] | None = None,
) -> SummaryStats:
    """Means, standard errors, and paired t-tests over trial totals."""
    if len(results) < 2:
        raise InsufficientTrialsError("need at least two trials to summarize")
    tokens = list(results[0].reports)
    totals = {
        token: np.asarray([r.reports[token].total for r in results])
        for token in tokens
    }
    attackers = {}
    for token in tokens:
        mean, stderr = mean_stderr(totals[token])
        attackers[token] = AttackerStats(
            mean_total=mean,
            stderr_total=stderr,
            mean_tracking=float(
                np.mean([r.reports[token].tracking for r in results])
            ),
            mean_control=float(
                np.mean([r.reports[token].control for r in results])
            ),
            trials=len(results),
        )
    if pairs is None:
        pairs = list(itertools.combinations(tokens, 2))
    tests = []
    for first, second in pairs:
        if first not in totals or second not in totals:
            raise ConfigError(f"attackers: no results for pair {(first, second)}")
        tests.append(
            PairedComparison(first, second, paired_t(totals[first], totals[second]))
        )
    return SummaryStats(attackers=attackers, tests=tuple(tests))
