"""Lifted-state algebra shared by every attack planner.

A scalar series with d lags of history is carried as the lifted vector
x = (1, x_t, x_{t-1}, ..., x_{t-d+1}).  The leading 1 absorbs intercepts so
forecasting becomes repeated multiplication by one square matrix.  Index 1
holds the newest value everywhere in this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:
    from .environment import Dynamics

Pair = tuple[int, int]


@dataclass(frozen=True)
class ArCoefficients:
    """Intercept and lag coefficients of a scalar AR model, newest lag first."""

    intercept: float
    lags: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lags) == 0:
            raise ValueError("AR model needs at least one lag coefficient")
        if not np.all(np.isfinite([self.intercept, *self.lags])):
            raise ValueError("AR coefficients must be finite")

    @property
    def order(self) -> int:
        return len(self.lags)

    def predict(self, lags: np.ndarray) -> float:
        """One-step prediction from lag values (newest first)."""
        if len(lags) < self.order:
            raise ValueError(
                f"need {self.order} lag values, got {len(lags)}"
            )
        return self.intercept + float(np.dot(self.lags, lags[: self.order]))


def companion_matrix(
    coeffs: ArCoefficients, dim: int | None = None, fading_intercept: bool = False
) -> np.ndarray:
    """Build the (dim+1) x (dim+1) one-step matrix acting on lifted states.

    Row 0 preserves the constant slot, row 1 applies the AR step, and the rows
    below shift history down one position.  dim defaults to the model order and
    may exceed it (the extra columns of row 1 are zero), which lets models of
    different orders share one state dimension.

    With fading_intercept the constant slot zeroes out after one application:
    the intercept still enters every one-step forecast but its influence on
    longer leads decays with the lag polynomial instead of accumulating.
    That is not the standard AR forecast; it exists because one packaged
    scenario only reproduces its reference cost levels under this variant
    (see the experiments module).
    """
    order = coeffs.order
    if dim is None:
        dim = order
    if dim < order:
        raise ValueError(f"dim {dim} cannot be below the model order {order}")
    mat = np.zeros((dim + 1, dim + 1))
    mat[0, 0] = 0.0 if fading_intercept else 1.0
    mat[1, 0] = coeffs.intercept
    mat[1, 1 : order + 1] = coeffs.lags
    for i in range(2, dim + 1):
        mat[i, i - 1] = 1.0
    return mat


def control_direction(dim: int) -> np.ndarray:
    """Unit vector through which a control or noise scalar enters the state."""
    if dim < 1:
        raise ValueError("state needs at least one lag slot")
    vec = np.zeros(dim + 1)
    vec[1] = 1.0
    return vec


def lift_state(history: Sequence[float], dim: int) -> np.ndarray:
    """Lifted state from scalar history (newest first), zero-padded to dim lags."""
    values = np.asarray(history, dtype=float)
    if values.ndim != 1 or len(values) == 0:
        raise ValueError("history must be a non-empty 1-d sequence")
    if len(values) > dim:
        raise ValueError(f"history of length {len(values)} exceeds dim {dim}")
    if not np.all(np.isfinite(values)):
        raise ValueError("history values must be finite")
    state = np.zeros(dim + 1)
    state[0] = 1.0
    state[1 : 1 + len(values)] = values
    return state


def forecast(matrix: np.ndarray, state: np.ndarray, steps: int) -> float:
    """Point forecast `steps` ahead of the state: entry 1 of matrix**steps @ state."""
    if steps < 1:
        raise ValueError("forecast lead must be at least 1")
    vec = state
    for _ in range(steps):
        vec = matrix @ vec
    return float(vec[1])


def forecast_rows(matrix: np.ndarray, max_steps: int) -> np.ndarray:
    """Stack of row vectors r_k with r_k @ x = k-step forecast, k = 0..max_steps.

    r_0 simply reads the current value; the solvers consume these rows instead
    of full matrix powers because every tracking cost touches entry 1 only.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    rows = np.zeros((max_steps + 1, matrix.shape[0]))
    rows[0, 1] = 1.0
    for k in range(1, max_steps + 1):
        rows[k] = rows[k - 1] @ matrix
    return rows


@dataclass(frozen=True)
class AttackPattern:
    """Weights in [0, 1] on forecast pairs (t, t'): issued at time t, about time t'.

    Decision times run 1..horizon-1 and lead times are at least one step, so
    keys satisfy 1 <= t < t' <= horizon.
    """

    horizon: int
    weights: dict[Pair, float]

    def __post_init__(self) -> None:
        if self.horizon < 2:
            raise ValueError("horizon must be at least 2")
        for (t, tp), beta in self.weights.items():
            if not (1 <= t < tp <= self.horizon):
                raise ValueError(f"pair ({t}, {tp}) outside 1 <= t < t' <= T")
            if not (0.0 <= beta <= 1.0):
                raise ValueError(f"weight {beta} for ({t}, {tp}) outside [0, 1]")

    @classmethod
    def tomorrow(cls, horizon: int) -> "AttackPattern":
        """Weight 1 on every one-step-ahead forecast."""
        return cls(horizon, {(t, t + 1): 1.0 for t in range(1, horizon)})

    @classmethod
    def last_day(cls, horizon: int) -> "AttackPattern":
        """Weight 1 on every forecast about the final time."""
        return cls(horizon, {(t, horizon): 1.0 for t in range(1, horizon)})

    @classmethod
    def all_pairs(cls, horizon: int) -> "AttackPattern":
        """Weight 1 on every forecast the victim ever issues."""
        return cls(
            horizon,
            {
                (t, tp): 1.0
                for t in range(1, horizon)
                for tp in range(t + 1, horizon + 1)
            },
        )

    def pairs(self) -> list[Pair]:
        """Positively weighted pairs in sorted order."""
        return sorted(p for p, b in self.weights.items() if b > 0.0)

    def at(self, t: int) -> list[tuple[int, float]]:
        """(t', weight) for every positively weighted forecast issued at t."""
        return sorted(
            (tp, beta)
            for (ti, tp), beta in self.weights.items()
            if ti == t and beta > 0.0
        )

    def total(self) -> float:
        return float(sum(b for b in self.weights.values() if b > 0.0))

    def max_lead(self) -> int:
        """Longest lead time t' - t carrying positive weight."""
        return max((tp - t for (t, tp) in self.pairs()), default=0)


@dataclass(frozen=True)
class TargetSchedule:
    """Value the attacker wants each weighted forecast to land on."""

    values: dict[Pair, float]

    def __post_init__(self) -> None:
        for pair, y in self.values.items():
            if not np.isfinite(y):
                raise ValueError(f"target for {pair} must be finite")

    @classmethod
    def constant(cls, pattern: AttackPattern, value: float) -> "TargetSchedule":
        return cls({pair: float(value) for pair in pattern.pairs()})

    def require(self, t: int, tp: int) -> float:
        try:
            return self.values[(t, tp)]
        except KeyError:
            raise ValueError(f"no target for weighted pair ({t}, {tp})") from None


def weight_lambda(lambda_tilde: float, pattern: AttackPattern) -> float:
    """Control penalty scaled by the average tracking weight per decision time.

    lam = lambda_tilde * (sum of weights) / (horizon - 1), averaging over the
    horizon-1 times at which forecasts are issued.  A dimensionless
    lambda_tilde then means roughly the same thing across patterns of very
    different weight mass; for the one-step-ahead pattern it passes through
    unchanged.  This is the normalization under which the packaged scenarios
    reproduce their reference cost levels.
    """
    if lambda_tilde <= 0.0:
        raise ValueError("lambda_tilde must be positive")
    total = pattern.total()
    if total <= 0.0:
        raise ValueError("pattern has no positive weight")
    return lambda_tilde * total / (pattern.horizon - 1)


@dataclass(frozen=True, eq=False)
class AttackProblem:
    """One attack instance: the environment, the victim forecaster, and the goal.

    forecaster is the victim model's companion matrix; x0 is the lifted start
    state at the same dimension.  Simulations may carry extra history lags and
    slice down to this dimension when forecasting.
    """

    dynamics: "Dynamics"
    forecaster: np.ndarray
    pattern: AttackPattern
    targets: TargetSchedule
    lam: float
    x0: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.forecaster, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 2:
            raise ValueError("forecaster must be a square lifted-state matrix")
        if np.any(mat[0, 1:] != 0.0) or mat[0, 0] not in (0.0, 1.0):
            raise ValueError(
                "forecaster row 0 must keep or zero the constant slot, not mix it"
            )
        if not (np.isfinite(self.lam) and self.lam > 0.0):
            raise ValueError("lam must be positive and finite")
        if self.pattern.total() <= 0.0:
            raise ValueError("pattern carries no positive weight")
        for (t, tp) in self.pattern.pairs():
            self.targets.require(t, tp)
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (mat.shape[0],):
            raise ValueError("x0 dimension must match the forecaster matrix")
        if x0[0] != 1.0:
            raise ValueError("x0 must carry 1.0 in the constant slot")

    @property
    def horizon(self) -> int:
        return self.pattern.horizon

    @property
    def dim(self) -> int:
        return self.forecaster.shape[0] - 1


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Realized closed-loop run.

    states holds horizon+1 lifted rows (possibly wider than the problem needs),
    controls and noises hold one scalar per step, and forecasts maps each
    recorded (t, t') pair to the value the victim published at time t.
    """

    states: np.ndarray
    controls: np.ndarray
    noises: np.ndarray
    forecasts: dict[Pair, float]

    @property
    def horizon(self) -> int:
        return len(self.controls)

    def scalars(self) -> np.ndarray:
        """The underlying series x_0..x_T."""
        return self.states[:, 1].copy()


@dataclass(frozen=True)
class CostReport:
    """Split of a realized attack cost."""

    tracking: float
    control: float

    @property
    def total(self) -> float:
        return self.tracking + self.control


def realized_cost(trajectory: Trajectory, problem: AttackProblem) -> CostReport:
    """Evaluate the attack objective along one realized trajectory.

    Forecasts are recomputed from the stored states with the problem's own
    forecaster, so the report never depends on what the simulator chose to
    record.
    """
    if trajectory.horizon != problem.horizon:
        raise ValueError("trajectory and problem horizons differ")
    width = problem.forecaster.shape[0]
    if trajectory.states.shape[1] < width:
        raise ValueError("trajectory states are narrower than the forecaster")
    rows = forecast_rows(problem.forecaster, problem.pattern.max_lead())
    tracking = 0.0
    for (t, tp) in problem.pattern.pairs():
        beta = problem.pattern.weights[(t, tp)]
        issued = float(rows[tp - t] @ trajectory.states[t, :width])
        gap = issued - problem.targets.require(t, tp)
        tracking += beta * gap * gap
    control = problem.lam * float(np.dot(trajectory.controls, trajectory.controls))
    return CostReport(tracking=tracking, control=control)
