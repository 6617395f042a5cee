"""Black-box attacker: observe quietly, fit linear models, then plan on them.

The attacker never sees the environment's equations or the victim's model.
It watches the series and the published one-step forecasts for a while, fits
both by least squares over a rolling window, and from then on re-fits every
step and plans a short lookahead on the fitted models.  The control channel
itself (one unit of push per unit of control) is taken as known.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import (
    ArCoefficients,
    AttackPattern,
    Pair,
    TargetSchedule,
    companion_matrix,
    weight_lambda,
)
from .lqr import backward_pass

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10


class InsufficientDataError(RuntimeError):
    """The rolling window does not yet hold enough rows to fit."""


class UnsupportedVisibilityError(ValueError):
    """Forecast visibility other than one-step-ahead cannot be fitted linearly."""


@dataclass(frozen=True)
class VisibilityPattern:
    """Which forecast lead times the victim publishes each step."""

    leads: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(k < 1 for k in self.leads):
            raise ValueError("visible lead times must be at least 1")

    @classmethod
    def tomorrow(cls) -> "VisibilityPattern":
        return cls((1,))

    @property
    def tomorrow_only(self) -> bool:
        return self.leads == (1,)

    def visible(self, t: int, tp: int) -> bool:
        return (tp - t) in self.leads


@dataclass(frozen=True)
class EstimatedModels:
    """Fitted environment and forecaster, both AR of the attacker-chosen order."""

    env: ArCoefficients
    forecaster: ArCoefficients


class RollingBuffer:
    """Time-indexed window of observations feeding the estimators.

    Keeps the previous b+p-1 scalar states plus the current one, the last b
    controls, and the visible forecasts of the last b+1 steps; everything
    older falls off automatically.
    """

    def __init__(self, capacity: int, order: int):
        if capacity < 1 or order < 1:
            raise ValueError("capacity and order must be positive")
        self.capacity = capacity
        self.order = order
        self._states: deque[tuple[int, float]] = deque(maxlen=capacity + order)
        self._controls: deque[tuple[int, float]] = deque(maxlen=capacity)
        self._forecasts: deque[tuple[Pair, float]] = deque()

    def push_state(self, t: int, value: float) -> None:
        if self._states and t <= self._states[-1][0]:
            raise ValueError("states must arrive in increasing time order")
        self._states.append((t, float(value)))

    def push_control(self, t: int, value: float) -> None:
        self._controls.append((t, float(value)))

    def push_forecasts(self, visible: dict[Pair, float]) -> None:
        self._forecasts.extend(sorted(visible.items()))
        newest = self._states[-1][0] if self._states else 0
        while self._forecasts and self._forecasts[0][0][0] < newest - self.capacity:
            self._forecasts.popleft()

    def state_map(self) -> dict[int, float]:
        return dict(self._states)

    def control_map(self) -> dict[int, float]:
        return dict(self._controls)

    def forecast_map(self) -> dict[Pair, float]:
        return dict(self._forecasts)

    def newest_time(self) -> int:
        if not self._states:
            raise InsufficientDataError("buffer holds no states")
        return self._states[-1][0]

    def recent_lags(self, count: int) -> np.ndarray:
        """Newest `count` scalar states, newest first."""
        if len(self._states) < count:
            raise InsufficientDataError("buffer holds too few states")
        values = [v for _, v in list(self._states)[-count:]]
        return np.asarray(values[::-1])


def _least_norm(design: np.ndarray, response: np.ndarray) -> np.ndarray:
    solution, _, _, _ = np.linalg.lstsq(design, response, rcond=RANK_TOL)
    return solution


def _lag_row(states: dict[int, float], s: int, order: int) -> list[float] | None:
    row = [1.0]
    for i in range(order):
        v = states.get(s - i)
        if v is None:
            return None
        row.append(v)
    return row


def estimate_env(buffer: RollingBuffer, order: int) -> ArCoefficients:
    """Least-squares fit of the environment AR model from the rolling window.

    Uses rows s = t-b .. t-1: predict x_{s+1} - u_s from an intercept and the
    `order` newest lags at s.  The control's unit coefficient is known, so it
    moves to the response side.  Rank-deficient designs get the least-norm
    solution.
    """
    states = buffer.state_map()
    controls = buffer.control_map()
    t = buffer.newest_time()
    design: list[list[float]] = []
    response: list[float] = []
    for s in range(t - buffer.capacity, t):
        row = _lag_row(states, s, order)
        if row is None or (s + 1) not in states or s not in controls:
            continue
        design.append(row)
        response.append(states[s + 1] - controls[s])
    if len(design) < buffer.capacity:
        raise InsufficientDataError(
            f"{len(design)} usable rows, need {buffer.capacity}"
        )
    coef = _least_norm(np.asarray(design), np.asarray(response))
    return ArCoefficients(float(coef[0]), tuple(float(c) for c in coef[1:]))


def estimate_forecaster(
    buffer: RollingBuffer, order: int, vis: VisibilityPattern
) -> ArCoefficients:
    """Least-squares fit of the victim's model from its published forecasts.

    Only one-step-ahead visibility keeps the published forecast linear in the
    victim's coefficients; anything else compounds the model through its own
    predictions and is rejected.  Uses rows s = t-b .. t: predict the
    published y_{s+1|s} from an intercept and the `order` newest lags at s.
    """
    if not vis.tomorrow_only:
        raise UnsupportedVisibilityError(
            "only one-step-ahead forecast visibility can be fitted linearly"
        )
    states = buffer.state_map()
    forecasts = buffer.forecast_map()
    t = buffer.newest_time()
    design: list[list[float]] = []
    response: list[float] = []
    for s in range(t - buffer.capacity, t + 1):
        row = _lag_row(states, s, order)
        y = forecasts.get((s, s + 1))
        if row is None or y is None:
            continue
        design.append(row)
        response.append(y)
    if len(design) < buffer.capacity:
        raise InsufficientDataError(
            f"{len(design)} usable rows, need {buffer.capacity}"
        )
    coef = _least_norm(np.asarray(design), np.asarray(response))
    return ArCoefficients(float(coef[0]), tuple(float(c) for c in coef[1:]))


class SysIdController:
    """Stateful black-box attacker.

    Stays passive for the first b+p-1 steps while the window fills.  From
    then on it re-estimates both models every step, plans a lookahead window
    with the exact linear solver on the estimates, and executes the first
    planned control.  A step whose estimation or solve fails falls back to
    zero control and is logged on `fallback_times`.
    """

    def __init__(
        self,
        order: int,
        capacity: int,
        lookahead: int,
        pattern: AttackPattern,
        targets: TargetSchedule,
        lambda_tilde: float,
        vis: VisibilityPattern | None = None,
    ):
        if pattern.horizon <= capacity + order - 1:
            raise ValueError("horizon leaves no room after the passive phase")
        if lookahead < 1:
            raise ValueError("lookahead must be at least 1")
        self.order = order
        self.capacity = capacity
        self.lookahead = lookahead
        self.pattern = pattern
        self.targets = targets
        self.lam = weight_lambda(lambda_tilde, pattern)
        self.vis = vis if vis is not None else VisibilityPattern.tomorrow()
        self.buffer = RollingBuffer(capacity, order)
        self.fallback_times: list[int] = []
        self.models: EstimatedModels | None = None

    @property
    def passive_until(self) -> int:
        """First active decision time: b+p-1."""
        return self.capacity + self.order - 1

    def __call__(self, t: int, x: np.ndarray, visible: dict[Pair, float]) -> float:
        if t == 0:
            # The pre-history in the lifted state is observable too.
            history = x[1:]
            for i in range(len(history) - 1, -1, -1):
                self.buffer.push_state(-i, float(history[i]))
        else:
            self.buffer.push_state(t, float(x[1]))
        self.buffer.push_forecasts(visible)
        u = 0.0
        if t >= self.passive_until:
            u = self._plan(t)
        self.buffer.push_control(t, u)
        return u

    def _plan(self, t: int) -> float:
        T = self.pattern.horizon
        t_end = min(t + self.lookahead, T - 1)
        if t_end <= t:
            return 0.0  # final step: nothing left to influence
        try:
            env_fit = estimate_env(self.buffer, self.order)
            fc_fit = estimate_forecaster(self.buffer, self.order, self.vis)
            self.models = EstimatedModels(env=env_fit, forecaster=fc_fit)
            solution = backward_pass(
                companion_matrix(env_fit, self.order),
                companion_matrix(fc_fit, self.order),
                self.pattern,
                self.targets,
                self.lam,
                t,
                t_end,
            )
            state = np.concatenate(([1.0], self.buffer.recent_lags(self.order)))
            u = solution.policy_at(t).action(state)
            if not np.isfinite(u):
                raise RuntimeError("planned control is not finite")
            return float(u)
        except (InsufficientDataError, RuntimeError, np.linalg.LinAlgError) as err:
            self.fallback_times.append(t)
            logger.warning("falling back to zero control at step %d: %s", t, err)
            return 0.0


def controller(
    order: int,
    capacity: int,
    lookahead: int,
    pattern: AttackPattern,
    targets: TargetSchedule,
    lambda_tilde: float,
    vis: VisibilityPattern | None = None,
) -> SysIdController:
    """Fresh black-box attacker; one instance per closed-loop run."""
    return SysIdController(
        order, capacity, lookahead, pattern, targets, lambda_tilde, vis
    )
