"""Environments the attacker perturbs, process noise, and the closed-loop simulator.

Three scalar environments are provided: a linear AR model, a four-regime
threshold model with constants fitted to post-war GNP growth, and a smooth
rational map with two attracting fixed points.  All of them advance as

    x_{t+1} = f(x_t, ..., x_{t-q+1}) + u_t + w_t

so the control and the noise enter additively through the same channel.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence, Union

import numpy as np

from .core import ArCoefficients, Pair, Trajectory, forecast_rows

DIVERGENCE_LIMIT = 1e9

# A controller maps (time, lifted state, forecasts visible at that time) to a
# scalar control.  Stateful controllers are called once per step, in order.
Controller = Callable[[int, np.ndarray, dict[Pair, float]], float]


class DivergenceError(RuntimeError):
    """The simulated series left the numerical trust region."""

    def __init__(self, value: float, time: int | None = None):
        where = "" if time is None else f" at step {time}"
        super().__init__(f"state diverged{where}: |{value:g}| > {DIVERGENCE_LIMIT:g}")
        self.value = value
        self.time = time


@dataclass(frozen=True)
class LinearDynamics:
    """x_{t+1} = intercept + sum_i a_i x_{t-i} + u + w."""

    coeffs: ArCoefficients

    @property
    def order(self) -> int:
        return self.coeffs.order

    def mean_next(self, lags: np.ndarray) -> float:
        return self.coeffs.predict(lags)

    def gradient(self, lags: np.ndarray) -> np.ndarray:
        """d f / d (x_t, ..., x_{t-q+1}); constant for a linear model."""
        return np.asarray(self.coeffs.lags, dtype=float)


# (intercept, lag coefficients, noise scale) per regime, index 1..4.
GNP_REGIMES = (
    (-0.015, (-1.076, 0.0), 0.0062),
    (-0.006, (0.630, -0.756), 0.0132),
    (0.006, (0.438, 0.0), 0.0094),
    (0.004, (0.443, 0.0), 0.0082),
)


def gnp_regime(current: float, previous: float) -> int:
    """Active regime (1..4) of the threshold model given the two newest values.

    The split is on the sign of the previous value and on whether the series
    just fell or rose: previous <= 0 selects regime 1 (fell) or 2 (rose),
    previous > 0 selects regime 3 (fell) or 4 (rose).
    """
    if previous <= 0.0:
        return 1 if current <= previous else 2
    return 3 if current <= previous else 4


@dataclass(frozen=True)
class ThresholdGnpDynamics:
    """Piecewise-linear model on two lags with the four fixed GNP-growth regimes.

    The regime is re-selected every step from the two newest values, so the
    map is nonlinear even though each branch is affine.
    """

    @property
    def order(self) -> int:
        return 2

    def mean_next(self, lags: np.ndarray) -> float:
        intercept, (a1, a2), _ = GNP_REGIMES[gnp_regime(lags[0], lags[1]) - 1]
        return intercept + a1 * lags[0] + a2 * lags[1]

    def gradient(self, lags: np.ndarray) -> np.ndarray:
        """Coefficients of the active regime (the map is affine within it)."""
        _, coeffs, _ = GNP_REGIMES[gnp_regime(lags[0], lags[1]) - 1]
        return np.asarray(coeffs, dtype=float)

    def regime_sigma(self, lags: np.ndarray) -> float:
        return GNP_REGIMES[gnp_regime(lags[0], lags[1]) - 1][2]


@dataclass(frozen=True)
class RationalMapDynamics:
    """x_{t+1} = 2 x / (1 + 0.8 x^2) + u + w.

    Without interference the map settles on one of the attracting fixed points
    near +-1.118, where its derivative vanishes; one-step prediction there is
    easy, which is what makes this environment interesting to attack.
    """

    @property
    def order(self) -> int:
        return 1

    def mean_next(self, lags: np.ndarray) -> float:
        x = lags[0]
        return 2.0 * x / (1.0 + 0.8 * x * x)

    def gradient(self, lags: np.ndarray) -> np.ndarray:
        x = lags[0]
        denom = 1.0 + 0.8 * x * x
        return np.array([2.0 * (1.0 - 0.8 * x * x) / (denom * denom)])


Dynamics = Union[LinearDynamics, ThresholdGnpDynamics, RationalMapDynamics]


def step(dyn: Dynamics, state: np.ndarray, control: float, noise: float) -> np.ndarray:
    """Advance one step: new scalar from dyn plus (control + noise), history shifted.

    The output keeps the width of the input state, which may carry more lags
    than the dynamics consumes.
    """
    lags = state[1:]
    if len(lags) < dyn.order:
        raise ValueError(
            f"state carries {len(lags)} lags but the dynamics needs {dyn.order}"
        )
    value = dyn.mean_next(lags) + control + noise
    if not np.isfinite(value) or abs(value) > DIVERGENCE_LIMIT:
        raise DivergenceError(value)
    out = np.empty_like(state)
    out[0] = 1.0
    out[1] = value
    out[2:] = state[1:-1]
    return out


class GaussianStream:
    """Deterministic standard-normal draws.

    PCG64 uniforms pushed through the Box-Muller cosine branch, one pair of
    uniforms per draw (the sine partner is discarded).  numpy's own
    standard_normal is avoided on purpose: its ziggurat stream is not
    guaranteed stable across versions, and bit-identical reruns are part of
    this package's output contract.
    """

    def __init__(self, seed: int):
        self._uniform = np.random.Generator(np.random.PCG64(seed))

    def next(self) -> float:
        u1 = 1.0 - self._uniform.random()  # in (0, 1], keeps log finite
        u2 = self._uniform.random()
        return float(np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2))


@dataclass(frozen=True)
class NoiseModel:
    """Additive process noise: none, fixed-scale gaussian, or per-regime gaussian.

    Per-regime noise draws one standard normal per step and multiplies it by
    the active regime's scale, so runs with different controllers but the same
    seed share the underlying normal sequence.
    """

    kind: str
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("none", "gaussian", "gnp_regime"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "gaussian" and self.sigma < 0.0:
            raise ValueError("sigma must be non-negative")

    def reseeded(self, seed: int) -> "NoiseModel":
        return replace(self, seed=seed)

    def stream(self) -> GaussianStream:
        return GaussianStream(self.seed)

    def scale(self, dyn: Dynamics, lags: np.ndarray) -> float:
        if self.kind == "none":
            return 0.0
        if self.kind == "gaussian":
            return self.sigma
        if not isinstance(dyn, ThresholdGnpDynamics):
            raise ValueError("gnp_regime noise requires the threshold dynamics")
        return dyn.regime_sigma(lags)


def zero_controller(t: int, x: np.ndarray, visible: dict[Pair, float]) -> float:
    """The no-attack baseline."""
    return 0.0


def delayed(inner: Controller, start: int) -> Controller:
    """Emit zero before `start`, then defer to the wrapped controller."""

    def control(t: int, x: np.ndarray, visible: dict[Pair, float]) -> float:
        if t < start:
            return 0.0
        return inner(t, x, visible)

    return control


def rollout(
    dyn: Dynamics,
    x0: np.ndarray,
    controls: Sequence[float],
    noises: Sequence[float] | None = None,
) -> np.ndarray:
    """Open-loop state sequence under given controls (and optional noises).

    Returns len(controls)+1 stacked lifted states starting at x0.
    """
    states = np.empty((len(controls) + 1, len(x0)))
    states[0] = x0
    for t, u in enumerate(controls):
        w = 0.0 if noises is None else noises[t]
        states[t + 1] = step(dyn, states[t], float(u), float(w))
    return states


def simulate(
    dyn: Dynamics,
    noise: NoiseModel,
    x0: np.ndarray,
    controller: Controller,
    horizon: int,
    forecaster: np.ndarray | None = None,
    pattern=None,
    visible_leads: tuple[int, ...] = (),
) -> Trajectory:
    """Run the closed loop for `horizon` steps.

    At each step t the victim's forecasts are computed from the current state
    (when a forecaster matrix is given), the controller is called with the
    ones listed in visible_leads, exactly one noise draw is consumed, and the
    environment advances.  Forecasts for every positively weighted pattern
    pair are recorded on the trajectory along with anything made visible.

    The one-draw-per-step discipline is what makes runs with the same seed
    but different controllers share their noise sequence.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if (pattern is not None or visible_leads) and forecaster is None:
        raise ValueError("recording or exposing forecasts needs a forecaster")
    width = len(x0)
    if x0[0] != 1.0:
        raise ValueError("x0 must carry 1.0 in the constant slot")
    rows = None
    fdim = 0
    if forecaster is not None:
        fdim = forecaster.shape[0]
        if width < fdim:
            raise ValueError("simulation state is narrower than the forecaster")
        max_lead = max(
            pattern.max_lead() if pattern is not None else 0,
            max(visible_leads, default=0),
        )
        rows = forecast_rows(forecaster, max_lead)

    stream = noise.stream()
    states = np.empty((horizon + 1, width))
    states[0] = x0
    controls = np.empty(horizon)
    noises = np.empty(horizon)
    forecasts: dict[Pair, float] = {}

    for t in range(horizon):
        x = states[t]
        visible: dict[Pair, float] = {}
        if rows is not None and t >= 1:
            for k in visible_leads:
                if t + k <= horizon:
                    y = float(rows[k] @ x[:fdim])
                    forecasts[(t, t + k)] = y
                    visible[(t, t + k)] = y
            if pattern is not None:
                for tp, _ in pattern.at(t):
                    forecasts[(t, tp)] = float(rows[tp - t] @ x[:fdim])
        u = float(controller(t, x, visible))
        if not np.isfinite(u):
            raise ValueError(f"controller returned non-finite control at step {t}")
        z = stream.next()
        w = noise.scale(dyn, x[1:]) * z
        try:
            states[t + 1] = step(dyn, x, u, w)
        except DivergenceError as err:
            raise DivergenceError(err.value, time=t) from None
        controls[t] = u
        noises[t] = w
    return Trajectory(
        states=states, controls=controls, noises=noises, forecasts=forecasts
    )
