"""One-step-lookahead attacker.

At time t it minimizes the weighted tracking error of only the forecasts the
victim will issue at t+1, plus the control penalty.  On a linear environment
that is a scalar quadratic with a closed form; otherwise the scalar objective
is minimized by a coarse grid followed by golden-section refinement.
"""

from __future__ import annotations

import numpy as np

from .core import (
    AttackPattern,
    AttackProblem,
    Pair,
    TargetSchedule,
    companion_matrix,
    forecast_rows,
)
from .environment import Controller, Dynamics, LinearDynamics, step

GRID_POINTS = 401
BRACKET_TOL = 1e-10

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def _golden_section(f, a: float, b: float, tol: float) -> float:
    """Midpoint of the bracket after golden-section shrinking to width tol."""
    c = b - (b - a) * _INVPHI
    d = a + (b - a) * _INVPHI
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * _INVPHI
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * _INVPHI
            fd = f(d)
    return 0.5 * (a + b)


def linear_action(
    x: np.ndarray,
    env_matrix: np.ndarray,
    forecaster: np.ndarray,
    pattern: AttackPattern,
    targets: TargetSchedule,
    lam: float,
    t: int,
) -> float:
    """Closed-form greedy control at time t on a linear environment.

    Every forecast issued at t+1 responds linearly to u_t, so the expected
    one-step objective is a scalar quadratic; noise adds a constant and drops
    out of the minimizer.  Returns 0 when nothing issued at t+1 is weighted
    (in particular at t = horizon-1).
    """
    entries = pattern.at(t + 1)
    if t >= pattern.horizon - 1 or not entries:
        return 0.0
    rows = forecast_rows(forecaster, max(tp for tp, _ in entries) - (t + 1))
    drift = env_matrix @ x
    num = 0.0
    den = lam
    for tp, beta in entries:
        k = tp - (t + 1)
        gain = rows[k][1]  # response of the forecast to one unit of control
        miss = float(rows[k] @ drift) - targets.require(t + 1, tp)
        num += beta * gain * miss
        den += beta * gain * gain
    return -num / den


def nonlinear_action(
    x: np.ndarray,
    dyn: Dynamics,
    forecaster: np.ndarray,
    pattern: AttackPattern,
    targets: TargetSchedule,
    lam: float,
    t: int,
) -> float:
    """Greedy control by scalar search when the environment is nonlinear.

    The noise-free one-step objective is evaluated on a 401-point grid over
    [-U, U] with U = 10 * (1 + |x_t|), then the best cell is refined by
    golden-section search down to a 1e-10 bracket.
    """
    entries = pattern.at(t + 1)
    if t >= pattern.horizon - 1 or not entries:
        return 0.0
    rows = forecast_rows(forecaster, max(tp for tp, _ in entries) - (t + 1))
    pairs = [(rows[tp - (t + 1)], targets.require(t + 1, tp), beta) for tp, beta in entries]

    def objective(u: float) -> float:
        nxt = step(dyn, x, u, 0.0)
        cost = lam * u * u
        for row, target, beta in pairs:
            miss = float(row @ nxt) - target
            cost += beta * miss * miss
        return cost

    reach = 10.0 * (1.0 + abs(float(x[1])))
    grid = np.linspace(-reach, reach, GRID_POINTS)
    best = int(np.argmin([objective(u) for u in grid]))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, GRID_POINTS - 1)]
    return _golden_section(objective, lo, hi, BRACKET_TOL)


def controller(problem: AttackProblem) -> Controller:
    """Greedy controller for the problem, picking the path its dynamics allows."""
    width = problem.dim + 1
    if isinstance(problem.dynamics, LinearDynamics):
        env = companion_matrix(problem.dynamics.coeffs, problem.dim)

        def control(t: int, x: np.ndarray, visible: dict[Pair, float]) -> float:
            return linear_action(
                x[:width],
                env,
                problem.forecaster,
                problem.pattern,
                problem.targets,
                problem.lam,
                t,
            )

    else:

        def control(t: int, x: np.ndarray, visible: dict[Pair, float]) -> float:
            return nonlinear_action(
                x[:width],
                problem.dynamics,
                problem.forecaster,
                problem.pattern,
                problem.targets,
                problem.lam,
                t,
            )

    return control
