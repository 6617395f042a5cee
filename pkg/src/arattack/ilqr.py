"""Iterative linearization planner for attacking nonlinear environments.

Each pass rolls the current controls through the noise-free dynamics, expands
the tracking objective to second order around that trajectory, solves the
resulting linear-quadratic problem in the deviations, and applies the
correction at full step.  Linear dynamics make the expansion exact, so the
loop then reproduces the exact solver in a single pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AttackProblem, forecast_rows
from .environment import DivergenceError, Dynamics, rollout

JACOBIAN_MODES = ("analytic", "numeric")


@dataclass(frozen=True)
class IlqrConfig:
    """Stopping rule and linearization mode.

    The loop stops once the mean squared correction over the planned controls
    drops below tol, or after maxiter passes.  jacobian picks analytic
    derivatives or central finite differences with step fd_step.
    """

    tol: float = 1e-4
    maxiter: int = 1000
    jacobian: str = "analytic"
    fd_step: float = 1e-6

    def __post_init__(self) -> None:
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.maxiter < 1:
            raise ValueError("maxiter must be at least 1")
        if self.jacobian not in JACOBIAN_MODES:
            raise ValueError(f"jacobian must be one of {JACOBIAN_MODES}")
        if self.fd_step <= 0.0:
            raise ValueError("fd_step must be positive")


@dataclass(frozen=True, eq=False)
class Linearization:
    """First-order expansion of the lifted one-step map at a nominal point.

    wrt_state row 0 is zero (the constant slot never moves), row 1 holds the
    partials of the scalar map, and the rows below shift history; wrt_control
    is nonzero only in entry 1.
    """

    wrt_state: np.ndarray
    wrt_control: np.ndarray


def linearize(
    dyn: Dynamics,
    x: np.ndarray,
    u: float,
    mode: str = "analytic",
    fd_step: float = 1e-6,
) -> Linearization:
    """Jacobians of the lifted step map at (x, u) with zero noise.

    The threshold dynamics is linearized with the coefficients of whichever
    regime owns the nominal point, matching how the forward simulation would
    move from there.
    """
    width = len(x)
    lags = x[1:]
    if len(lags) < dyn.order:
        raise ValueError("state too narrow for the dynamics")
    dxf = np.zeros((width, width))
    duf = np.zeros(width)
    if mode == "analytic":
        grad = dyn.gradient(lags)
        dxf[1, 1 : 1 + len(grad)] = grad
        duf[1] = 1.0  # control enters additively in every built-in dynamics
    elif mode == "numeric":
        h = fd_step
        for i in range(width - 1):
            bumped = lags.copy()
            bumped[i] += h
            up = dyn.mean_next(bumped)
            bumped[i] -= 2.0 * h
            dn = dyn.mean_next(bumped)
            dxf[1, 1 + i] = (up - dn) / (2.0 * h)
        base = dyn.mean_next(lags)
        duf[1] = ((base + (u + h)) - (base + (u - h))) / (2.0 * h)
    else:
        raise ValueError(f"jacobian mode must be one of {JACOBIAN_MODES}")
    for i in range(2, width):
        dxf[i, i - 1] = 1.0
    return Linearization(wrt_state=dxf, wrt_control=duf)


@dataclass(frozen=True, eq=False)
class IlqrResult:
    """Planned open-loop controls plus how the loop ended."""

    controls: np.ndarray
    iterations: int
    converged: bool
    cost: float


def window_cost(
    states: np.ndarray,
    controls: np.ndarray,
    problem: AttackProblem,
    start: int,
    rows: np.ndarray | None = None,
) -> float:
    """Deterministic objective of a window rollout beginning at time `start`.

    Charges the tracking cost of every weighted forecast issued strictly
    inside the window (forecasts issued at `start` itself are already fixed)
    plus the control penalty.
    """
    if rows is None:
        rows = forecast_rows(problem.forecaster, problem.pattern.max_lead())
    cost = problem.lam * float(controls @ controls)
    for i in range(1, len(states)):
        s = start + i
        for tp, beta in problem.pattern.at(s):
            miss = float(rows[tp - s] @ states[i]) - problem.targets.require(s, tp)
            cost += beta * miss * miss
    return cost


def solve(
    x0: np.ndarray,
    problem: AttackProblem,
    horizon: int,
    cfg: IlqrConfig = IlqrConfig(),
    start: int = 0,
    warm: np.ndarray | None = None,
) -> IlqrResult:
    """Plan horizon-1 controls for the window of decision times starting at `start`.

    The window covers times start .. start+horizon-1; its last decision time
    contributes a terminal tracking stage (the forecasts issued there), and
    pattern lead times may reach beyond the window, so short windows of a
    long-range pattern still see the far target.  Solving a whole problem is
    the case start=0, horizon=problem.horizon, which plans every control
    except the final one (that one buys nothing and is fixed to zero by
    callers).

    The correction is applied at full step each pass; the loop breaks without
    applying once its mean square drops below cfg.tol.  If the deterministic
    window cost rises five passes in a row, or a nominal rollout diverges,
    the best iterate seen so far is returned instead.
    """
    if horizon < 2:
        raise ValueError("window needs at least two decision times")
    if start < 0 or start + horizon > problem.horizon + 1:
        raise ValueError("window reaches outside the problem horizon")
    width = problem.dim + 1
    if len(x0) != width or x0[0] != 1.0:
        raise ValueError("x0 must be a lifted state at the problem dimension")
    dyn = problem.dynamics
    lam = problem.lam
    t_end = start + horizon - 1
    n_controls = horizon - 1
    rows = forecast_rows(problem.forecaster, problem.pattern.max_lead())

    def stage_terms(s: int, nominal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mat = np.zeros((width, width))
        vec = np.zeros(width)
        for tp, beta in problem.pattern.at(s):
            c = rows[tp - s]
            miss = float(c @ nominal) - problem.targets.require(s, tp)
            mat += beta * np.outer(c, c)
            vec += 2.0 * beta * miss * c
        return mat, vec

    if warm is None:
        controls = np.zeros(n_controls)
    else:
        controls = np.asarray(warm, dtype=float).copy()
        if controls.shape != (n_controls,):
            raise ValueError("warm start length does not match the window")

    best_controls = None
    best_cost = np.inf
    prev_cost = np.inf
    rises = 0
    converged = False
    iterations = 0

    for iterations in range(1, cfg.maxiter + 1):
        try:
            states = rollout(dyn, x0, controls)
        except DivergenceError:
            controls = best_controls if best_controls is not None else np.zeros(n_controls)
            break
        cost = window_cost(states, controls, problem, start, rows)
        if cost < best_cost:
            best_cost = cost
            best_controls = controls.copy()
        rises = rises + 1 if cost > prev_cost else 0
        prev_cost = cost
        if rises >= 5:
            controls = best_controls
            break

        lins = [
            linearize(dyn, states[i], controls[i], cfg.jacobian, cfg.fd_step)
            for i in range(n_controls)
        ]
        # Backward sweep in the deviation variables.
        pmat, qvec = stage_terms(t_end, states[-1])
        steps = []  # per time s: (h, feedback row, scalar drive), back to front
        for i in range(n_controls - 1, -1, -1):
            dxf, duf = lins[i].wrt_state, lins[i].wrt_control
            pd = pmat @ duf
            h = lam + float(duf @ pd)
            feedback = pd @ dxf  # (DuF' P DxF) as a row
            drive = float(duf @ qvec) + 2.0 * lam * controls[i]
            steps.append((h, feedback, drive))
            if i > 0:
                s = start + i
                smat, svec = stage_terms(s, states[i])
                pmat_new = smat + dxf.T @ pmat @ dxf - np.outer(feedback, feedback) / h
                qvec = svec + dxf.T @ qvec - feedback * (drive / h)
                pmat = 0.5 * (pmat_new + pmat_new.T)
        steps.reverse()

        # Forward sweep: accumulate deviations from the frozen start state.
        dx = np.zeros(width)
        du = np.empty(n_controls)
        for i, (h, feedback, drive) in enumerate(steps):
            du[i] = -(2.0 * float(feedback @ dx) + drive) / (2.0 * h)
            dx = lins[i].wrt_state @ dx + lins[i].wrt_control * du[i]
        if float(du @ du) / n_controls < cfg.tol:
            converged = True
            break
        controls = controls + du

    try:
        final_cost = window_cost(
            rollout(dyn, x0, controls), controls, problem, start, rows
        )
    except DivergenceError:
        controls = best_controls if best_controls is not None else np.zeros(n_controls)
        final_cost = best_cost if np.isfinite(best_cost) else float("inf")
    return IlqrResult(
        controls=controls,
        iterations=iterations,
        converged=converged,
        cost=final_cost,
    )
