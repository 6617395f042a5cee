"""Exact finite-horizon solver for attacking a linear environment.

The value function stays quadratic through the backward sweep,

    V_t(x) = x' P_t x + x' q_t + r_t,

so each step carries one symmetric matrix, one vector, and one scalar, and the
optimal control is affine in the lifted state.  Noise only shifts r_t: the
policies are the same with or without it (certainty equivalence), which is why
`solve` takes sigma as an optional diagnostic input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    AttackPattern,
    AttackProblem,
    Pair,
    TargetSchedule,
    companion_matrix,
    forecast_rows,
)
from .environment import Controller, LinearDynamics


@dataclass(frozen=True, eq=False)
class RiccatiState:
    """Quadratic value V(x) = x' matrix x + x' vector + scalar at one time."""

    matrix: np.ndarray
    vector: np.ndarray
    scalar: float

    def value(self, x: np.ndarray) -> float:
        return float(x @ self.matrix @ x + x @ self.vector + self.scalar)


@dataclass(frozen=True, eq=False)
class AffinePolicy:
    """u = offset + gain . x."""

    gain: np.ndarray
    offset: float

    def action(self, x: np.ndarray) -> float:
        return self.offset + float(self.gain @ x)


@dataclass(frozen=True, eq=False)
class LqrSolution:
    """Backward-sweep output over a window of decision times.

    policies[i] controls time t_start + i; values[i] is the value at
    t_start + i, with values[-1] the terminal quadratic at t_end.
    """

    t_start: int
    policies: list[AffinePolicy]
    values: list[RiccatiState]

    def policy_at(self, t: int) -> AffinePolicy:
        i = t - self.t_start
        if not (0 <= i < len(self.policies)):
            raise ValueError(f"no policy for time {t}")
        return self.policies[i]

    def value_at(self, x: np.ndarray, t: int) -> float:
        """Expected cost-to-go of the window problem from state x at time t."""
        i = t - self.t_start
        if not (0 <= i < len(self.values)):
            raise ValueError(f"no value function for time {t}")
        return self.values[i].value(x)


def _stage_terms(
    rows: np.ndarray,
    pattern: AttackPattern,
    targets: TargetSchedule,
    s: int,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Quadratic expansion of the tracking cost of forecasts issued at time s."""
    n = rows.shape[1]
    mat = np.zeros((n, n))
    vec = np.zeros(n)
    const = 0.0
    for tp, beta in pattern.at(s):
        c = rows[tp - s]
        y = targets.require(s, tp)
        mat += beta * np.outer(c, c)
        vec += -2.0 * beta * y * c
        const += beta * y * y
    return mat, vec, const


def backward_pass(
    env_matrix: np.ndarray,
    forecaster: np.ndarray,
    pattern: AttackPattern,
    targets: TargetSchedule,
    lam: float,
    t_start: int,
    t_end: int,
    sigma2: float = 0.0,
) -> LqrSolution:
    """Dynamic-programming sweep over the window [t_start, t_end].

    Stage costs are charged at each decision time s in (t_start, t_end]; the
    forecasts issued at t_start itself are already beyond the attacker's reach
    and contribute nothing.  Pattern pairs keep their full lead times even
    when t' lands past t_end, which is what makes truncated windows of a
    long-range pattern meaningful.

    Solving the whole problem is the special case t_start=0, t_end=horizon:
    no forecasts are issued at time 0 or at the horizon, so the boundary
    P = q = r = 0 falls out on its own and the last policy is identically
    zero.

    Args:
        env_matrix: one-step matrix A of the (estimated or true) environment.
        forecaster: victim companion matrix C, same dimension as A.
        lam: positive control penalty.
        sigma2: process noise variance; only shifts the scalar value terms.

    Returns:
        LqrSolution with t_end - t_start policies.
    """
    if t_end <= t_start:
        raise ValueError("window must contain at least one control")
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    n = forecaster.shape[0]
    if env_matrix.shape != (n, n):
        raise ValueError("environment and forecaster matrices must match in size")
    rows = forecast_rows(forecaster, pattern.max_lead())

    mat, vec, const = _stage_terms(rows, pattern, targets, t_end)
    values = [RiccatiState(matrix=mat, vector=vec, scalar=const)]
    policies: list[AffinePolicy] = []
    for s in range(t_end - 1, t_start - 1, -1):
        nxt = values[-1]
        # B = e_1, so every product with B is a slice.
        h = lam + nxt.matrix[1, 1]
        bpa = nxt.matrix[1] @ env_matrix  # B' P A, a row
        bq = nxt.vector[1]  # B' q
        policies.append(AffinePolicy(gain=-bpa / h, offset=-bq / (2.0 * h)))

        if s > t_start:
            mat, vec, const = _stage_terms(rows, pattern, targets, s)
        else:
            mat = np.zeros((n, n))
            vec = np.zeros(n)
            const = 0.0
        mat = mat + env_matrix.T @ nxt.matrix @ env_matrix - np.outer(bpa, bpa) / h
        mat = 0.5 * (mat + mat.T)  # keep symmetry against roundoff
        vec = vec + env_matrix.T @ nxt.vector - bpa * (bq / h)
        const = (
            const
            + nxt.scalar
            + nxt.matrix[1, 1] * sigma2
            - bq * bq / (4.0 * h)
        )
        values.append(RiccatiState(matrix=mat, vector=vec, scalar=const))
    policies.reverse()
    values.reverse()
    return LqrSolution(t_start=t_start, policies=policies, values=values)


def solve(problem: AttackProblem, sigma: float = 0.0) -> LqrSolution:
    """Solve the full-horizon problem; requires a linear environment."""
    if not isinstance(problem.dynamics, LinearDynamics):
        raise ValueError("the exact solver needs linear dynamics")
    if problem.dynamics.order > problem.dim:
        raise ValueError("problem dimension is below the environment order")
    env = companion_matrix(problem.dynamics.coeffs, problem.dim)
    return backward_pass(
        env,
        problem.forecaster,
        problem.pattern,
        problem.targets,
        problem.lam,
        0,
        problem.horizon,
        sigma * sigma,
    )


def controller(problem: AttackProblem, sigma: float = 0.0) -> Controller:
    """Closed-loop controller playing the optimal affine policies."""
    solution = solve(problem, sigma)
    width = problem.dim + 1

    def control(t: int, x: np.ndarray, visible: dict[Pair, float]) -> float:
        u = solution.policy_at(t).action(x[:width])
        if not np.isfinite(u):
            raise RuntimeError(f"policy produced non-finite control at step {t}")
        return u

    return control
