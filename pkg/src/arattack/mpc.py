"""Receding-horizon attack: plan a short window, execute one control, replan.

Planning is done on the noise-free system, so the realized state the next
step differs from the plan; replanning from the observed state is what makes
the scheme robust to the noise it ignored.
"""

from __future__ import annotations

import numpy as np

from .core import AttackProblem, Pair
from .environment import Controller
from .ilqr import IlqrConfig, solve as ilqr_solve


class MpcController:
    """Stateful receding-horizon controller.

    Each call plans the window [t, min(t+l, horizon-1)] with the iterative
    solver, warm-started from the previous plan shifted by one step, and
    returns the first planned control.  Calls must advance one step at a
    time; the first call may arrive at any time (earlier steps simply were
    not this controller's to make).
    """

    def __init__(self, problem: AttackProblem, l: int, cfg: IlqrConfig = IlqrConfig()):
        if l < 1:
            raise ValueError("lookahead l must be at least 1")
        self._problem = problem
        self._l = l
        self._cfg = cfg
        self._width = problem.dim + 1
        self._plan: np.ndarray | None = None
        self._next_t: int | None = None

    def __call__(self, t: int, x: np.ndarray, visible: dict[Pair, float]) -> float:
        T = self._problem.horizon
        if t >= T:
            raise ValueError(f"controller exhausted: no decision time {t} in horizon {T}")
        if self._next_t is not None and t != self._next_t:
            raise ValueError("controller calls must advance one step at a time")
        self._next_t = t + 1
        if t == T - 1:
            return 0.0  # nothing this control touches is still weighted
        horizon = min(t + self._l + 1, T) - t
        warm = None
        if self._plan is not None and len(self._plan) > 1:
            warm = np.zeros(horizon - 1)
            tail = self._plan[1:][: horizon - 1]
            warm[: len(tail)] = tail
        result = ilqr_solve(
            x[: self._width], self._problem, horizon, self._cfg, start=t, warm=warm
        )
        self._plan = result.controls
        return float(result.controls[0])


def controller(
    problem: AttackProblem, l: int, cfg: IlqrConfig = IlqrConfig()
) -> Controller:
    """Fresh receding-horizon controller; one instance per closed-loop run."""
    return MpcController(problem, l, cfg)
