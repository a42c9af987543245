"""Linearised, decoupled Crank-Nicolson compact scheme (one 2-D SPD solve per unknown per step)."""

from __future__ import annotations

import numpy as np

from .grid import Grid2D, apply_Hh, compact_combination
from .model import ProblemInstance
from .solvers import IterativeSolveReport, solve_spd
from .stepping import SolverState, StateError, TimeStepper, extrapolate_star

__all__ = ["CNCFDScheme"]


class CNCFDScheme(TimeStepper):
    """Crank-Nicolson in time, ``Hh``/``Lambda`` compact operators in space.

    Each step solves ``((1 + a tau/2) Hh - (d tau/2) Lambda) W = rhs`` first for U,
    then for V (whose right side uses the freshly computed U), by conjugate
    gradients warm-started from the current level.
    """

    name = "cncfd"

    def __init__(self, grid: Grid2D, problem: ProblemInstance, tol: float = 1e-12,
                 max_iter: int | None = None, recover: bool = True):
        super().__init__(grid, problem, recover)
        self.tol = tol
        self.max_iter = max_iter if max_iter is not None else 10 * grid.Mx * grid.My
        self.reports: list[IterativeSolveReport] = []

    def lhs(self, d: float, a: float):
        grid, tau = self.grid, self.tau
        c_H, c_L = 1.0 + 0.5 * a * tau, -0.5 * d * tau

        def apply(w):
            return compact_combination(grid, w, c_H, c_L)

        return apply

    def _solve(self, d, a, rhs, guess):
        x, report = solve_spd(self.lhs(d, a), rhs, self.tol, self.max_iter, x0=guess)
        self.reports.append(report)
        return x

    def step(self, state: SolverState) -> SolverState:
        if state.n == 0:
            return self.first_step(state)
        return self.general_step(state)

    def first_step(self, state: SolverState) -> SolverState:
        """Level 0 -> 1 using the starting auxiliaries ``Hh P0`` and ``Hh Q0``."""
        if state.n != 0:
            raise StateError("first_step expects the initial state")
        if state.HhP0 is None or state.HhQ0 is None:
            raise StateError("first step needs Hh P0 and Hh Q0")
        grid, p, tau = self.grid, self.params, self.tau
        src = self.sources_at(1) if self.problem.has_sources else None

        forcing = p.a12 * extrapolate_star(state)
        if src is not None:
            forcing = forcing + 0.5 * src[0]
        rhs = apply_Hh(grid, state.U + tau * forcing) + 0.5 * tau * state.HhP0
        U1 = self._solve(p.d1, p.a11, rhs, state.U)

        forcing = 0.5 * p.g(U1)
        if src is not None:
            forcing = forcing + 0.5 * src[1]
        rhs = apply_Hh(grid, state.V + tau * forcing) + 0.5 * tau * state.HhQ0
        V1 = self._solve(p.d2, p.a22, rhs, state.V)
        return self._finish(state.advanced(U1, V1))

    def general_step(self, state: SolverState) -> SolverState:
        """Level n -> n+1 for n >= 1."""
        if state.n < 1:
            raise StateError("general_step needs n >= 1; use first_step")
        grid, p, tau = self.grid, self.params, self.tau
        src = self.source_avg(state.n + 1)

        forcing = p.a12 * extrapolate_star(state)
        if src is not None:
            forcing = forcing + src[0]
        rhs = compact_combination(grid, state.U, 1.0 - 0.5 * p.a11 * tau, 0.5 * p.d1 * tau)
        rhs += apply_Hh(grid, tau * forcing)
        U_new = self._solve(p.d1, p.a11, rhs, state.U)

        forcing = 0.5 * (p.g(U_new) + p.g(state.U))
        if src is not None:
            forcing = forcing + src[1]
        rhs = compact_combination(grid, state.V, 1.0 - 0.5 * p.a22 * tau, 0.5 * p.d2 * tau)
        rhs += apply_Hh(grid, tau * forcing)
        V_new = self._solve(p.d2, p.a22, rhs, state.V)
        return self._finish(state.advanced(U_new, V_new))
