"""State bundle and machinery shared by the two time-stepping schemes."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .grid import Grid2D
from .model import ProblemInstance, initial_aux, sample_initial

__all__ = ["StateError", "SolverState", "extrapolate_star", "recover_aux", "TimeStepper"]


class StateError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverState:
    """Solution history at time level ``n``.

    ``*_prev`` hold level ``n-1`` and ``V_prev2`` level ``n-2``; they are None
    where the level does not exist. ``P``/``Q`` are None when auxiliary recovery
    is switched off.
    """

    n: int
    U: np.ndarray
    V: np.ndarray
    U_prev: Optional[np.ndarray] = None
    V_prev: Optional[np.ndarray] = None
    V_prev2: Optional[np.ndarray] = None
    P: Optional[np.ndarray] = None
    Q: Optional[np.ndarray] = None
    P_prev: Optional[np.ndarray] = None
    Q_prev: Optional[np.ndarray] = None
    HhP0: Optional[np.ndarray] = None
    HhQ0: Optional[np.ndarray] = None

    def advanced(self, U_new: np.ndarray, V_new: np.ndarray) -> "SolverState":
        return replace(self, n=self.n + 1, U=U_new, V=V_new, U_prev=self.U, V_prev=self.V,
                       V_prev2=self.V_prev, P_prev=self.P, Q_prev=self.Q, P=None, Q=None)


def extrapolate_star(state: SolverState) -> np.ndarray:
    """Linearised coupling value used when stepping from level ``n`` to ``n+1``.

    ``V^0`` for the first step, ``3/2 V^n - 1/2 V^{n-1}`` afterwards.
    """
    if state.n == 0:
        return state.V
    if state.V_prev is None:
        raise StateError(f"extrapolation at level {state.n} needs the previous V")
    return 1.5 * state.V - 0.5 * state.V_prev


def _star_used_for(state: SolverState) -> np.ndarray:
    # the value extrapolate_star returned when the state was one level behind
    if state.n == 1:
        return state.V_prev
    if state.V_prev2 is None:
        raise StateError(f"level {state.n} is missing V^(n-2)")
    return 1.5 * state.V_prev - 0.5 * state.V_prev2


def recover_aux(state: SolverState, a12: float, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Unwind the time averages ``(P^n + P^{n-1})/2 = dt U - a12 V*`` and ``(Q^n + Q^{n-1})/2 = dt V``."""
    if state.n < 1 or state.U_prev is None or state.V_prev is None:
        raise StateError("auxiliary recovery needs two consecutive levels")
    if state.P_prev is None or state.Q_prev is None:
        raise StateError("auxiliary recovery needs P and Q at the previous level")
    P = 2.0 * ((state.U - state.U_prev) / tau - a12 * _star_used_for(state)) - state.P_prev
    Q = 2.0 * (state.V - state.V_prev) / tau - state.Q_prev
    return P, Q


class TimeStepper:
    """Common set-up for schemes advancing ``(U, V)`` on a fixed grid and step."""

    name = "base"

    def __init__(self, grid: Grid2D, problem: ProblemInstance, recover: bool = True):
        self.grid = grid
        self.problem = problem
        self.params = problem.params
        self.tau = grid.tau
        self.recover = recover
        self._src_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def sources_at(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Sources at level ``n``; the last two levels are kept, so each is sampled once."""
        if n not in self._src_cache:
            if len(self._src_cache) >= 2:
                del self._src_cache[min(self._src_cache)]
            self._src_cache[n] = self.problem.sources(self.grid, self.grid.t(n))
        return self._src_cache[n]

    def source_avg(self, n_new: int):
        """Trapezoidal source average over ``[t_{n-1}, t_n]``, or None without sources."""
        if not self.problem.has_sources:
            return None
        a1, a2 = self.sources_at(n_new - 1)
        b1, b2 = self.sources_at(n_new)
        return 0.5 * (a1 + b1), 0.5 * (a2 + b2)

    def initial_state(self) -> SolverState:
        U0, V0 = sample_initial(self.problem, self.grid)
        f0 = self.problem.sources(self.grid, 0.0) if self.problem.has_sources else None
        HhP0, HhQ0, P0, Q0 = initial_aux(self.grid, U0, V0, self.params, f0)
        return SolverState(0, U0, V0, P=P0, Q=Q0, HhP0=HhP0, HhQ0=HhQ0)

    def step(self, state: SolverState) -> SolverState:
        raise NotImplementedError

    def _finish(self, state: SolverState) -> SolverState:
        if self.recover and state.P_prev is not None:
            P, Q = recover_aux(state, self.params.a12, self.tau)
            return replace(state, P=P, Q=Q)
        return state

    def run(self, state: SolverState | None = None, steps: int | None = None,
            callback: Callable[[SolverState], None] | None = None) -> SolverState:
        """Advance ``steps`` levels (default: up to ``grid.N``)."""
        if state is None:
            state = self.initial_state()
        if steps is None:
            steps = self.grid.N - state.n
        if callback is not None:
            callback(state)
        for _ in range(steps):
            state = self.step(state)
            if callback is not None:
                callback(state)
        return state
