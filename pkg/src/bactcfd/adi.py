"""ADI-factored compact Crank-Nicolson scheme: four families of tridiagonal line solves per step."""

from __future__ import annotations

import numpy as np

from .grid import (Grid2D, apply_Hh, compact_combination, mixed_fourth_difference,
                   apply_Lambda)
from .model import ProblemInstance
from .solvers import ThomasFactorization, TridiagonalOperator
from .stepping import SolverState, StateError, TimeStepper, extrapolate_star

__all__ = ["SequencingError", "SweepOperator", "ADIScheme", "factored_expansion"]


class SequencingError(StateError):
    pass


class SweepOperator:
    """One-dimensional factor ``(1 + a tau/4) H_axis - (d tau/2) d2_axis`` of the ADI operator."""

    def __init__(self, grid: Grid2D, axis: str, d: float, a: float, tau: float):
        if axis not in ("x", "y"):
            raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
        self.grid, self.axis, self.d, self.a, self.tau = grid, axis, d, a, tau
        h = grid.hx if axis == "x" else grid.hy
        self.m = grid.Mx if axis == "x" else grid.My
        s = 1.0 + 0.25 * a * tau
        r = 0.5 * d * tau / h**2
        self.off = s / 12.0 - r
        self.diag = s * 10.0 / 12.0 + 2.0 * r
        self.matrix = TridiagonalOperator.constant(self.m - 1, self.off, self.diag, self.off)
        self._factor = ThomasFactorization.of(self.matrix)

    @property
    def ax(self) -> int:
        return 0 if self.axis == "x" else 1

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Apply on every interior line along the axis (all lines across it)."""
        v = self.grid.check(v)
        out = np.zeros_like(v, dtype=float)
        if self.ax == 0:
            out[1:-1, :] = self.diag * v[1:-1, :] + self.off * (v[2:, :] + v[:-2, :])
        else:
            out[:, 1:-1] = self.diag * v[:, 1:-1] + self.off * (v[:, 2:] + v[:, :-2])
        return out

    def solve(self, rhs: np.ndarray, parallel: bool = False) -> np.ndarray:
        """Line solves with zero end values; only interior lines of ``rhs`` are used."""
        out = self.grid.zeros()
        out[1:-1, 1:-1] = self._factor.solve(rhs[1:-1, 1:-1], self.ax, parallel)
        return out


def factored_expansion(grid: Grid2D, v: np.ndarray, d: float, a: float, tau: float) -> np.ndarray:
    """Expanded product of the two sweep factors, evaluated term by term from grid operators."""
    s = 1.0 + 0.25 * a * tau
    return (s * s * apply_Hh(grid, v) - 0.5 * d * tau * s * apply_Lambda(grid, v)
            + 0.25 * d * d * tau * tau * mixed_fourth_difference(grid, v))


class ADIScheme(TimeStepper):
    """CN compact scheme with the 2-D operator replaced by a product of x and y sweeps.

    The factorisation adds ``tau^2 (d^2/4 dxxdyy - d a/8 Lambda + a^2/16 Hh) dt W``
    to each equation; see :meth:`residual` for that equivalent form.
    """

    name = "adi"

    def __init__(self, grid: Grid2D, problem: ProblemInstance, recover: bool = True,
                 parallel: bool = False):
        super().__init__(grid, problem, recover)
        p, tau = self.params, self.tau
        self.parallel = parallel
        self.sweeps_u = (SweepOperator(grid, "x", p.d1, p.a11, tau),
                         SweepOperator(grid, "y", p.d1, p.a11, tau))
        self.sweeps_v = (SweepOperator(grid, "x", p.d2, p.a22, tau),
                         SweepOperator(grid, "y", p.d2, p.a22, tau))

    def factored_apply(self, v: np.ndarray, which: str = "U") -> np.ndarray:
        sx, sy = self.sweeps_u if which == "U" else self.sweeps_v
        return sx.apply(sy.apply(v))

    def _explicit_part(self, W, d, a):
        # factored(W) + d tau Lambda W - a tau Hh W, as one fused combination
        tau = self.tau
        s = 1.0 + 0.25 * a * tau
        return compact_combination(self.grid, W, s * s - a * tau, d * tau - 0.5 * d * tau * s,
                                   0.25 * d * d * tau * tau)

    def rhs(self, state: SolverState, which: str, U_new: np.ndarray | None = None) -> np.ndarray:
        """Right side ``F`` (``which="F"``) or ``G`` for the step from level ``state.n``.

        ``G`` averages ``g`` over the old and new U levels, so ``U_new`` is required.
        """
        p, tau = self.params, self.tau
        src = self.source_avg(state.n + 1)
        if which == "F":
            out = self._explicit_part(state.U, p.d1, p.a11)
            forcing = p.a12 * extrapolate_star(state)
            if src is not None:
                forcing = forcing + src[0]
        elif which == "G":
            if U_new is None:
                raise SequencingError("G needs U at the new level; run the U sweeps first")
            out = self._explicit_part(state.V, p.d2, p.a22)
            forcing = 0.5 * (p.g(U_new) + p.g(state.U))
            if src is not None:
                forcing = forcing + src[1]
        else:
            raise ValueError(f"which must be 'F' or 'G', got {which!r}")
        out += compact_combination(self.grid, tau * forcing, 1.0, 0.0)
        return out

    def step(self, state: SolverState) -> SolverState:
        sx, sy = self.sweeps_u
        U_star = sx.solve(self.rhs(state, "F"), self.parallel)
        U_new = sy.solve(U_star, self.parallel)
        sx, sy = self.sweeps_v
        V_star = sx.solve(self.rhs(state, "G", U_new), self.parallel)
        V_new = sy.solve(V_star, self.parallel)
        return self._finish(state.advanced(U_new, V_new))

    def residual(self, state: SolverState) -> tuple[np.ndarray, np.ndarray]:
        """Nodewise residuals of the perturbed coupled equations between levels ``n-1`` and ``n``.

        Requires recovered ``P``/``Q`` at both levels.
        """
        if state.n < 1 or state.P is None or state.P_prev is None:
            raise StateError("residual needs two levels with recovered auxiliaries")
        grid, p, tau = self.grid, self.params, self.tau
        src = self.source_avg(state.n)
        out = []
        pairs = (
            (state.U, state.U_prev, state.P, state.P_prev, p.d1, p.a11, None),
            (state.V, state.V_prev, state.Q, state.Q_prev, p.d2, p.a22,
             0.5 * (p.g(state.U) + p.g(state.U_prev))),
        )
        for k, (W, W_prev, A, A_prev, d, a, reaction) in enumerate(pairs):
            W_bar = 0.5 * (W + W_prev)
            dt_W = (W - W_prev) / tau
            r = compact_combination(grid, W_bar, a, -d)
            r += compact_combination(grid, dt_W, a * a * tau * tau / 16.0, -d * a * tau * tau / 8.0,
                                     d * d * tau * tau / 4.0)
            forcing = 0.5 * (A + A_prev)
            if reaction is not None:
                forcing = forcing - reaction
            if src is not None:
                forcing = forcing - src[k]
            r += apply_Hh(grid, forcing)
            r[0, :] = r[-1, :] = r[:, 0] = r[:, -1] = 0.0
            out.append(r)
        return out[0], out[1]
