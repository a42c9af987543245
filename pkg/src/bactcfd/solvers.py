"""Tridiagonal (Thomas) solves, line sweeps, Hh inversion and matrix-free CG."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numba as nb
import numpy as np

from .grid import Grid2D

__all__ = [
    "SingularSystemError",
    "NonConvergenceError",
    "TridiagonalOperator",
    "ThomasFactorization",
    "IterativeSolveReport",
    "thomas_solve",
    "compact_line_operator",
    "solve_Hh",
    "solve_spd",
]


class SingularSystemError(ArithmeticError):
    pass


class NonConvergenceError(RuntimeError):
    """Raised by :func:`solve_spd`; carries the best iterate and its residual."""

    def __init__(self, message, x, residual_norm, iterations):
        super().__init__(message)
        self.x = x
        self.residual_norm = residual_norm
        self.iterations = iterations


@dataclass(frozen=True)
class TridiagonalOperator:
    """``n x n`` tridiagonal matrix; ``lower[k]`` sits at ``(k+1, k)``, ``upper[k]`` at ``(k, k+1)``."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        n = len(self.diag)
        if len(self.lower) != n - 1 or len(self.upper) != n - 1:
            raise ValueError("off-diagonals must have length n - 1")

    @classmethod
    def constant(cls, n: int, lower: float, diag: float, upper: float) -> "TridiagonalOperator":
        return cls(np.full(n - 1, float(lower)), np.full(n, float(diag)), np.full(n - 1, float(upper)))

    @property
    def n(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1)

    def matvec(self, x: np.ndarray, axis: int = 0) -> np.ndarray:
        """Apply along ``axis`` (lines are the 1-D slices along that axis)."""
        x = np.moveaxis(np.asarray(x, dtype=float), axis, 0)
        shape = (-1,) + (1,) * (x.ndim - 1)
        y = self.diag.reshape(shape) * x
        y[1:] += self.lower.reshape(shape) * x[:-1]
        y[:-1] += self.upper.reshape(shape) * x[1:]
        return np.moveaxis(y, 0, axis)

    def factorize(self) -> "ThomasFactorization":
        return ThomasFactorization.of(self)


@nb.njit(cache=True)
def _forward_back(lower, cprime, inv_piv, rhs, out):
    # one independent system per row of rhs; rows are contiguous lines
    m, n = rhs.shape
    for line in nb.prange(m):
        r = rhs[line]
        x = out[line]
        x[0] = r[0] * inv_piv[0]
        for k in range(1, n):
            x[k] = (r[k] - lower[k - 1] * x[k - 1]) * inv_piv[k]
        for k in range(n - 2, -1, -1):
            x[k] -= cprime[k] * x[k + 1]


_forward_back_parallel = nb.njit(parallel=True, cache=True)(_forward_back.py_func)


@dataclass(frozen=True)
class ThomasFactorization:
    """Forward-elimination coefficients of a tridiagonal matrix, reusable across right-hand sides."""

    lower: np.ndarray
    cprime: np.ndarray
    inv_piv: np.ndarray

    @classmethod
    def of(cls, A: TridiagonalOperator) -> "ThomasFactorization":
        n = A.n
        cprime = np.zeros(max(n - 1, 0))
        inv_piv = np.zeros(n)
        scale = max(float(np.max(np.abs(A.diag))), 1.0)
        piv = A.diag[0]
        for k in range(n):
            if k > 0:
                piv = A.diag[k] - A.lower[k - 1] * cprime[k - 1]
            if abs(piv) <= 1e-300 or abs(piv) <= 1e-15 * scale:
                raise SingularSystemError(f"zero pivot at row {k}")
            inv_piv[k] = 1.0 / piv
            if k < n - 1:
                cprime[k] = A.upper[k] * inv_piv[k]
        return cls(np.ascontiguousarray(A.lower, dtype=float), cprime, inv_piv)

    def solve(self, rhs: np.ndarray, axis: int = 0, parallel: bool = False) -> np.ndarray:
        """Solve every line of ``rhs`` along ``axis``."""
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[axis] != len(self.inv_piv):
            raise ValueError(f"rhs has {rhs.shape[axis]} rows along axis {axis}, expected {len(self.inv_piv)}")
        moved = np.moveaxis(rhs, axis, -1)
        flat = np.ascontiguousarray(moved.reshape(-1, moved.shape[-1]))
        out = np.empty_like(flat)
        kernel = _forward_back_parallel if parallel else _forward_back
        kernel(self.lower, self.cprime, self.inv_piv, flat, out)
        return np.moveaxis(out.reshape(moved.shape), -1, axis)


def thomas_solve(A: TridiagonalOperator, rhs) -> np.ndarray:
    """Solve ``A x = rhs`` by one forward elimination and back substitution, no pivoting.

    ``rhs`` may be 2-D, in which case each column is solved independently.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != A.n:
        raise ValueError(f"rhs length {rhs.shape[0]} does not match system size {A.n}")
    if rhs.ndim == 1:
        return A.factorize().solve(rhs[:, None])[:, 0]
    return A.factorize().solve(rhs)


def compact_line_operator(n_interior: int) -> TridiagonalOperator:
    """``I + h^2/12 d2`` restricted to the interior of one line with zero end values."""
    return TridiagonalOperator.constant(n_interior, 1.0 / 12.0, 10.0 / 12.0, 1.0 / 12.0)


def solve_Hh(grid: Grid2D, rhs: np.ndarray, order: str = "xy", parallel: bool = False) -> np.ndarray:
    """Return ``v`` in V_h^0 with ``Hh v = rhs`` on interior nodes.

    ``order="xy"`` inverts ``Hx`` along x-lines first, then ``Hy`` along y-lines.
    """
    rhs = grid.check(rhs)
    fx = compact_line_operator(grid.Mx - 1).factorize()
    fy = compact_line_operator(grid.My - 1).factorize()
    v = grid.zeros()
    inner = rhs[1:-1, 1:-1]
    if order == "xy":
        v[1:-1, 1:-1] = fy.solve(fx.solve(inner, 0, parallel), 1, parallel)
    elif order == "yx":
        v[1:-1, 1:-1] = fx.solve(fy.solve(inner, 1, parallel), 0, parallel)
    else:
        raise ValueError(f"order must be 'xy' or 'yx', got {order!r}")
    return v


@dataclass(frozen=True)
class IterativeSolveReport:
    iterations: int
    residual_norm: float
    converged: bool


def solve_spd(apply: Callable[[np.ndarray], np.ndarray], rhs: np.ndarray, tol: float = 1e-12,
              max_iter: int | None = None, x0: np.ndarray | None = None):
    """Unpreconditioned conjugate gradients for a symmetric positive-definite ``apply``.

    Vectors are full grid fields with zero boundary; ``apply`` must keep the boundary
    at zero. Stops when ``||apply(x) - rhs|| <= tol * max(1, ||rhs||)`` (Euclidean
    norm over nodes). Returns ``(x, IterativeSolveReport)``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = 10 * rhs.size
    target = tol * max(1.0, float(np.sqrt(np.vdot(rhs, rhs))))

    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=float)
    r = rhs - apply(x) if x0 is not None else rhs.copy()
    rr = float(np.vdot(r, r))
    if np.sqrt(rr) <= target:
        return x, IterativeSolveReport(0, float(np.sqrt(rr)), True)
    p = r.copy()
    for it in range(1, max_iter + 1):
        Ap = apply(p)
        pAp = float(np.vdot(p, Ap))
        if pAp <= 0.0:
            raise NonConvergenceError("operator is not positive definite", x, np.sqrt(rr), it)
        alpha = rr / pAp
        x += alpha * p
        r -= alpha * Ap
        rr_new = float(np.vdot(r, r))
        if np.sqrt(rr_new) <= target:
            # guard against drift of the recursive residual
            res = float(np.linalg.norm(rhs - apply(x)))
            if res <= target:
                return x, IterativeSolveReport(it, res, True)
            r = rhs - apply(x)
            rr_new = float(np.vdot(r, r))
            p = r.copy()
            rr = rr_new
            continue
        p *= rr_new / rr
        p += r
        rr = rr_new
    res = float(np.linalg.norm(rhs - apply(x)))
    raise NonConvergenceError(f"CG did not reach {target:.3e} in {max_iter} iterations "
                              f"(residual {res:.3e})", x, res, max_iter)
