"""Uniform grids on the unit square, difference/compact operators and discrete norms.

Grid functions are plain ``numpy`` arrays of shape ``(Mx + 1, My + 1)`` holding
every node, boundary included; ``v[i, j]`` is the value at ``(x_i, y_j)``.
Operators that are only defined on interior nodes return arrays whose boundary
entries are zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numba as nb
import numpy as np

__all__ = [
    "Grid2D",
    "NormSuite",
    "second_difference",
    "mixed_fourth_difference",
    "apply_Hx",
    "apply_Hy",
    "apply_Hh",
    "apply_Lambda",
    "compact_combination",
    "inner_product",
    "l2_norm",
    "max_norm",
    "staggered_mixed_norm",
    "norms",
]


@dataclass(frozen=True)
class Grid2D:
    """Tensor-product grid on ``[0, 1]^2`` with a uniform time partition of ``[0, T]``."""

    Mx: int
    My: int
    T: float = 1.0
    N: int = 1

    def __post_init__(self):
        if int(self.Mx) != self.Mx or int(self.My) != self.My:
            raise ValueError("node counts must be integers")
        if self.Mx < 2 or self.My < 2:
            raise ValueError(f"need Mx, My >= 2, got {self.Mx}x{self.My}")
        if not self.T > 0:
            raise ValueError(f"final time must be positive, got {self.T}")
        if self.N < 1:
            raise ValueError(f"need N >= 1, got {self.N}")

    @classmethod
    def square(cls, M: int, T: float = 1.0, tau: float | None = None) -> "Grid2D":
        """Square grid with ``Mx = My = M``; ``tau`` defaults to ``h**2``."""
        if tau is None:
            tau = 1.0 / M**2
        N = int(round(T / tau))
        if N < 1 or abs(N * tau - T) > 1e-9 * max(T, 1.0):
            raise ValueError(f"T={T} is not an integer multiple of tau={tau}")
        return cls(M, M, T, N)

    @property
    def hx(self) -> float:
        return 1.0 / self.Mx

    @property
    def hy(self) -> float:
        return 1.0 / self.My

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)

    @property
    def tau(self) -> float:
        return self.T / self.N

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Mx + 1, self.My + 1)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.Mx + 1) * self.hx

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.My + 1) * self.hy

    def t(self, n: int) -> float:
        return n * self.tau

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def sample(self, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
        X, Y = self.mesh()
        return np.asarray(func(X, Y), dtype=float) * np.ones(self.shape)

    def random_field(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform ``[-1, 1]`` values on interior nodes, zero on the boundary."""
        v = self.zeros()
        v[1:-1, 1:-1] = rng.uniform(-1.0, 1.0, size=(self.Mx - 1, self.My - 1))
        return v

    def check(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape != self.shape:
            raise ValueError(f"field of shape {v.shape} does not live on a {self.shape} grid")
        return v

    def is_homogeneous(self, v: np.ndarray, atol: float = 0.0) -> bool:
        """True when ``v`` vanishes on the boundary node set (``v`` in V_h^0)."""
        v = self.check(v)
        edges = np.concatenate([v[0, :], v[-1, :], v[:, 0], v[:, -1]])
        return bool(np.all(np.abs(edges) <= atol))

    def refined(self) -> "Grid2D":
        """Grid with halved spacings and a quartered time step."""
        return Grid2D(2 * self.Mx, 2 * self.My, self.T, 4 * self.N)


@dataclass(frozen=True)
class NormSuite:
    l2: float
    max: float
    h1_semi: float
    h2_semi: float
    staggered_xy: float

    @property
    def h1(self) -> float:
        return float(np.hypot(self.l2, self.h1_semi))

    @property
    def h2(self) -> float:
        return float(np.sqrt(self.l2**2 + self.h1_semi**2 + self.h2_semi**2))


def _axis(axis) -> int:
    if axis in ("x", 0):
        return 0
    if axis in ("y", 1):
        return 1
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def second_difference(grid: Grid2D, v: np.ndarray, axis="x") -> np.ndarray:
    """Centred second difference along ``axis`` on interior nodes."""
    v = grid.check(v)
    ax = _axis(axis)
    out = np.zeros_like(v, dtype=float)
    c = v[1:-1, 1:-1]
    if ax == 0:
        out[1:-1, 1:-1] = (v[2:, 1:-1] - 2.0 * c + v[:-2, 1:-1]) / grid.hx**2
    else:
        out[1:-1, 1:-1] = (v[1:-1, 2:] - 2.0 * c + v[1:-1, :-2]) / grid.hy**2
    return out


def mixed_fourth_difference(grid: Grid2D, v: np.ndarray) -> np.ndarray:
    return second_difference(grid, second_difference(grid, v, "x"), "y")


def apply_Hx(grid: Grid2D, v: np.ndarray) -> np.ndarray:
    """``(I + hx^2/12 dxx)`` on rows ``1 <= i <= Mx-1`` (all ``j``); identity on ``i = 0, Mx``."""
    v = grid.check(v)
    out = np.array(v, dtype=float)
    out[1:-1, :] += (v[2:, :] - 2.0 * v[1:-1, :] + v[:-2, :]) / 12.0
    return out


def apply_Hy(grid: Grid2D, v: np.ndarray) -> np.ndarray:
    v = grid.check(v)
    out = np.array(v, dtype=float)
    out[:, 1:-1] += (v[:, 2:] - 2.0 * v[:, 1:-1] + v[:, :-2]) / 12.0
    return out


def apply_Hh(grid: Grid2D, v: np.ndarray) -> np.ndarray:
    return apply_Hx(grid, apply_Hy(grid, v))


def apply_Lambda(grid: Grid2D, v: np.ndarray) -> np.ndarray:
    """Compact Laplacian ``Hy dxx + Hx dyy``; zero on the boundary."""
    out = apply_Hy(grid, second_difference(grid, v, "x"))
    out += apply_Hx(grid, second_difference(grid, v, "y"))
    out[0, :] = out[-1, :] = 0.0
    out[:, 0] = out[:, -1] = 0.0
    return out


def compact_combination(grid: Grid2D, v: np.ndarray, c_H: float, c_L: float,
                        c_D: float = 0.0, out: np.ndarray | None = None) -> np.ndarray:
    """``c_H*Hh v + c_L*Lambda v + c_D*dxx dyy v`` on interior nodes, for ``v`` in V_h^0.

    Fused form of the three operators (one pass over three stencils); this is the
    hot path of both time-stepping schemes.
    """
    if out is None:
        out = np.zeros(grid.shape)
    hx2, hy2 = grid.hx**2, grid.hy**2
    # Hh = I + hx2/12 dxx + hy2/12 dyy + hx2 hy2/144 dxxdyy
    # Lambda = dxx + dyy + (hx2 + hy2)/12 dxxdyy
    bx = (c_H * hx2 / 12.0 + c_L) / hx2
    by = (c_H * hy2 / 12.0 + c_L) / hy2
    cc = (c_H * hx2 * hy2 / 144.0 + c_L * (hx2 + hy2) / 12.0 + c_D) / (hx2 * hy2)
    _nine_point(np.ascontiguousarray(v, dtype=float), c_H - 2.0 * bx - 2.0 * by + 4.0 * cc,
                bx - 2.0 * cc, by - 2.0 * cc, cc, out)
    return out


@nb.njit(cache=True)
def _nine_point(v, w0, wx, wy, wc, out):
    # interior only; boundary rows of v enter as zeros for v in V_h^0
    mx, my = v.shape
    for i in range(1, mx - 1):
        for j in range(1, my - 1):
            out[i, j] = (w0 * v[i, j]
                         + wx * (v[i + 1, j] + v[i - 1, j])
                         + wy * (v[i, j + 1] + v[i, j - 1])
                         + wc * (v[i + 1, j + 1] + v[i + 1, j - 1] + v[i - 1, j + 1] + v[i - 1, j - 1]))


def inner_product(grid: Grid2D, v: np.ndarray, w: np.ndarray) -> float:
    v, w = grid.check(v), grid.check(w)
    return float(grid.hx * grid.hy * np.sum(v[1:-1, 1:-1] * w[1:-1, 1:-1]))


def l2_norm(grid: Grid2D, v: np.ndarray) -> float:
    v = grid.check(v)
    return float(np.sqrt(grid.hx * grid.hy * np.sum(v[1:-1, 1:-1] ** 2)))


def max_norm(grid: Grid2D, v: np.ndarray) -> float:
    """Maximum over interior nodes only."""
    v = grid.check(v)
    return float(np.max(np.abs(v[1:-1, 1:-1])))


def staggered_mixed_norm(grid: Grid2D, v: np.ndarray, order: str = "xy") -> float:
    """``||dx dy v||_xy`` over cell centres; ``order`` picks which difference goes first."""
    v = grid.check(v)
    if order == "xy":
        dy = (v[:, 1:] - v[:, :-1]) / grid.hy
        dd = (dy[1:, :] - dy[:-1, :]) / grid.hx
    elif order == "yx":
        dx = (v[1:, :] - v[:-1, :]) / grid.hx
        dd = (dx[:, 1:] - dx[:, :-1]) / grid.hy
    else:
        raise ValueError(f"order must be 'xy' or 'yx', got {order!r}")
    return float(np.sqrt(grid.hx * grid.hy * np.sum(dd**2)))


def _dx_norm(grid: Grid2D, v: np.ndarray) -> float:
    dx = (v[1:, 1:-1] - v[:-1, 1:-1]) / grid.hx
    return float(np.sqrt(grid.hx * grid.hy * np.sum(dx**2)))


def _dy_norm(grid: Grid2D, v: np.ndarray) -> float:
    dy = (v[1:-1, 1:] - v[1:-1, :-1]) / grid.hy
    return float(np.sqrt(grid.hx * grid.hy * np.sum(dy**2)))


def norms(grid: Grid2D, v: np.ndarray) -> NormSuite:
    v = grid.check(v)
    mixed = staggered_mixed_norm(grid, v, "xy")
    h1_semi = np.hypot(_dx_norm(grid, v), _dy_norm(grid, v))
    dxx = l2_norm(grid, second_difference(grid, v, "x"))
    dyy = l2_norm(grid, second_difference(grid, v, "y"))
    h2_semi = np.sqrt(dxx**2 + dyy**2 + 2.0 * mixed**2)
    return NormSuite(
        l2=l2_norm(grid, v),
        max=max_norm(grid, v),
        h1_semi=float(h1_semi),
        h2_semi=float(h2_semi),
        staggered_xy=mixed,
    )
