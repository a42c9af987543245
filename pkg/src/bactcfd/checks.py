"""Seeded property suites for the operators, solvers and the ADI factorisation.

Each suite returns :class:`CheckResult` records instead of raising, so the command
line can report all of them and the tests can assert on each one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .adi import ADIScheme, SweepOperator, factored_expansion
from .grid import (Grid2D, _dx_norm, _dy_norm, apply_Hh, apply_Hx, apply_Hy, apply_Lambda,
                   compact_combination, inner_product, l2_norm, mixed_fourth_difference,
                   second_difference)
from .model import noise_problem
from .solvers import TridiagonalOperator, solve_Hh, thomas_solve

__all__ = ["CheckResult", "DEFAULT_GRIDS", "consistency_ratios", "run_all"]

DEFAULT_GRIDS = ((8, 8), (16, 16), (17, 9))
RTOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    where: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name} ({self.where}) {self.detail}".rstrip()


def _label(grid: Grid2D) -> str:
    return f"{grid.Mx}x{grid.My}"


def _worst(pairs: Iterable[tuple[float, float]]) -> float:
    # largest violation of lhs <= rhs, relative to the operands' size
    return max((lhs - rhs) / max(1.0, abs(lhs), abs(rhs)) for lhs, rhs in pairs)


def averaging_bounds(grid: Grid2D, rng: np.random.Generator, samples: int = 100) -> CheckResult:
    """Spectral bounds of the compact averaging operators."""
    viol = []
    for _ in range(samples):
        v = grid.random_field(rng)
        nv = l2_norm(grid, v)
        hxv, hyv = apply_Hx(grid, v), apply_Hy(grid, v)
        for hv in (hxv, hyv):
            hv[0, :] = hv[-1, :] = hv[:, 0] = hv[:, -1] = 0.0
            n_h, ip = l2_norm(grid, hv), inner_product(grid, hv, v)
            viol += [(2 / 3 * nv, n_h), (n_h, nv), (2 / 3 * nv**2, ip), (ip, nv**2)]
        dxv, dyv = _dx_norm(grid, v), _dy_norm(grid, v)
        viol.append((2 / 3 * dxv**2, -inner_product(grid, apply_Hy(grid, second_difference(grid, v, "x")), v)))
        viol.append((2 / 3 * dyv**2, -inner_product(grid, apply_Hx(grid, second_difference(grid, v, "y")), v)))
        n_hh = l2_norm(grid, apply_Hh(grid, v))
        viol += [(4 / 9 * nv, n_hh), (n_hh, nv)]
    w = _worst(viol)
    return CheckResult("averaging-bounds", _label(grid), w <= RTOL, f"worst={w:.2e}")


def cross_signs(grid: Grid2D, rng: np.random.Generator, samples: int = 100) -> CheckResult:
    """Signs of the cross inner products of Hh, Lambda and dxx dyy."""
    viol = []
    for _ in range(samples):
        v = grid.random_field(rng)
        hv, lv, dv = apply_Hh(grid, v), apply_Lambda(grid, v), mixed_fourth_difference(grid, v)
        scale = max(1.0, l2_norm(grid, hv) * l2_norm(grid, lv), l2_norm(grid, dv) * l2_norm(grid, lv))
        viol += [inner_product(grid, hv, lv) / scale, -inner_product(grid, dv, hv) / scale,
                 inner_product(grid, dv, lv) / scale]
    w = max(viol)
    return CheckResult("cross-signs", _label(grid), w <= RTOL, f"worst={w:.2e}")


def _operators(grid: Grid2D):
    return {
        "dxx": lambda v: second_difference(grid, v, "x"),
        "dyy": lambda v: second_difference(grid, v, "y"),
        "dxxdyy": lambda v: mixed_fourth_difference(grid, v),
        "Hx": lambda v: apply_Hx(grid, v),
        "Hy": lambda v: apply_Hy(grid, v),
        "Hh": lambda v: apply_Hh(grid, v),
        "Lambda": lambda v: apply_Lambda(grid, v),
        "combination": lambda v: compact_combination(grid, v, 1.3, -0.2, 0.05),
    }


def symmetry(grid: Grid2D, rng: np.random.Generator, samples: int = 20) -> CheckResult:
    worst = 0.0
    for _ in range(samples):
        v, w = grid.random_field(rng), grid.random_field(rng)
        for op in (apply_Hh, apply_Lambda):
            a, b = inner_product(grid, op(grid, v), w), inner_product(grid, v, op(grid, w))
            worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    return CheckResult("operator-symmetry", _label(grid), worst <= RTOL, f"worst={worst:.2e}")


def linearity(grid: Grid2D, rng: np.random.Generator, samples: int = 5) -> CheckResult:
    worst, who = 0.0, ""
    for _ in range(samples):
        v, w = grid.random_field(rng), grid.random_field(rng)
        alpha, beta = rng.uniform(-2.0, 2.0, size=2)
        for name, op in _operators(grid).items():
            lhs = op(alpha * v + beta * w)
            rhs = alpha * op(v) + beta * op(w)
            err = np.max(np.abs(lhs - rhs)) / max(1.0, np.max(np.abs(rhs)))
            if err > worst:
                worst, who = err, name
    return CheckResult("operator-linearity", _label(grid), worst <= RTOL, f"worst={worst:.2e} {who}")


def thomas_vs_dense(rng: np.random.Generator, sizes=(6, 17, 64, 512)) -> CheckResult:
    worst = 0.0
    for n in sizes:
        lower, upper = rng.uniform(-1, 1, n - 1), rng.uniform(-1, 1, n - 1)
        diag = 2.0 + np.abs(rng.uniform(-1, 1, n)) + np.concatenate([[0], np.abs(lower)]) \
            + np.concatenate([np.abs(upper), [0]])
        A = TridiagonalOperator(lower, diag, upper)
        b = rng.uniform(-1, 1, n)
        x = thomas_solve(A, b)
        dense = A.dense()
        resid = np.max(np.abs(dense @ x - b))
        bound = np.max(np.abs(dense).sum(axis=1)) * np.max(np.abs(x)) + np.max(np.abs(b))
        worst = max(worst, resid / bound)
        if n <= 64:
            worst = max(worst, np.max(np.abs(x - np.linalg.solve(dense, b))))
    return CheckResult("thomas-vs-dense", "n<=512", worst <= RTOL, f"worst={worst:.2e}")


def hh_round_trip(grid: Grid2D, rng: np.random.Generator, samples: int = 10) -> CheckResult:
    worst = 0.0
    for _ in range(samples):
        v = grid.random_field(rng)
        back = solve_Hh(grid, apply_Hh(grid, v))
        again = apply_Hh(grid, solve_Hh(grid, v))
        swapped = solve_Hh(grid, v, order="yx") - solve_Hh(grid, v, order="xy")
        worst = max(worst, np.max(np.abs(back - v)), np.max(np.abs(again - v)),
                    np.max(np.abs(swapped)) * 10.0)
    return CheckResult("solve-Hh-round-trip", _label(grid), worst <= 1e-11, f"worst={worst:.2e}")


def adi_factorization(grid: Grid2D, rng: np.random.Generator, samples: int = 10) -> CheckResult:
    worst = 0.0
    for _ in range(samples):
        d, a, tau = rng.uniform(1e-3, 2.0, size=3)
        sx = SweepOperator(grid, "x", d, a, tau)
        sy = SweepOperator(grid, "y", d, a, tau)
        v = grid.random_field(rng)
        got = sx.apply(sy.apply(v))
        want = factored_expansion(grid, v, d, a, tau)
        worst = max(worst, np.max(np.abs(got - want)) / max(1.0, np.max(np.abs(want))))
    return CheckResult("adi-factorization", _label(grid), worst <= RTOL, f"worst={worst:.2e}")


def adi_residual(grid: Grid2D, rng: np.random.Generator, steps: int = 4) -> CheckResult:
    """The four-sweep step satisfies the perturbed Crank-Nicolson equations."""
    problem = noise_problem(0.3, d1=rng.uniform(0.5, 1.5), d2=rng.uniform(0.5, 1.5),
                            a12=rng.uniform(0.5, 2.0))
    g = Grid2D(grid.Mx, grid.My, 1.0, 64)
    scheme = ADIScheme(g, problem, recover=True)
    state = scheme.initial_state()
    worst = 0.0
    for _ in range(steps):
        state = scheme.step(state)
        rU, rV = scheme.residual(state)
        scale = max(1.0, np.max(np.abs(apply_Hh(g, state.P))), np.max(np.abs(apply_Hh(g, state.Q))),
                    np.max(np.abs(apply_Lambda(g, state.U))), np.max(np.abs(apply_Lambda(g, state.V))))
        worst = max(worst, np.max(np.abs(rU)) / scale, np.max(np.abs(rV)) / scale)
    return CheckResult("adi-residual", _label(grid), worst <= 1e-10, f"worst={worst:.2e}")


def consistency_ratios(M_list=(16, 32, 64)) -> list[float]:
    """``err(M)/err(2M)`` for ``||Hh (Lap w) - Lambda w||`` with ``w = sin(pi x) sin(pi y)``."""
    errs = []
    for M in M_list:
        grid = Grid2D(M, M)
        w = grid.sample(lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
        lap = -2.0 * np.pi**2 * w
        errs.append(l2_norm(grid, apply_Hh(grid, lap) - apply_Lambda(grid, w)))
    return [a / b for a, b in zip(errs, errs[1:])]


def consistency_order(low: float = 14.0, high: float = 18.0) -> CheckResult:
    ratios = consistency_ratios()
    ok = all(low <= r <= high for r in ratios)
    return CheckResult("consistency-order", "M=16,32", ok, "ratios=" + ",".join(f"{r:.3f}" for r in ratios))


def run_all(seed: int = 0, grids=DEFAULT_GRIDS) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = []
    for shape in grids:
        grid = Grid2D(*shape)
        for suite in (averaging_bounds, cross_signs, symmetry, linearity, hh_round_trip, adi_factorization,
                      adi_residual):
            results.append(suite(grid, rng))
    results.append(thomas_vs_dense(rng))
    results.append(consistency_order())
    return results
