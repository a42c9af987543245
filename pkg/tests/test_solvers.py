import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bactcfd.grid import Grid2D, apply_Hh, compact_combination
from bactcfd.solvers import (NonConvergenceError, SingularSystemError, ThomasFactorization,
                             TridiagonalOperator, compact_line_operator, solve_Hh, solve_spd,
                             thomas_solve)


def dominant(rng, n):
    lower, upper = rng.uniform(-1, 1, n - 1), rng.uniform(-1, 1, n - 1)
    diag = 0.5 + rng.uniform(0, 1, n) + np.r_[0, np.abs(lower)] + np.r_[np.abs(upper), 0]
    diag *= rng.choice([-1.0, 1.0])
    return TridiagonalOperator(lower, diag, upper)


class TestThomas:
    def test_identity(self):
        A = TridiagonalOperator.constant(3, 0.0, 1.0, 0.0)
        np.testing.assert_array_equal(thomas_solve(A, [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])

    def test_two_by_two(self):
        A = TridiagonalOperator(np.array([1.0]), np.array([2.0, 2.0]), np.array([1.0]))
        np.testing.assert_allclose(thomas_solve(A, [3.0, 3.0]), [1.0, 1.0], rtol=1e-15)

    def test_six_by_six_against_dense(self, rng):
        A = dominant(rng, 6)
        b = rng.uniform(-1, 1, 6)
        assert np.max(np.abs(thomas_solve(A, b) - np.linalg.solve(A.dense(), b))) <= 1e-12

    def test_zero_pivot(self):
        A = TridiagonalOperator(np.array([1.0]), np.array([0.0, 1.0]), np.array([1.0]))
        with pytest.raises(SingularSystemError):
            thomas_solve(A, [1.0, 1.0])

    def test_length_checks(self):
        with pytest.raises(ValueError):
            TridiagonalOperator(np.zeros(2), np.ones(2), np.zeros(1))
        A = TridiagonalOperator.constant(4, 0.1, 1.0, 0.1)
        with pytest.raises(ValueError):
            thomas_solve(A, np.ones(3))

    def test_matvec_matches_dense(self, rng):
        A = dominant(rng, 7)
        X = rng.uniform(-1, 1, (7, 3))
        np.testing.assert_allclose(A.matvec(X), A.dense() @ X, rtol=1e-14)
        np.testing.assert_allclose(A.matvec(X.T, axis=1), (A.dense() @ X).T, rtol=1e-14)

    def test_solve_along_either_axis(self, rng):
        A = dominant(rng, 5)
        F = ThomasFactorization.of(A)
        R = rng.uniform(-1, 1, (5, 4))
        np.testing.assert_allclose(A.dense() @ F.solve(R, axis=0), R, atol=1e-13)
        np.testing.assert_allclose(F.solve(R.T, axis=1), F.solve(R, axis=0).T, atol=1e-15)

    def test_parallel_bit_identical(self, rng):
        A = dominant(rng, 33)
        R = rng.uniform(-1, 1, (33, 40))
        F = A.factorize()
        assert np.array_equal(F.solve(R, parallel=True), F.solve(R, parallel=False))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 512), st.integers(0, 2**32 - 1))
def test_thomas_residual_bound(n, seed):
    rng = np.random.default_rng(seed)
    if n == 1:
        A = TridiagonalOperator(np.zeros(0), np.array([rng.uniform(0.5, 2)]), np.zeros(0))
    else:
        A = dominant(rng, n)
    b = rng.uniform(-1, 1, n)
    x = thomas_solve(A, b)
    D = A.dense()
    bound = 1e-12 * (np.max(np.abs(D).sum(axis=1)) * np.max(np.abs(x)) + np.max(np.abs(b)))
    assert np.max(np.abs(D @ x - b)) <= bound


class TestSolveHh:
    def test_zero(self, grid):
        assert not np.any(solve_Hh(grid, grid.zeros()))

    def test_round_trip_both_ways(self, grid, rng):
        v = grid.random_field(rng)
        assert np.max(np.abs(solve_Hh(grid, apply_Hh(grid, v)) - v)) <= 1e-11
        assert np.max(np.abs(apply_Hh(grid, solve_Hh(grid, v)) - v)) <= 1e-11

    def test_order_independent(self, grid, rng):
        v = grid.random_field(rng)
        assert np.max(np.abs(solve_Hh(grid, v, "xy") - solve_Hh(grid, v, "yx"))) <= 1e-12

    def test_bad_order(self, grid):
        with pytest.raises(ValueError):
            solve_Hh(grid, grid.zeros(), order="zz")

    def test_line_operator(self):
        D = compact_line_operator(3).dense()
        np.testing.assert_allclose(D, np.array([[10, 1, 0], [1, 10, 1], [0, 1, 10]]) / 12)


def cn_operator(grid, d=1.0, a=1.0, tau=1 / 64):
    return lambda w: compact_combination(grid, w, 1 + a * tau / 2, -d * tau / 2)


def dense_of(grid, apply):
    # columns of the operator restricted to interior unknowns
    idx = [(i, j) for i in range(1, grid.Mx) for j in range(1, grid.My)]
    A = np.zeros((len(idx), len(idx)))
    for k, (i, j) in enumerate(idx):
        e = grid.zeros()
        e[i, j] = 1.0
        A[:, k] = apply(e)[1:-1, 1:-1].ravel()
    return A


class TestSolveSPD:
    def test_zero_rhs(self):
        g = Grid2D(6, 6)
        x, rep = solve_spd(cn_operator(g), g.zeros())
        assert rep.iterations == 0 and not np.any(x)

    def test_identity(self, rng):
        g = Grid2D(6, 6)
        b = g.random_field(rng)
        x, rep = solve_spd(lambda w: w.copy(), b)
        assert rep.iterations <= 1
        np.testing.assert_allclose(x, b, atol=1e-14)

    def test_dense_oracle_cn_operator(self, rng):
        g = Grid2D(8, 8)
        apply = cn_operator(g)
        A = dense_of(g, apply)
        assert A.shape == (49, 49)
        np.testing.assert_allclose(A, A.T, atol=1e-12)
        assert np.min(np.linalg.eigvalsh(A)) > 0
        b = g.random_field(rng)
        x, rep = solve_spd(apply, b)
        assert rep.converged
        direct = np.linalg.solve(A, b[1:-1, 1:-1].ravel())
        assert np.max(np.abs(x[1:-1, 1:-1].ravel() - direct)) <= 1e-10

    def test_guess_invariance(self, rng):
        g = Grid2D(12, 10)
        apply = cn_operator(g, tau=0.01)
        b = g.random_field(rng) * 5
        tol = 1e-12
        x1, _ = solve_spd(apply, b, tol)
        x2, _ = solve_spd(apply, b, tol, x0=g.random_field(rng))
        e = x1 - x2
        energy = np.sqrt(np.vdot(e, apply(e)))
        assert energy <= 2 * tol * max(1.0, np.linalg.norm(b))

    def test_nonconvergence_carries_iterate(self, rng):
        g = Grid2D(16, 16)
        b = g.random_field(rng)
        with pytest.raises(NonConvergenceError) as info:
            solve_spd(cn_operator(g, tau=1.0), b, max_iter=2)
        assert info.value.iterations == 2 and info.value.x.shape == g.shape
        assert info.value.residual_norm > 0

    def test_indefinite_detected(self, rng):
        g = Grid2D(6, 6)
        with pytest.raises(NonConvergenceError):
            solve_spd(lambda w: -w, g.random_field(rng))

    def test_rejects_nonpositive_tol(self):
        g = Grid2D(4, 4)
        with pytest.raises(ValueError):
            solve_spd(lambda w: w, g.zeros(), tol=0.0)
