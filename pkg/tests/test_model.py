import math

import numpy as np
import pytest

from bactcfd.grid import Grid2D, apply_Hh
from bactcfd.model import (GKind, InvalidInitialDataError, ModelParams, PARAMSETS, ProblemInstance,
                           accuracy_problem, endemic_problem, manufactured_exact, manufactured_sources,
                           infection_g, initial_aux, noise_n, noise_problem, paramset_problem,
                           sample_initial)


class TestInfection:
    @pytest.mark.parametrize("kind,u,want", [("rational_quadratic", 0.0, 0.0), ("rational_quadratic", 1.0, 0.5),
                                             ("rational_linear", 1.0, 0.5), ("rational_linear", 0.0, 0.0)])
    def test_values(self, kind, u, want):
        assert infection_g(kind, u) == pytest.approx(want)

    def test_linear_domain(self):
        with pytest.raises(ValueError):
            infection_g(GKind.RATIONAL_LINEAR, -1.0)

    @pytest.mark.parametrize("kind", list(GKind))
    def test_lipschitz_on_nonnegatives(self, kind, rng):
        a, b = rng.uniform(0, 10, 10_000), rng.uniform(0, 10, 10_000)
        assert np.all(np.abs(infection_g(kind, a) - infection_g(kind, b)) <= np.abs(a - b) + 1e-15)


class TestParams:
    def test_defaults_all_one(self):
        p = ModelParams()
        assert (p.d1, p.d2, p.a11, p.a12, p.a22) == (1.0, 1.0, 1.0, 1.0, 1.0)

    @pytest.mark.parametrize("kw", [{"d1": -1.0}, {"a11": 0.0}, {"a12": -2.0}, {"a22": 0.0}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            ModelParams(**kw)

    def test_limiting_cases_opt_in(self):
        assert ModelParams(a11=0.0, d1=0.0, validate=False).a11 == 0.0

    def test_paramsets(self):
        assert PARAMSETS["a"]["g_kind"] == GKind.RATIONAL_LINEAR
        assert PARAMSETS["b"]["d1"] == 0.01 and PARAMSETS["c"]["d2"] == 0.001
        assert PARAMSETS["d"]["a12"] == 1.0
        with pytest.raises(ValueError):
            paramset_problem("e")


class TestNoiseAndInitialData:
    def test_noise_values(self):
        assert noise_n(0.0, 0.3) == pytest.approx(0.0, abs=1e-30)
        assert noise_n(0.5, 0.5) == pytest.approx(0.35)

    def test_noise_nonnegative(self, rng):
        x, y = rng.uniform(0, 1, 10_000), rng.uniform(0, 1, 10_000)
        assert np.all(noise_n(x, y) >= 0)

    @pytest.mark.parametrize("problem,centre", [(noise_problem(0.3), 0.65), (endemic_problem(), 0.85)])
    def test_centre_amplitude(self, problem, centre):
        g = Grid2D(16, 16)
        U0, V0 = sample_initial(problem, g)
        assert U0[8, 8] == pytest.approx(centre)
        np.testing.assert_allclose(V0, problem.params.g(U0))
        assert g.is_homogeneous(U0) and g.is_homogeneous(V0)

    def test_nonzero_boundary_rejected(self):
        bad = ProblemInstance(ModelParams(), lambda x, y: 1.0 + 0 * x)
        with pytest.raises(InvalidInitialDataError):
            sample_initial(bad, Grid2D(4, 4))


class TestManufactured:
    def test_exact_values(self):
        u, v = manufactured_exact(0.5, 0.5, 0.0)
        assert u == pytest.approx(1.0)
        assert v == pytest.approx(2 * math.pi**2) and v == pytest.approx(19.7392088, abs=1e-7)
        assert manufactured_exact(0.0, 0.3, 0.7) == (0.0, 0.0)

    def test_sources(self):
        f1, f2 = manufactured_sources(0.5, 0.5, 0.0)
        assert f1 == 0.0
        assert f2 == pytest.approx(4 * math.pi**4 - 0.5) and f2 == pytest.approx(389.136364, abs=1e-6)
        assert manufactured_sources(0.0, 0.4, 0.2)[1] == pytest.approx(0.0, abs=1e-12)

    def test_manufactured_residual(self, rng):
        # u_t = -u and Lap u = -2 pi^2 u for the exact pair
        x, y, t = rng.uniform(0, 1, 100), rng.uniform(0, 1, 100), rng.uniform(0, 1, 100)
        u, v = manufactured_exact(x, y, t)
        f1, f2 = manufactured_sources(x, y, t)
        lap = -2 * math.pi**2
        r1 = -u - (lap * u - u + v + f1)
        r2 = -v - (lap * v - v + infection_g(GKind.RATIONAL_QUADRATIC, u) + f2)
        assert np.max(np.abs(r1)) <= 1e-10 and np.max(np.abs(r2)) <= 1e-10

    def test_exact_requires_sources(self):
        with pytest.raises(ValueError):
            ProblemInstance(ModelParams(), lambda x, y: 0 * x, exact_u=lambda x, y, t: 0 * x,
                            exact_v=lambda x, y, t: 0 * x)

    def test_sources_flag_synced(self):
        assert accuracy_problem().has_sources
        assert not noise_problem().has_sources


class TestInitialAux:
    def test_zero(self):
        g = Grid2D(8, 8)
        for F in initial_aux(g, g.zeros(), g.zeros(), ModelParams()):
            assert not np.any(F)

    def test_inverse_consistency(self, rng):
        g = Grid2D(12, 9)
        U0, V0 = np.abs(g.random_field(rng)), np.abs(g.random_field(rng))
        HhP, HhQ, P, Q = initial_aux(g, U0, V0, ModelParams(d1=0.3, a12=2.0))
        assert np.max(np.abs(apply_Hh(g, P) - HhP)) <= 1e-11 * max(1.0, np.max(np.abs(HhP)))
        assert np.max(np.abs(apply_Hh(g, Q) - HhQ)) <= 1e-11 * max(1.0, np.max(np.abs(HhQ)))

    def test_p0_fourth_order(self):
        pb = accuracy_problem()
        errs = []
        for M in (8, 16):
            g = Grid2D(M, M)
            U0, V0 = sample_initial(pb, g)
            _, _, P0, _ = initial_aux(g, U0, V0, pb.params, pb.sources(g, 0.0))
            p0 = (-2 * math.pi**2 - 1) * U0
            errs.append(np.max(np.abs(P0 - p0)[1:-1, 1:-1]))
        assert 12 <= errs[0] / errs[1] <= 20
