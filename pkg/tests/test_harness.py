import math

import numpy as np
import pytest

from bactcfd import harness
from bactcfd.grid import Grid2D
from bactcfd.harness import (ConfigError, ConvergenceRow, ConvergenceTable, RunConfig, StudyError,
                             estimated_order, restrict_fine_to_coarse, run_cauchy_study,
                             run_convergence_study, run_simulation, write_outputs)
from bactcfd.model import ModelParams, ProblemInstance


class TestOrder:
    @pytest.mark.parametrize("pair", [(5.60e-06, 3.49e-07), (2.96e-06, 1.85e-07)])
    def test_published_pairs(self, pair):
        assert estimated_order(*pair) == pytest.approx(4.00, abs=0.01)

    def test_exact(self):
        assert estimated_order(16, 1) == 4.0

    @pytest.mark.parametrize("pair", [(0.0, 1.0), (1.0, -1.0)])
    def test_rejects_nonpositive(self, pair):
        with pytest.raises(ValueError):
            estimated_order(*pair)


class TestTable:
    def test_empty_header_only(self, tmp_path):
        path = write_outputs(ConvergenceTable(), tmp_path)[0]
        assert path.read_text() == harness.TABLE_HEADER + "\n"

    def test_orders_recomputed_from_file(self, tmp_path):
        t = ConvergenceTable()
        for M, e in ((10, 3.1e-3), (20, 2.0e-4), (40, 1.3e-5)):
            t.add(ConvergenceRow(M, e, 2 * e, 30 * e, 60 * e, 0.5))
        lines = write_outputs(t, tmp_path)[0].read_text().splitlines()
        first = lines[1].split(",")
        assert len(first) == 10 and first[2] == "" and first[4] == ""
        rows = [line.split(",") for line in lines[1:]]
        for k in (1, 2):
            for col in (1, 3, 5, 7):
                want = estimated_order(float(rows[k - 1][col]), float(rows[k][col]))
                assert float(rows[k][col + 1]) == want

    def test_convergence_file_shape(self, tmp_path):
        t = run_convergence_study("cncfd", [4, 8])
        lines = write_outputs(t, tmp_path)[0].read_text().splitlines()
        assert lines[0] == harness.TABLE_HEADER
        assert len([c for c in lines[2].split(",")[1:-1] if c]) == 8


class TestStudies:
    def test_small_convergence(self):
        t = run_convergence_study("adi", [8, 16])
        assert [r.M for r in t.rows] == [8, 16]
        assert all(o > 3.5 for o in t.orders("max_u")[1:])

    def test_partial_table_on_failure(self, monkeypatch):
        with pytest.raises(StudyError) as info:
            run_convergence_study("cncfd", [4, 8], tol=1e-300)
        assert info.value.table.rows == []
        real = harness.make_scheme

        def flaky(name, grid, *args, **kw):
            if grid.Mx == 8:
                raise ArithmeticError("boom")
            return real(name, grid, *args, **kw)

        monkeypatch.setattr(harness, "make_scheme", flaky)
        with pytest.raises(StudyError) as info:
            run_convergence_study("adi", [4, 8, 16])
        assert [r.M for r in info.value.table.rows] == [4]

    def test_cauchy_small(self):
        t = run_cauchy_study([8, 16])
        assert [r.M for r in t.rows] == [8, 16] and all(r.l2_u > 0 for r in t.rows)


class TestRestriction:
    def test_constant(self):
        g = Grid2D(4, 3)
        out = restrict_fine_to_coarse(np.full((9, 7), 2.5), g)
        assert out.shape == g.shape and np.all(out == 2.5)

    def test_coincident_nodes(self):
        g = Grid2D(6, 5)
        f = lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)
        fine = Grid2D(12, 10).sample(f)
        assert np.array_equal(restrict_fine_to_coarse(fine, g), g.sample(f))

    def test_self_cauchy_zero(self):
        g = Grid2D(5, 5)
        f = lambda x, y: x * y
        assert not np.any(restrict_fine_to_coarse(Grid2D(10, 10).sample(f), g) - g.sample(f))

    def test_non_nested(self):
        with pytest.raises(ValueError):
            restrict_fine_to_coarse(np.zeros((10, 10)), Grid2D(4, 4))


class TestConfig:
    def test_h2_rule(self):
        g = RunConfig(M=8).grid()
        assert g.tau == pytest.approx(1 / 64)

    def test_fixed_tau(self):
        cfg = RunConfig(M=8, tau=0.25, T=2.0)
        assert cfg.tau_rule == "fixed" and cfg.grid().N == 8

    @pytest.mark.parametrize("kw", [{"scheme": "rk4"}, {"example": "nope"}, {"tau_rule": "fixed"},
                                    {"M": 1}, {"T": -1.0}, {"snapshot_times": [2.0]}, {"solver_tol": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            RunConfig(**kw)

    def test_from_mapping(self):
        cfg = RunConfig.from_mapping({"snapshots": "0,0.5", "M-list": "4,8", "tol": 1e-10})
        assert cfg.snapshot_times == [0.0, 0.5] and cfg.M_list == [4, 8] and cfg.solver_tol == 1e-10
        with pytest.raises(ConfigError):
            RunConfig.from_mapping({"colour": "blue"})


class TestSimulation:
    def test_snapshots_and_series(self, tmp_path):
        cfg = RunConfig(example="noise", M=8, tau=0.1, T=1.0, snapshot_times=[0.0, 0.5, 0.97])
        res = run_simulation(cfg)
        assert [s.t for s in res.snapshots] == pytest.approx([0.0, 0.5, 1.0])
        assert res.snapshots[2].offset == pytest.approx(0.03)
        assert len(res.times) == 11 and res.max_u[0] == pytest.approx(np.abs(res.snapshots[0].U).max())
        paths = write_outputs(res, tmp_path)
        text = (tmp_path / "u_t0.csv").read_text().splitlines()
        assert text[0] == "# t=0 Mx=8 My=8"
        assert len(text) == 10 and len(text[1].split(",")) == 9
        assert float(text[1].split(",")[0]) == 0.0
        assert (tmp_path / "v_t0.97.csv").exists() and len(paths) == 7

    def test_zero_data(self):
        cfg = RunConfig(M=6, tau=0.5, T=2.0, snapshot_times=[1.0, 2.0])
        pb = ProblemInstance(ModelParams(), lambda x, y: 0 * x)
        res = run_simulation(cfg, pb)
        assert all(not np.any(s.U) and not np.any(s.V) for s in res.snapshots)

    def test_deterministic_output(self, tmp_path):
        cfg = RunConfig(example="noise", M=8, tau=0.1, T=0.5, snapshot_times=[0.5])
        write_outputs(run_simulation(cfg), tmp_path / "a")
        write_outputs(run_simulation(cfg), tmp_path / "b")
        for name in ("u_t0.5.csv", "v_t0.5.csv", "max_norms.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_benchmark_small():
    cn, adi = harness.run_benchmark(10)
    assert 0 < cn < 60 and 0 < adi < 60


def test_write_error_has_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        write_outputs(ConvergenceTable(), blocker / "sub")
