"""Experiment drivers: convergence and Cauchy studies, simulations, benchmarks, file output."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .adi import ADIScheme
from .cncfd import CNCFDScheme
from .grid import Grid2D, l2_norm, max_norm
from .model import (ProblemInstance, accuracy_problem, endemic_problem, noise_problem,
                    paramset_problem)
from .stepping import TimeStepper

__all__ = [
    "ConfigError",
    "StudyError",
    "RunConfig",
    "ConvergenceRow",
    "ConvergenceTable",
    "Snapshot",
    "SimulationResult",
    "SCHEMES",
    "EXAMPLES",
    "estimated_order",
    "make_problem",
    "make_scheme",
    "run_convergence_study",
    "restrict_fine_to_coarse",
    "run_cauchy_study",
    "run_simulation",
    "run_benchmark",
    "write_table",
    "write_snapshots",
    "write_outputs",
]

TABLE_HEADER = "M,l2_u,order_l2_u,max_u,order_max_u,l2_v,order_l2_v,max_v,order_max_v,cpu_s"


class ConfigError(ValueError):
    pass


class StudyError(RuntimeError):
    """A study row failed; ``table`` holds the rows completed before it."""

    def __init__(self, message, table: "ConvergenceTable"):
        super().__init__(message)
        self.table = table


SCHEMES = {"cncfd": CNCFDScheme, "adi": ADIScheme}

EXAMPLES: dict[str, Callable[[], ProblemInstance]] = {
    "accuracy": accuracy_problem,
    "noise": noise_problem,
    "endemic": endemic_problem,
    **{f"paramset_{k}": (lambda k=k: paramset_problem(k)) for k in "abcd"},
    **{f"paramset_{k}_plus": (lambda k=k: paramset_problem(k, "plus")) for k in "abcd"},
}


@dataclass
class RunConfig:
    scheme: str = "adi"
    example: str = "accuracy"
    M: int = 20
    M_list: list[int] = field(default_factory=list)
    tau: float | None = None
    tau_rule: str = "h2"
    T: float = 1.0
    snapshot_times: list[float] = field(default_factory=list)
    out_dir: str | None = None
    solver_tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}")
        if self.example not in EXAMPLES:
            raise ConfigError(f"unknown example {self.example!r}; choose from {sorted(EXAMPLES)}")
        if self.tau_rule not in ("h2", "fixed"):
            raise ConfigError(f"tau_rule must be 'h2' or 'fixed', got {self.tau_rule!r}")
        if self.tau is not None:
            self.tau_rule = "fixed"
        if self.tau_rule == "fixed" and (self.tau is None or not self.tau > 0):
            raise ConfigError("a fixed tau_rule needs a positive tau")
        if int(self.M) != self.M or self.M < 2 or any(int(m) != m or m < 2 for m in self.M_list):
            raise ConfigError("grid sizes must be integers >= 2")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if not self.solver_tol > 0:
            raise ConfigError("solver_tol must be positive")
        if any(t < 0 or t > self.T for t in self.snapshot_times):
            raise ConfigError(f"snapshot times must lie in [0, {self.T}]")

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        # accept the command-line spelling of the list options too
        aliases = {"snapshots": "snapshot_times", "tol": "solver_tol", "out": "out_dir",
                   "M-list": "M_list"}
        clean = {}
        for key, value in data.items():
            key = aliases.get(key, key)
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            clean[key] = value
        for key in ("M_list", "snapshot_times"):
            if isinstance(clean.get(key), str):
                clean[key] = parse_list(clean[key], int if key == "M_list" else float)
        try:
            return cls(**clean)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self, M: int | None = None) -> Grid2D:
        M = self.M if M is None else M
        return Grid2D.square(M, self.T, self.tau if self.tau_rule == "fixed" else None)


def parse_list(text: str, kind=float) -> list:
    try:
        return [kind(item) for item in str(text).split(",") if item.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse list {text!r}") from exc


def estimated_order(e_coarse: float, e_fine: float) -> float:
    """Observed order ``log2(e_coarse / e_fine)`` for a halving of h."""
    if not (e_coarse > 0 and e_fine > 0):
        raise ValueError("errors must be positive to estimate an order")
    return math.log2(e_coarse / e_fine)


@dataclass(frozen=True)
class ConvergenceRow:
    M: int
    l2_u: float
    max_u: float
    l2_v: float
    max_v: float
    cpu_s: float


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow] = field(default_factory=list)

    ERROR_COLUMNS = ("l2_u", "max_u", "l2_v", "max_v")

    def add(self, row: ConvergenceRow):
        self.rows.append(row)

    def orders(self, column: str) -> list[float | None]:
        vals = [getattr(r, column) for r in self.rows]
        return [None] + [estimated_order(a, b) for a, b in zip(vals, vals[1:])]

    def csv_lines(self) -> list[str]:
        lines = [TABLE_HEADER]
        orders = {c: self.orders(c) for c in self.ERROR_COLUMNS}
        for k, row in enumerate(self.rows):
            cells = [str(row.M)]
            for c in self.ERROR_COLUMNS:
                o = orders[c][k]
                cells += [f"{getattr(row, c):.16e}", "" if o is None else repr(o)]
            cells.append(f"{row.cpu_s:.3f}")
            lines.append(",".join(cells))
        return lines

    def pretty(self) -> str:
        out = [f"{'M':>5} {'|U-u|':>10} {'ord':>5} {'|U-u|inf':>10} {'ord':>5} "
               f"{'|V-v|':>10} {'ord':>5} {'|V-v|inf':>10} {'ord':>5} {'cpu s':>8}"]
        orders = {c: self.orders(c) for c in self.ERROR_COLUMNS}
        for k, row in enumerate(self.rows):
            parts = [f"{row.M:>5}"]
            for c in self.ERROR_COLUMNS:
                o = orders[c][k]
                parts += [f"{getattr(row, c):>10.3e}", f"{'--' if o is None else f'{o:.2f}':>5}"]
            parts.append(f"{row.cpu_s:>8.2f}")
            out.append(" ".join(parts))
        return "\n".join(out)


def make_problem(example: str) -> ProblemInstance:
    if example not in EXAMPLES:
        raise ConfigError(f"unknown example {example!r}")
    return EXAMPLES[example]()


def make_scheme(name: str, grid: Grid2D, problem: ProblemInstance, tol: float = 1e-12,
                recover: bool = False) -> TimeStepper:
    if name == "cncfd":
        return CNCFDScheme(grid, problem, tol=tol, recover=recover)
    if name == "adi":
        return ADIScheme(grid, problem, recover=recover)
    raise ConfigError(f"unknown scheme {name!r}")


def _timed_run(scheme: str, grid: Grid2D, problem: ProblemInstance, tol: float):
    start = time.perf_counter()
    state = make_scheme(scheme, grid, problem, tol).run()
    return state, time.perf_counter() - start


def run_convergence_study(scheme: str, M_list: Sequence[int], T: float = 1.0,
                          tol: float = 1e-12, problem: ProblemInstance | None = None) -> ConvergenceTable:
    """Errors against the exact solution at ``t = T`` for each M, with ``tau = h^2``.

    A failing row raises :class:`StudyError` carrying the rows finished so far.
    """
    problem = accuracy_problem() if problem is None else problem
    table = ConvergenceTable()
    for M in M_list:
        grid = Grid2D.square(M, T)
        try:
            state, cpu = _timed_run(scheme, grid, problem, tol)
        except (ArithmeticError, RuntimeError) as exc:
            raise StudyError(f"{scheme} failed at M={M}: {exc}", table) from exc
        u, v = problem.exact(grid, T)
        table.add(ConvergenceRow(M, l2_norm(grid, state.U - u), max_norm(grid, state.U - u),
                                 l2_norm(grid, state.V - v), max_norm(grid, state.V - v), cpu))
    return table


def restrict_fine_to_coarse(fine: np.ndarray, coarse_grid: Grid2D) -> np.ndarray:
    """Values of a field on the doubly refined grid at the nodes shared with ``coarse_grid``."""
    fine = np.asarray(fine, dtype=float)
    want = (2 * coarse_grid.Mx + 1, 2 * coarse_grid.My + 1)
    if fine.shape != want:
        raise ValueError(f"fine field has shape {fine.shape}, expected {want} for nesting")
    return fine[::2, ::2].copy()


def run_cauchy_study(M_list: Sequence[int], T: float = 1.0, scheme: str = "adi",
                     tol: float = 1e-12, problem: ProblemInstance | None = None) -> ConvergenceTable:
    """Differences between the (tau, h) and (tau/4, h/2) solutions at ``t = T``.

    The cpu column is the time of both runs in a row; a companion run reused from
    the previous row still counts there.
    """
    problem = noise_problem(0.3) if problem is None else problem
    table = ConvergenceTable()
    cache: dict[int, tuple] = {}

    def solve(M):
        if M not in cache:
            cache[M] = _timed_run(scheme, Grid2D.square(M, T), problem, tol)
        return cache[M]

    for M in M_list:
        try:
            (coarse, t_c), (fine, t_f) = solve(M), solve(2 * M)
        except (ArithmeticError, RuntimeError) as exc:
            raise StudyError(f"{scheme} failed in the M={M} pair: {exc}", table) from exc
        grid = Grid2D.square(M, T)
        eU = coarse.U - restrict_fine_to_coarse(fine.U, grid)
        eV = coarse.V - restrict_fine_to_coarse(fine.V, grid)
        table.add(ConvergenceRow(M, l2_norm(grid, eU), max_norm(grid, eU),
                                 l2_norm(grid, eV), max_norm(grid, eV), t_c + t_f))
        for k in [k for k in cache if k < 2 * M]:
            del cache[k]
    return table


@dataclass(frozen=True)
class Snapshot:
    t: float
    requested_t: float
    U: np.ndarray
    V: np.ndarray
    grid: Grid2D

    @property
    def offset(self) -> float:
        return self.t - self.requested_t


@dataclass
class SimulationResult:
    snapshots: list[Snapshot]
    times: np.ndarray
    max_u: np.ndarray
    max_v: np.ndarray


def run_simulation(config: RunConfig, problem: ProblemInstance | None = None) -> SimulationResult:
    """Advance to ``config.T``, keeping snapshots at the steps nearest the requested times."""
    problem = make_problem(config.example) if problem is None else problem
    grid = config.grid()
    scheme = make_scheme(config.scheme, grid, problem, config.solver_tol)
    wanted: dict[int, list[float]] = {}
    for t in config.snapshot_times:
        wanted.setdefault(min(grid.N, int(round(t / grid.tau))), []).append(t)
    snaps: list[Snapshot] = []
    times, mu, mv = [], [], []

    def record(state):
        times.append(grid.t(state.n))
        mu.append(max_norm(grid, state.U))
        mv.append(max_norm(grid, state.V))
        for t in wanted.get(state.n, ()):
            snaps.append(Snapshot(grid.t(state.n), t, state.U.copy(), state.V.copy(), grid))

    scheme.run(callback=record)
    snaps.sort(key=lambda s: s.requested_t)
    return SimulationResult(snaps, np.array(times), np.array(mu), np.array(mv))


def run_benchmark(M: int, T: float = 1.0, tol: float = 1e-12) -> tuple[float, float]:
    """Wall-clock seconds of full accuracy runs ``(cncfd, adi)``, set-up included."""
    problem = accuracy_problem()
    grid = Grid2D.square(M, T)
    # one tiny run per scheme first so compilation is not billed to either
    for name in SCHEMES:
        make_scheme(name, Grid2D.square(4, 1.0 / 16.0), problem, tol).run()
    return _timed_run("cncfd", grid, problem, tol)[1], _timed_run("adi", grid, problem, tol)[1]


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def write_table(table: ConvergenceTable, path) -> Path:
    return _write(Path(path), "\n".join(table.csv_lines()) + "\n")


def _time_label(t: float) -> str:
    return f"{t:g}"


def write_snapshots(result: SimulationResult | Sequence[Snapshot], out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    snaps = result.snapshots if isinstance(result, SimulationResult) else result
    paths = []
    for s in snaps:
        for name, F in (("u", s.U), ("v", s.V)):
            lines = [f"# t={s.t:g} Mx={s.grid.Mx} My={s.grid.My}"]
            lines += [",".join(repr(float(x)) for x in row) for row in F]
            paths.append(_write(out_dir / f"{name}_t{_time_label(s.requested_t)}.csv",
                                "\n".join(lines) + "\n"))
    if isinstance(result, SimulationResult):
        rows = ["t,max_u,max_v"] + [f"{t!r},{a!r},{b!r}" for t, a, b in
                                     zip(result.times, result.max_u, result.max_v)]
        paths.append(_write(out_dir / "max_norms.csv", "\n".join(rows) + "\n"))
    return paths


def write_outputs(obj, out_dir, name: str = "table.csv") -> list[Path]:
    """Write a table (``name`` inside ``out_dir``) or simulation snapshots."""
    if isinstance(obj, ConvergenceTable):
        return [write_table(obj, Path(out_dir) / name)]
    return write_snapshots(obj, out_dir)
