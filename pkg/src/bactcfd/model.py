"""Coefficients, infection rates, initial data and manufactured solutions.

The system being solved on the unit square with homogeneous Dirichlet data is::

    u_t = d1 Lap u - a11 u + a12 v + f1
    v_t = d2 Lap v - a22 v + g(u)  + f2
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .grid import Grid2D, apply_Hh, compact_combination
from .solvers import solve_Hh

__all__ = [
    "GKind",
    "ModelParams",
    "ProblemInstance",
    "InvalidInitialDataError",
    "infection_g",
    "noise_n",
    "manufactured_exact",
    "manufactured_sources",
    "accuracy_problem",
    "noise_problem",
    "endemic_problem",
    "paramset_problem",
    "sample_initial",
    "initial_aux",
    "PARAMSETS",
]


class GKind(str, enum.Enum):
    RATIONAL_QUADRATIC = "rational_quadratic"
    RATIONAL_LINEAR = "rational_linear"


class InvalidInitialDataError(ValueError):
    pass


def infection_g(kind, u):
    """Infection rate ``u^2/(1+u^2)`` or ``u/(1+u)``; works elementwise on arrays."""
    kind = GKind(kind)
    u = np.asarray(u, dtype=float)
    if kind is GKind.RATIONAL_QUADRATIC:
        u2 = u * u
        out = u2 / (1.0 + u2)
    else:
        if np.any(u <= -1.0):
            raise ValueError("u/(1+u) is undefined for u <= -1")
        out = u / (1.0 + u)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ModelParams:
    d1: float = 1.0
    d2: float = 1.0
    a11: float = 1.0
    a12: float = 1.0
    a22: float = 1.0
    g_kind: GKind = GKind.RATIONAL_QUADRATIC
    sources_enabled: bool = False
    # False admits zero reaction rates, for limiting-case checks of the schemes
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "g_kind", GKind(self.g_kind))
        if not self.validate:
            return
        if self.d1 < 0 or self.d2 < 0:
            raise ValueError("diffusion coefficients must be nonnegative")
        if min(self.a11, self.a12, self.a22) <= 0:
            raise ValueError("a11, a12 and a22 must be positive")

    def g(self, u):
        return infection_g(self.g_kind, u)


SpaceFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
SpaceTimeFn = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class ProblemInstance:
    """Model parameters plus initial data, optional sources and optional exact solution.

    When ``initial_v`` is None the second component starts at ``g(u0)`` nodewise.
    """

    params: ModelParams
    initial_u: SpaceFn
    initial_v: Optional[SpaceFn] = None
    f1: Optional[SpaceTimeFn] = None
    f2: Optional[SpaceTimeFn] = None
    exact_u: Optional[SpaceTimeFn] = None
    exact_v: Optional[SpaceTimeFn] = None
    name: str = "custom"

    def __post_init__(self):
        has_exact = self.exact_u is not None or self.exact_v is not None
        has_src = self.f1 is not None or self.f2 is not None
        if has_exact and not has_src:
            raise ValueError("a manufactured exact solution needs its source terms")
        if has_src != self.params.sources_enabled:
            object.__setattr__(self, "params", replace(self.params, sources_enabled=has_src))

    @property
    def has_sources(self) -> bool:
        return self.params.sources_enabled

    def sources(self, grid: Grid2D, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Node samples of ``(f1, f2)`` at time ``t`` with the boundary zeroed."""
        X, Y = grid.mesh()
        out = []
        for f in (self.f1, self.f2):
            s = grid.zeros() if f is None else np.asarray(f(X, Y, t), dtype=float) * np.ones(grid.shape)
            s[0, :] = s[-1, :] = s[:, 0] = s[:, -1] = 0.0
            out.append(s)
        return out[0], out[1]

    def exact(self, grid: Grid2D, t: float) -> tuple[np.ndarray, np.ndarray]:
        if self.exact_u is None or self.exact_v is None:
            raise ValueError(f"problem {self.name!r} has no exact solution")
        X, Y = grid.mesh()
        return (np.asarray(self.exact_u(X, Y, t)) * np.ones(grid.shape),
                np.asarray(self.exact_v(X, Y, t)) * np.ones(grid.shape))


def noise_n(x, y):
    """Nonnegative multi-mode perturbation vanishing on the boundary of the unit square."""
    s = np.sin
    pi = np.pi
    return (0.25 * s(5 * pi * x) ** 2 * s(4 * pi * y) ** 2
            + 0.25 * s(3 * pi * x) ** 2 * s(7 * pi * y) ** 2
            + 0.1 * s(9 * pi * x) ** 2 * s(11 * pi * y) ** 2)


def manufactured_exact(x, y, t):
    base = np.exp(-t) * np.sin(np.pi * x) * np.sin(np.pi * y)
    return base, 2.0 * np.pi**2 * base


def manufactured_sources(x, y, t, g_kind=GKind.RATIONAL_QUADRATIC):
    u, _ = manufactured_exact(x, y, t)
    f2 = 4.0 * np.pi**4 * u - infection_g(g_kind, u)
    return np.zeros_like(np.asarray(f2, dtype=float)), f2


def accuracy_problem() -> ProblemInstance:
    """Manufactured-solution problem with all coefficients equal to one."""
    return ProblemInstance(
        params=ModelParams(sources_enabled=True),
        initial_u=lambda x, y: manufactured_exact(x, y, 0.0)[0],
        initial_v=lambda x, y: manufactured_exact(x, y, 0.0)[1],
        f1=lambda x, y, t: np.zeros(np.broadcast(x, y).shape),
        f2=lambda x, y, t: manufactured_sources(x, y, t)[1],
        exact_u=lambda x, y, t: manufactured_exact(x, y, t)[0],
        exact_v=lambda x, y, t: manufactured_exact(x, y, t)[1],
        name="accuracy",
    )


_BISTABLE = dict(d1=0.001, a11=1.0, a12=2.5, d2=0.0001, a22=1.0)

PARAMSETS = {
    "a": dict(_BISTABLE, g_kind=GKind.RATIONAL_LINEAR),
    "b": dict(_BISTABLE, d1=0.01),
    "c": dict(_BISTABLE, d2=0.001),
    "d": dict(_BISTABLE, a12=1.0),
}


def bump_initial(amplitude: float) -> SpaceFn:
    return lambda x, y: amplitude * np.sin(np.pi * x) * np.sin(np.pi * y) + noise_n(x, y)


def noise_problem(amplitude: float = 0.3, **overrides) -> ProblemInstance:
    """Bistable parameters, ``u0 = A sin sin + n``, ``v0 = g(u0)`` (extinction for A = 0.3)."""
    params = ModelParams(**dict(_BISTABLE, **overrides))
    return ProblemInstance(params, bump_initial(amplitude), name="noise")


def endemic_problem(**overrides) -> ProblemInstance:
    return replace(noise_problem(0.5, **overrides), name="endemic")


def paramset_problem(which: str, branch: str = "minus") -> ProblemInstance:
    if which not in PARAMSETS:
        raise ValueError(f"unknown parameter set {which!r}; choose from {sorted(PARAMSETS)}")
    amplitude = {"minus": 0.3, "plus": 0.5}[branch]
    params = ModelParams(**PARAMSETS[which])
    return ProblemInstance(params, bump_initial(amplitude), name=f"paramset_{which}")


def sample_initial(problem: ProblemInstance, grid: Grid2D, atol: float = 1e-14):
    """Nodal ``(U0, V0)``; boundary samples beyond ``atol`` are rejected, then zeroed."""
    U0 = grid.sample(problem.initial_u)
    if problem.initial_v is None:
        V0 = problem.params.g(U0)
    else:
        V0 = grid.sample(problem.initial_v)
    for name, F in (("u0", U0), ("v0", V0)):
        if not grid.is_homogeneous(F, atol):
            raise InvalidInitialDataError(f"{name} does not vanish on the boundary")
        F[0, :] = F[-1, :] = F[:, 0] = F[:, -1] = 0.0
    return U0, V0


def initial_aux(grid: Grid2D, U0: np.ndarray, V0: np.ndarray, params: ModelParams,
                f0: tuple[np.ndarray, np.ndarray] | None = None):
    """Fourth-order starting values of the auxiliary unknowns.

    Returns ``(Hh P0, Hh Q0, P0, Q0)`` with ``Hh P0 = d1 Lambda U0 - a11 Hh U0 (+ Hh f1)``
    and ``Hh Q0 = d2 Lambda V0 - a22 Hh V0 + Hh g(U0) (+ Hh f2)``.
    """
    HhP0 = compact_combination(grid, U0, -params.a11, params.d1)
    HhQ0 = compact_combination(grid, V0, -params.a22, params.d2)
    forcing_q = params.g(U0)
    forcing_p = None
    if f0 is not None:
        forcing_p = f0[0]
        forcing_q = forcing_q + f0[1]
    if forcing_p is not None:
        HhP0 += apply_Hh(grid, forcing_p)
    HhQ0 += apply_Hh(grid, forcing_q)
    for F in (HhP0, HhQ0):
        F[0, :] = F[-1, :] = F[:, 0] = F[:, -1] = 0.0
    return HhP0, HhQ0, solve_Hh(grid, HhP0), solve_Hh(grid, HhQ0)
