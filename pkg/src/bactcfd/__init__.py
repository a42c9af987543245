"""Fourth-order compact Crank-Nicolson solvers (plain and ADI) for a 2-D bacteria/infective
reaction-diffusion system on the unit square."""

from .adi import ADIScheme
from .cncfd import CNCFDScheme
from .grid import Grid2D
from .harness import (RunConfig, estimated_order, run_benchmark, run_cauchy_study,
                      run_convergence_study, run_simulation)
from .model import ModelParams, ProblemInstance, accuracy_problem, endemic_problem, noise_problem

__all__ = [
    "ADIScheme",
    "CNCFDScheme",
    "Grid2D",
    "ModelParams",
    "ProblemInstance",
    "RunConfig",
    "accuracy_problem",
    "endemic_problem",
    "noise_problem",
    "estimated_order",
    "run_benchmark",
    "run_cauchy_study",
    "run_convergence_study",
    "run_simulation",
]
