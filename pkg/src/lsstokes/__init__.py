"""Nonconforming least-squares spectral element solver for 2D generalized Stokes flow."""
from .assembly import LeastSquaresSystem, evaluate_functional
from .geometry import build_case_mesh
from .postproc import compute_errors, convergence_sweep
from .problems import make_case
from .solver import Preconditioner, pcg_solve, solve

__all__ = [
    "LeastSquaresSystem", "Preconditioner", "build_case_mesh", "compute_errors",
    "convergence_sweep", "evaluate_functional", "make_case", "pcg_solve", "solve",
]
__version__ = "0.1.0"
