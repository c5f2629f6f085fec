"""Gradient methods built on BB stepsizes with two-dimensional quadratic termination.

The package provides the stepsize formulas, a quadratic solver, a
nonmonotone unconstrained solver, a penalty-model eigensolver and a
projected gradient method for box and singly linearly box-constrained
problems, plus problem generators and a benchmark harness.
"""

from .config import Objective, SolveReport, SolverConfig, check_gradient
from .eigsolver import EigReport, PenaltyModel, eig_metrics, solve_eigen
from .errors import (InfeasibleConstraintError, LineSearchError, NotPositiveDefiniteError,
                     UndefinedStepsizeError)
from .kernels import BACKEND
from .linops import (DenseOperator, DiagonalOperator, LaplacianOperator, LinearOperator,
                     SparseOperator, as_operator, laplacian3d)
from .projgrad import BoxConstraint, SLBConstraint, solve_projected
from .quadsolver import QuadraticProblem, solve_abb, solve_bb1, solve_quadratic
from .stepsize import BBPair, BBState, TauController, alpha_new, bb1, bb2
from .uncsolver import solve_unconstrained

__version__ = "0.1.0"

__all__ = [
    "Objective", "SolveReport", "SolverConfig", "check_gradient",
    "EigReport", "PenaltyModel", "eig_metrics", "solve_eigen",
    "InfeasibleConstraintError", "LineSearchError", "NotPositiveDefiniteError",
    "UndefinedStepsizeError", "BACKEND",
    "DenseOperator", "DiagonalOperator", "LaplacianOperator", "LinearOperator",
    "SparseOperator", "as_operator", "laplacian3d",
    "BoxConstraint", "SLBConstraint", "solve_projected",
    "QuadraticProblem", "solve_abb", "solve_bb1", "solve_quadratic",
    "BBPair", "BBState", "TauController", "alpha_new", "bb1", "bb2",
    "solve_unconstrained",
]
