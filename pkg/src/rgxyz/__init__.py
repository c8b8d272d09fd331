"""Spin-1/2 XYZ Richardson-Gaudin model: charges, quadratic-relation solver, observables."""
from .model import (
    InvalidParameters,
    ModelParams,
    build_params,
    check_constraints,
    evaluate_couplings,
    limit_constructor,
)
from .oracle import build_charges, joint_eigensystem, verify_quadratic
from .solver import (
    NoConvergence,
    PathFailure,
    SingularJacobian,
    StateEigenvalues,
    continue_in_g,
    newton_solve,
    solve_all,
    solve_at_g0,
    solve_state,
)
from .observables import dq_dparam, fd_cross_check, spin_expectations, spin_vectors
from .estimator import ExactDiagonalization, RichardsonGaudinSolver

__all__ = [
    "InvalidParameters", "ModelParams", "build_params", "check_constraints",
    "evaluate_couplings", "limit_constructor", "build_charges", "joint_eigensystem",
    "verify_quadratic", "NoConvergence", "PathFailure", "SingularJacobian",
    "StateEigenvalues", "continue_in_g", "newton_solve", "solve_all", "solve_at_g0",
    "solve_state", "dq_dparam", "fd_cross_check", "spin_expectations", "spin_vectors",
    "ExactDiagonalization", "RichardsonGaudinSolver",
]
