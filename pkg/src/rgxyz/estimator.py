"""Estimator-style front ends over the functional modules.

Both classes follow the scikit-learn conventions: hyperparameters are set in
``__init__`` and stored verbatim, ``fit`` takes the inhomogeneities eps_1..eps_L
and learns the model (trailing-underscore attributes), ``transform`` maps
sign vectors to charge eigenvalues.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import observables, oracle, solver
from ._validation import check_epsilons, check_positive, check_sign_vectors
from .model import build_params, check_constraints, evaluate_couplings


class _ModelMixin:
    def _build(self, X):
        eps = check_epsilons(X)
        p = build_params(
            dict(
                epsilons=eps,
                alpha_x=self.alpha_x,
                beta_x=self.beta_x,
                alpha_y=self.alpha_y,
                beta_y=self.beta_y,
                gamma=self.gamma,
                lam=self.lam,
                g=self.g,
                eps_gap=check_positive("eps_gap", self.eps_gap),
            )
        )
        self.params_ = p
        self.couplings_ = evaluate_couplings(p)
        self.constraints_ = check_constraints(self.couplings_)
        self.n_sites_ = p.L
        return p


class RichardsonGaudinSolver(_ModelMixin, TransformerMixin, BaseEstimator):
    """Charge eigenvalues of single states by continuation from g = 0.

    Parameters
    ----------
    alpha_x, beta_x, alpha_y, beta_y, gamma, lam, g : float
        Model scalars.
    newton_tol : float
        Absolute residual tolerance of the Newton corrector.
    eps_gap : float
        Minimal allowed separation between inhomogeneities.

    Examples
    --------
    >>> est = RichardsonGaudinSolver(gamma=0.5, lam=0.5, g=0.3).fit([1, 2, 3])
    >>> est.transform(["---"]).shape
    (1, 3)
    """

    def __init__(
        self,
        alpha_x=1.0,
        beta_x=0.0,
        alpha_y=1.0,
        beta_y=0.0,
        gamma=0.0,
        lam=0.0,
        g=0.0,
        newton_tol=solver.NEWTON_TOL,
        eps_gap=1e-10,
    ):
        self.alpha_x = alpha_x
        self.beta_x = beta_x
        self.alpha_y = alpha_y
        self.beta_y = beta_y
        self.gamma = gamma
        self.lam = lam
        self.g = g
        self.newton_tol = newton_tol
        self.eps_gap = eps_gap

    def fit(self, X, y=None):
        check_positive("newton_tol", self.newton_tol)
        self._build(X)
        self.policy_ = solver.StepPolicy(newton_tol=self.newton_tol)
        return self

    def solve(self, S) -> list[solver.StateEigenvalues]:
        check_is_fitted(self, "params_")
        sig = check_sign_vectors(S, self.n_sites_)
        return [solver.solve_state(s, self.params_, self.policy_) for s in sig]

    def transform(self, S) -> np.ndarray:
        """(n_states, L) eigenvalues q for the given sign vectors."""
        return np.array([st.q for st in self.solve(S)])

    def solve_all(self) -> list[solver.StateEigenvalues]:
        check_is_fitted(self, "params_")
        return solver.solve_all(self.params_, schedule=self.policy_)

    def spin_expectations(self, S) -> np.ndarray:
        """(n_states, L, 3) Hellmann-Feynman spin vectors."""
        return np.array([observables.spin_vectors(st, self.params_) for st in self.solve(S)])


class ExactDiagonalization(_ModelMixin, TransformerMixin, BaseEstimator):
    """Brute-force joint eigensystem of the conserved charges (small L only).

    ``transform`` looks up the ED row belonging to each sign vector by
    continuing that state and taking the closest row.
    """

    def __init__(
        self,
        alpha_x=1.0,
        beta_x=0.0,
        alpha_y=1.0,
        beta_y=0.0,
        gamma=0.0,
        lam=0.0,
        g=0.0,
        seed=0,
        eps_gap=1e-10,
        l_max=oracle.L_MAX,
    ):
        self.alpha_x = alpha_x
        self.beta_x = beta_x
        self.alpha_y = alpha_y
        self.beta_y = beta_y
        self.gamma = gamma
        self.lam = lam
        self.g = g
        self.seed = seed
        self.eps_gap = eps_gap
        self.l_max = l_max

    def fit(self, X, y=None):
        p = self._build(X)
        self.charges_ = oracle.build_charges(p, L_max=self.l_max)
        self.eigensystem_ = oracle.joint_eigensystem(self.charges_, seed=self.seed)
        self.eigenvalues_ = self.eigensystem_.eigenvalues
        return self

    def transform(self, S) -> np.ndarray:
        check_is_fitted(self, "eigenvalues_")
        sig = check_sign_vectors(S, self.n_sites_)
        out = []
        for s in sig:
            q = solver.solve_state(s, self.params_).q
            k = np.argmin(np.abs(self.eigenvalues_ - q).max(axis=1))
            out.append(self.eigenvalues_[k])
        return np.array(out)

    def spin_expectations(self) -> np.ndarray:
        """(2^L, L, 3) eigenvector expectation values of every state."""
        check_is_fitted(self, "eigensystem_")
        return self.eigensystem_.spin_expectations()
