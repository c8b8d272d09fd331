import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from rgxyz import ExactDiagonalization, RichardsonGaudinSolver
from rgxyz.model import InvalidParameters

PARAMS = dict(beta_x=0.3, beta_y=0.1, gamma=0.4, lam=-0.3, g=0.9)


def test_get_set_params_and_clone():
    est = RichardsonGaudinSolver(**PARAMS)
    assert est.get_params()["g"] == 0.9
    est.set_params(g=0.2)
    assert clone(est).get_params()["g"] == 0.2


def test_fit_learns_attributes():
    est = RichardsonGaudinSolver(**PARAMS).fit(np.array([1.0, 2.0, 3.5]))
    assert est.n_sites_ == 3 and est.constraints_.ok()
    assert est.params_.g == 0.9
    assert est.couplings_.Gx.shape == (3, 3)


def test_fit_accepts_column_vector():
    est = RichardsonGaudinSolver().fit([[1.0], [2.0]])
    assert est.n_sites_ == 2


@pytest.mark.parametrize("X", [[[1, 2], [3, 4]], [1, np.nan], [1, 1]])
def test_fit_rejects_bad_input(X):
    with pytest.raises((InvalidParameters, ValueError)):
        RichardsonGaudinSolver().fit(X)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        RichardsonGaudinSolver().transform(["--"])


def test_transform_matches_ed():
    X = [0.7, 1.6, 2.4, 3.9]
    sol = RichardsonGaudinSolver(**PARAMS).fit(X)
    ed = ExactDiagonalization(**PARAMS).fit(X)
    S = ["----", "+-+-", [1, 1, -1, 1]]
    assert np.allclose(sol.transform(S), ed.transform(S), atol=1e-8)
    assert ed.eigenvalues_.shape == (16, 4)


def test_spin_expectations_shapes():
    X = [1.0, 2.0, 3.0]
    sol = RichardsonGaudinSolver(**PARAMS).fit(X)
    assert sol.spin_expectations("---").shape == (1, 3, 3)
    assert ExactDiagonalization(**PARAMS).fit(X).spin_expectations().shape == (8, 3, 3)


def test_sign_vector_validation():
    sol = RichardsonGaudinSolver(**PARAMS).fit([1.0, 2.0])
    with pytest.raises(ValueError):
        sol.transform(["-+-"])
    with pytest.raises(ValueError):
        sol.transform([[1, 0]])
    with pytest.raises(ValueError):
        sol.transform(["-x"])


def test_fit_transform_chain():
    sol = RichardsonGaudinSolver(**PARAMS).fit([1.0, 2.0])
    assert len(sol.solve_all()) == 4


def test_ed_guard():
    from rgxyz.oracle import SystemTooLarge

    with pytest.raises(SystemTooLarge):
        ExactDiagonalization(l_max=3).fit([1, 2, 3, 4])


def test_invalid_hyperparameters():
    with pytest.raises(ValueError):
        RichardsonGaudinSolver(newton_tol=0).fit([1.0, 2.0])
    with pytest.raises(InvalidParameters):
        RichardsonGaudinSolver(beta_y=-5).fit([1.0, 2.0])
