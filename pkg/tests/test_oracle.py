import numpy as np
import pytest

from rgxyz import oracle
from rgxyz.model import build_params
from rgxyz.solver import solve_at_g0
from conftest import fig1_params, random_params


def test_spin_operator_basis_order():
    Sz1 = oracle.spin_operator("z", 1, 2)
    assert np.allclose(np.diag(Sz1).real, [0.5, 0.5, -0.5, -0.5])
    with pytest.raises(ValueError):
        oracle.spin_operator("w", 1, 2)
    with pytest.raises(ValueError):
        oracle.spin_operator("x", 3, 2)


def test_spin_algebra():
    L = 3
    Sx, Sy, Sz = (oracle.spin_operator(a, 2, L) for a in "xyz")
    assert np.allclose(Sx @ Sy - Sy @ Sx, 1j * Sz)
    assert np.allclose(Sx @ Sx + Sy @ Sy + Sz @ Sz, 0.75 * np.eye(2**L))


def test_guard():
    with pytest.raises(oracle.SystemTooLarge):
        oracle.build_charges(build_params({"epsilons": np.arange(1, 16)}))


@pytest.mark.parametrize("L", [2, 3, 4, 5])
def test_charges_hermitian_and_commuting(rng, L):
    cs = oracle.build_charges(random_params(rng, L))
    assert cs.hermiticity_error() < 1e-14
    assert cs.max_commutator() < 1e-10


def test_single_site_eigenvalues():
    # L=1, gamma=lambda=0.5, eps=1: q = 1/2 +- sqrt(1.5)/2
    p = build_params({"epsilons": [1.0], "gamma": 0.5, "lam": 0.5})
    es = oracle.exact_table(p)
    assert np.allclose(np.sort(es.eigenvalues[:, 0]),
                       [-0.1123724356957945, 1.1123724356957945], atol=1e-14)


def test_sum_of_charges_is_trace_shifted(rng):
    # sum_i Q_i contains the total z field: trace equals sum of constant shifts
    p = random_params(rng, 3)
    cs = oracle.build_charges(p)
    tr = sum(np.trace(Q).real for Q in cs) / 2**p.L
    assert tr == pytest.approx(oracle.charge_shift(p).sum(), abs=1e-12)


@pytest.mark.parametrize("L", [2, 4, 5])
def test_quadratic_relations_on_ed(rng, L):
    p = random_params(rng, L)
    rep = oracle.verify_quadratic(oracle.exact_table(p, seed=1), p)
    assert rep.ok(1e-9), rep.max_residual


def test_g0_table_matches_closed_form():
    p = fig1_params(L=4)
    es = oracle.exact_table(p)
    from rgxyz.solver import all_sigmas

    closed = np.array([solve_at_g0(p, s).q for s in all_sigmas(4)])
    rows = es.eigenvalues
    for r in closed:
        assert np.abs(rows - r).max(axis=1).min() < 1e-12


def test_unshifted_charges_fail_quadratic(rng):
    p = random_params(rng, 3, g=1.0)
    es = oracle.joint_eigensystem(oracle.build_charges(p, shifted=False))
    assert not oracle.verify_quadratic(es, p).ok()


def test_parity_without_fields():
    p = build_params({"epsilons": [1, 2, 3, 4], "beta_x": 0.4, "g": 0.9})
    rep = oracle.parity_check(oracle.build_charges(p))
    assert rep.commutes() and rep.even_dim == rep.odd_dim == 8
    assert rep.sz_total_commutator > 1e-3  # XY anisotropy breaks U(1)


def test_parity_broken_by_field():
    rep = oracle.parity_check(oracle.build_charges(fig1_params(L=3, g=0.5)))
    assert not rep.commutes()


def test_xxz_conserves_total_sz():
    p = build_params({"epsilons": [1, 2, 3], "g": 0.9})
    assert oracle.parity_check(oracle.build_charges(p)).sz_total_commutator < 1e-14


def test_degenerate_fallback_splits_blocks():
    # gamma = lambda = g = 0: every charge is S^z_i + 1/2, combination may be degenerate
    p = build_params({"epsilons": [1, 2, 3]})
    es = oracle.joint_eigensystem(oracle.build_charges(p), degeneracy_tol=0.5, max_redraws=0)
    assert es.used_fallback
    assert sorted(map(tuple, es.eigenvalues.round(12) + 0.0)) == sorted(
        tuple(float(b) for b in row) for row in np.ndindex(2, 2, 2)
    )


def test_unsplittable_block_is_reported():
    p = build_params({"epsilons": [1, 2]})
    with pytest.raises(oracle.DegenerateSpectrum):
        oracle.joint_eigensystem(oracle.build_charges(p), degeneracy_tol=5.0, max_redraws=0)


def test_seed_independence(rng):
    p = random_params(rng, 4)
    a = oracle.exact_table(p, seed=0).eigenvalues
    b = oracle.exact_table(p, seed=7).eigenvalues
    for r in a:
        assert np.abs(b - r).max(axis=1).min() < 1e-10


def test_expectations_shape(rng):
    es = oracle.exact_table(random_params(rng, 3))
    s = es.spin_expectations()
    assert s.shape == (8, 3, 3)
    assert np.all((s**2).sum(axis=2) <= 0.25 + 1e-12)
