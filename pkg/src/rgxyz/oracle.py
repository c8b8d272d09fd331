"""Exact diagonalization of the conserved charges on the full 2^L space."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .model import ModelParams, evaluate_couplings, CouplingSet

L_MAX = 14
COMMUTATOR_TOL = 1e-10
QUAD_TOL = 1e-9
DEGENERACY_TOL = 1e-8

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex) / 2,
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex) / 2,
    "z": np.array([[1, 0], [0, -1]], dtype=complex) / 2,
}


class SystemTooLarge(ValueError):
    pass


class DegenerateSpectrum(RuntimeError):
    def __init__(self, states):
        self.states = list(states)
        super().__init__(
            f"joint spectrum is degenerate; {len(self.states)} states affected "
            f"(first indices: {self.states[:8]})"
        )


def _guard(L: int, L_max: int = L_MAX) -> None:
    if L > L_max:
        raise SystemTooLarge(
            f"L={L} exceeds L_max={L_max}: dense 2^{L} matrices are not supported"
        )


@lru_cache(maxsize=256)
def _spin_operator(axis: str, site: int, L: int) -> np.ndarray:
    m = np.eye(2 ** (site - 1), dtype=complex)
    m = np.kron(m, _PAULI[axis])
    m = np.kron(m, np.eye(2 ** (L - site), dtype=complex))
    m.setflags(write=False)
    return m


def spin_operator(axis: str, site: int, L: int, L_max: int = L_MAX) -> np.ndarray:
    """S^axis at 1-based ``site`` embedded in the 2^L dimensional space.

    Site 1 is the most significant tensor factor, so basis index 0 is
    |up ... up> and index 2^L - 1 is |down ... down>.
    """
    if axis not in _PAULI:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
    if not 1 <= site <= L:
        raise ValueError(f"site must satisfy 1 <= site <= {L}, got {site}")
    _guard(L, L_max)
    return _spin_operator(axis, site, L)


@dataclass(frozen=True)
class ChargeMatrixSet:
    L: int
    matrices: tuple[np.ndarray, ...]
    shifted: bool = True

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, i):
        return self.matrices[i]

    def hermiticity_error(self) -> float:
        return max(
            np.linalg.norm(Q - Q.conj().T) / max(np.linalg.norm(Q), 1.0)
            for Q in self.matrices
        )

    def commutator_norms(self) -> np.ndarray:
        """Relative Frobenius norms ||[Q_i, Q_j]|| / (||Q_i|| ||Q_j||)."""
        L = self.L
        norms = [np.linalg.norm(Q) for Q in self.matrices]
        out = np.zeros((L, L))
        for i, j in itertools.combinations(range(L), 2):
            A, B = self.matrices[i], self.matrices[j]
            c = np.linalg.norm(A @ B - B @ A) / (norms[i] * norms[j])
            out[i, j] = out[j, i] = c
        return out

    def max_commutator(self) -> float:
        return float(self.commutator_norms().max(initial=0.0))


def charge_shift(p: ModelParams) -> np.ndarray:
    """Per-site constant separating the shifted charges from the raw ones.

    shifted Q_i = raw Q_i + 1/2 - (g/4) sum_{j != i} kappa_j / (eps_i - eps_j)
    """
    with np.errstate(divide="ignore"):
        inv = 1.0 / (p.eps[:, None] - p.eps[None, :])
    inv[np.diag_indices(p.L)] = 0.0
    return 0.5 - 0.25 * p.g * (inv @ p.kappa)


def charges_from_couplings(
    c: CouplingSet, shift: np.ndarray | None = None, L_max: int = L_MAX
) -> ChargeMatrixSet:
    """Assemble Q_i = sum_a B^a_i S^a_i + sum_{j!=i,a} Gamma^a_ij S^a_i S^a_j (+ shift_i)."""
    L = c.L
    _guard(L, L_max)
    dim = 2**L
    S = {a: [_spin_operator(a, i + 1, L) for i in range(L)] for a in "xyz"}
    B, G = c.fields(), c.couplings()
    ident = np.eye(dim, dtype=complex)
    mats = []
    for i in range(L):
        Q = np.zeros((dim, dim), dtype=complex)
        for a in "xyz":
            if B[a][i] != 0:
                Q += B[a][i] * S[a][i]
            for j in range(L):
                if j != i and G[a][i, j] != 0:
                    Q += G[a][i, j] * (S[a][i] @ S[a][j])
        if shift is not None:
            Q += shift[i] * ident
        mats.append(Q)
    return ChargeMatrixSet(L, tuple(mats), shifted=shift is not None)


def build_charges(p: ModelParams, shifted: bool = True, L_max: int = L_MAX) -> ChargeMatrixSet:
    """Dense conserved charges for ``p``; ``shifted`` adds the constants that
    make the eigenvalues obey the quadratic relations."""
    _guard(p.L, L_max)
    cs = charges_from_couplings(
        evaluate_couplings(p), charge_shift(p) if shifted else None, L_max
    )
    return cs


@dataclass(frozen=True)
class JointEigensystem:
    eigenvalues: np.ndarray  # (2^L, L): row n holds q_i of state n
    eigenvectors: np.ndarray  # (2^L, 2^L): column n is state n
    coefficients: np.ndarray  # linear combination that was diagonalized
    attempts: int
    used_fallback: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def n_states(self) -> int:
        return self.eigenvalues.shape[0]

    def expectation(self, op: np.ndarray) -> np.ndarray:
        v = self.eigenvectors
        return np.real(np.einsum("in,ij,jn->n", v.conj(), op, v))

    def spin_expectations(self) -> np.ndarray:
        """<S^a_i> for every state, shape (2^L, L, 3)."""
        L = self.eigenvalues.shape[1]
        out = np.empty((self.n_states, L, 3))
        for i in range(L):
            for k, a in enumerate("xyz"):
                out[:, i, k] = self.expectation(_spin_operator(a, i + 1, L))
        return out


def _min_gap(w: np.ndarray) -> float:
    return float(np.diff(np.sort(w)).min(initial=np.inf))


def _clusters(w: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(w)
    groups, current = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if w[b] - w[a] < tol:
            current.append(b)
        else:
            groups.append(np.array(current))
            current = [b]
    groups.append(np.array(current))
    return groups


def _refine(cs: ChargeMatrixSet, V: np.ndarray, tol: float) -> np.ndarray:
    """Split a degenerate subspace by diagonalizing each charge in turn."""
    for Q in cs.matrices:
        if V.shape[1] == 1:
            return V
        sub = V.conj().T @ Q @ V
        w, u = np.linalg.eigh((sub + sub.conj().T) / 2)
        groups = _clusters(w, tol)
        if len(groups) > 1:
            return np.hstack([
                _refine(cs, V @ u[:, idx], tol) if len(idx) > 1 else V @ u[:, idx]
                for idx in groups
            ])
        V = V @ u
    return V


def joint_eigensystem(
    cs: ChargeMatrixSet,
    seed: int = 0,
    degeneracy_tol: float = DEGENERACY_TOL,
    max_redraws: int = 5,
) -> JointEigensystem:
    """Common eigenbasis of mutually commuting charges.

    A random real combination sum_i c_i Q_i is diagonalized; when two of its
    eigenvalues are closer than ``degeneracy_tol`` the coefficients are redrawn
    (up to ``max_redraws`` times) before falling back to splitting the
    degenerate blocks charge by charge.
    """
    rng = np.random.default_rng(seed)
    L = cs.L
    scale = np.array([np.linalg.norm(Q, 2) for Q in cs.matrices])
    scale[scale == 0] = 1.0
    for attempt in range(1 + max_redraws):
        c = rng.uniform(0.5, 1.5, size=L) * rng.choice([-1.0, 1.0], size=L) / scale
        M = sum(ci * Q for ci, Q in zip(c, cs.matrices))
        w, v = np.linalg.eigh(M)
        if _min_gap(w) >= degeneracy_tol:
            break
    else:
        attempt = max_redraws
        blocks = []
        for idx in _clusters(w, degeneracy_tol):
            blocks.append(_refine(cs, v[:, idx], degeneracy_tol) if len(idx) > 1 else v[:, idx])
        v = np.hstack(blocks)
        table = _table(cs, v)
        dup = _duplicate_rows(table, degeneracy_tol)
        if dup:
            raise DegenerateSpectrum(dup)
        return JointEigensystem(table, v, c, attempt + 1, used_fallback=True)
    return JointEigensystem(_table(cs, v), v, c, attempt + 1)


def _table(cs: ChargeMatrixSet, v: np.ndarray) -> np.ndarray:
    return np.column_stack(
        [np.real(np.einsum("in,ij,jn->n", v.conj(), Q, v)) for Q in cs.matrices]
    )


def _duplicate_rows(table: np.ndarray, tol: float) -> list[int]:
    n = table.shape[0]
    bad = set()
    for a in range(n):
        d = np.abs(table[a + 1 :] - table[a]).max(axis=1) if a + 1 < n else np.array([])
        for b in np.flatnonzero(d < tol):
            bad.update((a, a + 1 + int(b)))
    return sorted(bad)


@dataclass(frozen=True)
class QuadraticReport:
    max_residual: float
    per_state: np.ndarray  # max_i |F_i| for each state

    def ok(self, tol: float = QUAD_TOL) -> bool:
        return self.max_residual <= tol


def verify_quadratic(es: JointEigensystem, p: ModelParams) -> QuadraticReport:
    from .solver import residual

    per_state = np.array([np.abs(residual(row, p)).max() for row in es.eigenvalues])
    return QuadraticReport(float(per_state.max()), per_state)


@dataclass(frozen=True)
class ParityReport:
    max_commutator: float
    even_dim: int
    odd_dim: int
    sz_total_commutator: float

    def commutes(self, tol: float = 1e-12) -> bool:
        return self.max_commutator <= tol


def parity_operator(L: int) -> np.ndarray:
    """prod_i 2 S^z_i as a dense diagonal matrix."""
    _guard(L)
    bits = (np.arange(2**L)[:, None] >> np.arange(L)[None, :]) & 1
    return np.diag(np.where(bits.sum(axis=1) % 2 == 0, 1.0, -1.0)).astype(complex)


def parity_check(cs: ChargeMatrixSet) -> ParityReport:
    """Commutators of the charges with parity and with total S^z (relative norms)."""
    L = cs.L
    P = parity_operator(L)
    Sz = sum(_spin_operator("z", i + 1, L) for i in range(L))
    d = np.diag(P).real
    par, u1 = 0.0, 0.0
    for Q in cs.matrices:
        nq = max(np.linalg.norm(Q), 1e-300)
        par = max(par, np.linalg.norm(Q @ P - P @ Q) / nq)
        u1 = max(u1, np.linalg.norm(Q @ Sz - Sz @ Q) / nq)
    return ParityReport(float(par), int((d > 0).sum()), int((d < 0).sum()), float(u1))


def exact_table(p: ModelParams, seed: int = 0) -> JointEigensystem:
    """Shorthand: shifted charges of ``p`` jointly diagonalized."""
    return joint_eigensystem(build_charges(p), seed=seed)
