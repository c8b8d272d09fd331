"""Quadratic equations for the charge eigenvalues and their numerical solution.

For every eigenstate the eigenvalues q_1..q_L of the shifted charges satisfy

    F_i(q) = q_i^2 - q_i - (1/4)(gamma^2/X_i + lambda^2/Y_i)
             + (g/2) sum_{j!=i} kappa_j (q_i - q_j)/(eps_i - eps_j)
             - (g^2/16) sum_{j!=i} [(sqrt(X_i Y_j) - sqrt(Y_i X_j))/(eps_i - eps_j)]^2 = 0

At g = 0 the system decouples and each site has the two roots
q_i = 1/2 +- 1/2 sqrt(1 + Bx_i^2 + By_i^2); a sign vector sigma selects one
of the 2^L solutions, which is then followed to finite g by continuation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .model import ModelParams

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-12
MAX_ITER = 50
MAX_HALVINGS = 8
COND_LIMIT = 1e14


class SolverError(RuntimeError):
    """Base class for failures that the continuation driver reacts to."""


class NoConvergence(SolverError):
    pass


class SingularJacobian(SolverError):
    pass


class PathFailure(SolverError):
    def __init__(self, message, last_g, path=None):
        super().__init__(message)
        self.last_g = last_g
        self.path = path


@dataclass(frozen=True)
class Geometry:
    """The g-independent pieces of F; valid for every g at fixed eps, alpha, beta, gamma, lambda."""

    W: np.ndarray  # kappa_j / (eps_i - eps_j), zero diagonal
    rowsum: np.ndarray
    field: np.ndarray  # (gamma^2/X_i + lambda^2/Y_i) / 4
    mismatch: np.ndarray  # sum_j bracket_ij^2

    @classmethod
    def of(cls, p: ModelParams, dtype=float) -> "Geometry":
        one = dtype(1)
        eps = np.asarray(p.epsilons, dtype=dtype)
        X = p.alpha_x * one * eps + p.beta_x * one
        Y = p.alpha_y * one * eps + p.beta_y * one
        with np.errstate(divide="ignore"):
            inv = one / (eps[:, None] - eps[None, :])
        inv[np.diag_indices(p.L)] = 0
        sX, sY = np.sqrt(X), np.sqrt(Y)
        W = inv * (sX * sY)[None, :]
        bracket = (np.outer(sX, sY) - np.outer(sY, sX)) * inv
        return cls(
            W=W,
            rowsum=W.sum(axis=1),
            field=(p.gamma * one) ** 2 / (4 * X) + (p.lam * one) ** 2 / (4 * Y),
            mismatch=(bracket**2).sum(axis=1),
        )

    def residual(self, q: np.ndarray, g: float) -> np.ndarray:
        coupling = self.rowsum * q - self.W @ q
        return q * q - q - self.field + 0.5 * g * coupling - g * g / 16 * self.mismatch

    def jacobian(self, q: np.ndarray, g: float) -> np.ndarray:
        J = -0.5 * g * self.W
        J[np.diag_indices_from(J)] = 2 * q - 1 + 0.5 * g * self.rowsum
        return J

    def d_dg(self, q: np.ndarray, g: float) -> np.ndarray:
        return 0.5 * (self.rowsum * q - self.W @ q) - g / 8 * self.mismatch

    def rounding_floor(self, q: np.ndarray, g: float) -> float:
        """Smallest max-norm residual that double precision can resolve at q."""
        a = np.abs(q)
        terms = (
            a * a
            + a
            + self.field
            + 0.5 * abs(g) * (np.abs(self.rowsum) * a + np.abs(self.W) @ a)
            + g * g / 16 * self.mismatch
        )
        return float(16 * np.finfo(float).eps * terms.max())


def _inverse_gaps(p: ModelParams) -> np.ndarray:
    with np.errstate(divide="ignore"):
        inv = 1.0 / (p.eps[:, None] - p.eps[None, :])
    inv[np.diag_indices(p.L)] = 0.0
    return inv


def mismatch_terms(p: ModelParams) -> np.ndarray:
    """bracket_ij = (sqrt(X_i Y_j) - sqrt(Y_i X_j))/(eps_i - eps_j), zero diagonal."""
    sX, sY = np.sqrt(p.x_weights), np.sqrt(p.y_weights)
    return (np.outer(sX, sY) - np.outer(sY, sX)) * _inverse_gaps(p)


def residual(q, p: ModelParams) -> np.ndarray:
    return Geometry.of(p).residual(np.asarray(q, dtype=float), p.g)


def jacobian(q, p: ModelParams) -> np.ndarray:
    return Geometry.of(p).jacobian(np.asarray(q, dtype=float), p.g)


def rounding_floor(q, p: ModelParams) -> float:
    return Geometry.of(p).rounding_floor(np.asarray(q, dtype=float), p.g)


def param_derivative(q, p: ModelParams, which: str) -> np.ndarray:
    """Partial derivative of F with respect to g, gamma or lambda at fixed q."""
    q = np.asarray(q, dtype=float)
    if which == "g":
        return Geometry.of(p).d_dg(q, p.g)
    if which == "gamma":
        return -p.gamma / (2 * p.x_weights)
    if which in ("lambda", "lam"):
        return -p.lam / (2 * p.y_weights)
    raise ValueError(f"unknown parameter {which!r}; expected g, gamma or lambda")


def check_sigma(sigma, L: int) -> np.ndarray:
    s = np.asarray(sigma, dtype=float).ravel()
    if s.shape != (L,):
        raise ValueError(f"sign vector must have length {L}, got shape {s.shape}")
    if not np.all(np.abs(s) == 1):
        raise ValueError("sign vector entries must be +1 or -1")
    return s


def local_field_norm(p: ModelParams) -> np.ndarray:
    """sqrt(1 + Bx_i^2 + By_i^2)."""
    return np.sqrt(1 + p.gamma**2 / p.x_weights + p.lam**2 / p.y_weights)


@dataclass(frozen=True)
class StateEigenvalues:
    sigma: np.ndarray
    q: np.ndarray
    at_params: ModelParams
    residual_norm: float
    iterations: int = 0

    @property
    def label(self) -> str:
        return sigma_label(self.sigma)


def sigma_label(sigma) -> str:
    return "".join("+" if s > 0 else "-" for s in np.ravel(sigma))


def parse_sigma(label: str) -> np.ndarray:
    label = label.replace(",", "").replace(" ", "")
    if not label or set(label) - set("+-"):
        raise ValueError(f"state label must consist of '+' and '-', got {label!r}")
    return np.array([1.0 if ch == "+" else -1.0 for ch in label])


def all_sigmas(L: int) -> np.ndarray:
    """All 2^L sign vectors; row n is the binary expansion of n with 0 -> '-', 1 -> '+'."""
    bits = (np.arange(2**L)[:, None] >> np.arange(L - 1, -1, -1)[None, :]) & 1
    return np.where(bits == 1, 1.0, -1.0)


def solve_at_g0(p: ModelParams, sigma) -> StateEigenvalues:
    s = check_sigma(sigma, p.L)
    q = 0.5 + 0.5 * s * local_field_norm(p)
    p0 = p if p.g == 0 else replace(p, g=0.0)
    return StateEigenvalues(s, q, p0, float(np.abs(residual(q, p0)).max()))


def _solve_linear(J: np.ndarray, rhs: np.ndarray, cond_limit: float) -> np.ndarray:
    cond = np.linalg.cond(J)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularJacobian(f"Jacobian condition estimate {cond:.3g} exceeds {cond_limit:.3g}")
    return np.linalg.solve(J, rhs)


def _newton(q0, g, geo: Geometry, tol, max_iter, max_halvings, cond_limit):
    q = np.array(q0, dtype=float)
    F = geo.residual(q, g)
    fnorm = np.abs(F).max()
    for it in range(max_iter + 1):
        if fnorm <= tol:
            return q, fnorm, it
        if it == max_iter:
            break
        dq = _solve_linear(geo.jacobian(q, g), -F, cond_limit)
        step = 1.0
        for _ in range(max_halvings + 1):
            q_new = q + step * dq
            F_new = geo.residual(q_new, g)
            f_new = np.abs(F_new).max()
            if f_new < fnorm:
                break
            step *= 0.5
        else:
            if fnorm <= geo.rounding_floor(q, g):
                return q, fnorm, it
            raise NoConvergence(
                f"line search failed at iteration {it}: residual {fnorm:.3e} not reduced"
            )
        q, F, fnorm = q_new, F_new, f_new
    raise NoConvergence(f"no convergence after {max_iter} iterations (residual {fnorm:.3e})")


def _refine(q, g, geo_ext: Geometry, cond_limit, sweeps: int = 3):
    """Iterative refinement with residuals in extended precision.

    Where J is nearly singular a double-precision residual cannot pin down q
    along the soft direction; evaluating F in long double restores it.
    """
    q = np.asarray(q, dtype=float)
    g_ext = geo_ext.W.dtype.type(g)
    best = np.abs(geo_ext.residual(q.astype(geo_ext.W.dtype), g_ext)).max()
    for _ in range(sweeps):
        F = geo_ext.residual(q.astype(geo_ext.W.dtype), g_ext)
        J = geo_ext.jacobian(q.astype(geo_ext.W.dtype), g_ext).astype(float)
        try:
            dq = _solve_linear(J, -F.astype(float), cond_limit)
        except SingularJacobian:
            break
        q_new = q + dq
        r = np.abs(geo_ext.residual(q_new.astype(geo_ext.W.dtype), g_ext)).max()
        if not r < best:
            break
        q, best = q_new, r
    return q


def newton_solve(
    q0,
    p: ModelParams,
    sigma=None,
    tol: float = NEWTON_TOL,
    max_iter: int = MAX_ITER,
    max_halvings: int = MAX_HALVINGS,
    cond_limit: float = COND_LIMIT,
    refine: bool = True,
) -> StateEigenvalues:
    """Damped Newton iteration on F(q) = 0 starting from ``q0``.

    Steps are halved while the max-norm residual does not decrease.  If no
    halving helps but the residual already sits at the rounding floor of its
    terms (only possible when ``tol`` is below that floor) the iterate is
    accepted.  Otherwise raises :class:`NoConvergence` when the iteration
    budget runs out or the line search fails, and :class:`SingularJacobian` on
    an ill-conditioned Jacobian.  With ``refine`` the converged root is
    polished by :func:`_refine`.
    """
    geo = Geometry.of(p)
    q, fnorm, it = _newton(q0, p.g, geo, tol, max_iter, max_halvings, cond_limit)
    if refine:
        q = _refine(q, p.g, Geometry.of(p, np.longdouble), cond_limit)
        fnorm = np.abs(geo.residual(q, p.g)).max()
    s = np.where(q >= 0.5, 1.0, -1.0) if sigma is None else check_sigma(sigma, p.L)
    return StateEigenvalues(s, q, p, float(fnorm), it)


@dataclass
class StepPolicy:
    """Adaptive step control for continuation in g.

    ``initial`` and ``max_step`` default to |g_target|/100 and |g_target|/10,
    both multiplied by ``scale``.
    """

    initial: float | None = None
    scale: float = 1.0
    min_step: float = 1e-8
    max_step: float | None = None
    grow_after: int = 3
    # A step is rejected when the corrector moves q away from the Euler
    # prediction by more than min(max_correction*|dq|_inf + correction_floor,
    # max_shift), dq being the accepted displacement.
    max_correction: float = 0.2
    correction_floor: float = 1e-8
    max_shift: float = 1e-3
    # Steps are also capped at sqrt(2*curvature_safety*max_shift/|q''|_inf)
    # so the Euler error stays inside max_shift where branches bend sharply.
    curvature_safety: float = 0.5
    newton_tol: float = NEWTON_TOL
    cond_limit: float = COND_LIMIT

    def tightened(self, factor: float = 10.0) -> "StepPolicy":
        return replace(
            self,
            initial=None if self.initial is None else self.initial / factor,
            max_step=None if self.max_step is None else self.max_step / factor,
            scale=self.scale / factor,
            max_shift=self.max_shift / factor,
        )


@dataclass
class ContinuationPath:
    sigma: np.ndarray
    checkpoints: list[tuple[float, StateEigenvalues]] = field(default_factory=list)
    steps: list[float] = field(default_factory=list)
    failures: list[tuple[float, float, str]] = field(default_factory=list)

    @property
    def final(self) -> StateEigenvalues:
        return self.checkpoints[-1][1]

    @property
    def g_values(self) -> np.ndarray:
        return np.array([g for g, _ in self.checkpoints])


def _tangent(geo: Geometry, q, g, cond_limit):
    """dq/dg and d^2q/dg^2 along the branch through q."""
    J = geo.jacobian(q, g)
    t = _solve_linear(J, -geo.d_dg(q, g), cond_limit)
    # Second total derivative of F(q(g), g) = 0; dJ/dg = K = (diag(rowsum) - W)/2.
    Kt = 0.5 * (geo.rowsum * t - geo.W @ t)
    curv = np.linalg.solve(J, -(2 * t * t + 2 * Kt - geo.mismatch / 8))
    return t, curv


def dq_dg(state: StateEigenvalues, p: ModelParams, cond_limit: float = COND_LIMIT) -> np.ndarray:
    geo = Geometry.of(p)
    return _solve_linear(geo.jacobian(state.q, p.g), -geo.d_dg(state.q, p.g), cond_limit)


def continue_in_g(sigma, p_target: ModelParams, schedule: StepPolicy | None = None) -> ContinuationPath:
    """Follow the g = 0 root labelled by ``sigma`` to ``p_target.g``.

    Euler predictor along dq/dg, damped Newton corrector.  Failed or
    suspicious steps are halved; three consecutive successes double the step.
    Raises :class:`PathFailure` once the step would drop below ``min_step``.
    """
    pol = schedule or StepPolicy()
    start = solve_at_g0(p_target, sigma)
    path = ContinuationPath(start.sigma)
    path.checkpoints.append((0.0, start))
    g_target = p_target.g
    if g_target == 0:
        return path

    geo = Geometry.of(p_target)
    span = abs(g_target)
    direction = np.sign(g_target)
    h_max = pol.max_step if pol.max_step is not None else pol.scale * span / 10
    h = min(pol.initial if pol.initial is not None else pol.scale * span / 100, h_max)
    g, q = 0.0, start.q
    tangent, curv = _tangent(geo, q, g, pol.cond_limit)
    streak = 0
    while abs(g) < span:
        kmax = np.abs(curv).max()
        h_curv = np.sqrt(2 * pol.curvature_safety * pol.max_shift / kmax) if kmax > 0 else np.inf
        h_try = max(min(h, h_curv), pol.min_step)
        g_next = g_target if abs(g) + h_try >= span else g + direction * h_try
        dg = g_next - g
        try:
            q_pred = q + dg * tangent
            q_new, fnorm, its = _newton(
                q_pred, g_next, geo, pol.newton_tol, MAX_ITER, MAX_HALVINGS, pol.cond_limit
            )
            moved = np.abs(q_new - q).max()
            shift = np.abs(q_new - q_pred).max()
            allowed = min(pol.max_correction * moved + pol.correction_floor, pol.max_shift)
            if shift > allowed:
                raise NoConvergence(
                    f"corrector moved {shift:.3g} from prediction (allowed {allowed:.3g})"
                )
            new_tangent, new_curv = _tangent(geo, q_new, g_next, pol.cond_limit)
        except SolverError as exc:
            path.failures.append((g, h_try, str(exc)))
            streak = 0
            h = h_try / 2
            if h < pol.min_step:
                raise PathFailure(
                    f"step size fell below {pol.min_step:g} at g={g:.10g} "
                    f"(sigma={sigma_label(start.sigma)}): {exc}",
                    last_g=g,
                    path=path,
                ) from exc
            continue
        g, q, tangent, curv = g_next, q_new, new_tangent, new_curv
        if g == g_target:
            q = _refine(q, g, Geometry.of(p_target, np.longdouble), pol.cond_limit)
            fnorm = np.abs(geo.residual(q, g)).max()
        at = p_target if g == g_target else replace(p_target, g=g)
        path.checkpoints.append((g, StateEigenvalues(start.sigma, q, at, float(fnorm), its)))
        path.steps.append(dg)
        streak += 1
        if streak >= pol.grow_after:
            h = min(2 * h, h_max)
            streak = 0
    return path


def solve_state(sigma, p: ModelParams, schedule: StepPolicy | None = None) -> StateEigenvalues:
    """Endpoint of :func:`continue_in_g`."""
    return continue_in_g(sigma, p, schedule).final


def _duplicates(Q: np.ndarray, tol: float) -> list[int]:
    out = set()
    for a in range(len(Q) - 1):
        d = np.abs(Q[a + 1 :] - Q[a]).max(axis=1)
        for b in np.flatnonzero(d < tol):
            out.update((a, a + 1 + int(b)))
    return sorted(out)


def solve_all(
    p: ModelParams,
    sigmas=None,
    schedule: StepPolicy | None = None,
    retries: int = 3,
    distinct_tol: float = 1e-6,
) -> list[StateEigenvalues]:
    """Continue every sign vector (default: all 2^L) to ``p.g``.

    Two paths ending on the same root means at least one of them crossed over
    to a neighbouring branch; those states are recomputed with a tighter step
    policy, up to ``retries`` times.  Paths that still coincide afterwards
    raise :class:`PathFailure`.
    """
    pol = schedule or StepPolicy()
    sig = all_sigmas(p.L) if sigmas is None else np.atleast_2d(np.asarray(sigmas, dtype=float))
    states = [solve_state(s, p, pol) for s in sig]
    for _ in range(retries):
        dup = _duplicates(np.array([s.q for s in states]), distinct_tol)
        if not dup:
            return states
        logger.info("recomputing %d coinciding paths with a tighter step policy", len(dup))
        pol = pol.tightened()
        for k in dup:
            states[k] = solve_state(sig[k], p, pol)
    dup = _duplicates(np.array([s.q for s in states]), distinct_tol)
    if dup:
        labels = ", ".join(sigma_label(sig[k]) for k in dup[:6])
        raise PathFailure(f"paths still coincide after {retries} retries: {labels}", last_g=p.g)
    return states
