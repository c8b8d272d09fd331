"""Parametrisation of the spin-1/2 XYZ Richardson-Gaudin model.

The model is fixed by seven scalars (alpha_x, beta_x, alpha_y, beta_y, gamma,
lambda, g) and a set of distinct inhomogeneities eps_1..eps_L.  Everything
downstream (charges, quadratic equations, observables) is expressed through
the two per-site quantities

    X_i = alpha_x * eps_i + beta_x,    Y_i = alpha_y * eps_i + beta_y,

which must be strictly positive so that all square roots are real.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

DEFAULT_EPS_GAP = 1e-10

PARAM_NAMES = ("alpha_x", "beta_x", "alpha_y", "beta_y", "gamma", "lam", "g")


class InvalidParameters(ValueError):
    """Raised when a parameter bundle does not describe a valid real model."""


@dataclass(frozen=True)
class ModelParams:
    epsilons: tuple[float, ...]
    alpha_x: float = 1.0
    beta_x: float = 0.0
    alpha_y: float = 1.0
    beta_y: float = 0.0
    gamma: float = 0.0
    lam: float = 0.0
    g: float = 0.0
    # Set by the zero-field limit: consumers should report q_i / g.
    report_scaled: bool = False
    eps_gap: float = field(default=DEFAULT_EPS_GAP, compare=False)

    @property
    def L(self) -> int:
        return len(self.epsilons)

    @property
    def eps(self) -> np.ndarray:
        return np.asarray(self.epsilons, dtype=float)

    @property
    def x_weights(self) -> np.ndarray:
        """alpha_x * eps_i + beta_x for every site."""
        return self.alpha_x * self.eps + self.beta_x

    @property
    def y_weights(self) -> np.ndarray:
        """alpha_y * eps_i + beta_y for every site."""
        return self.alpha_y * self.eps + self.beta_y

    @property
    def kappa(self) -> np.ndarray:
        """sqrt(X_j * Y_j), the column factor of the zz coupling."""
        return np.sqrt(self.x_weights * self.y_weights)

    def with_(self, **changes) -> "ModelParams":
        """Return a validated copy with some fields replaced."""
        return build_params({**self.as_dict(), **changes})

    def as_dict(self) -> dict:
        d = {name: getattr(self, name) for name in PARAM_NAMES}
        d["epsilons"] = self.epsilons
        d["report_scaled"] = self.report_scaled
        d["eps_gap"] = self.eps_gap
        return d


@dataclass(frozen=True)
class CouplingSet:
    """Fields B^a_i and couplings Gamma^a_ij. Diagonals of the G matrices are NaN."""

    Bx: np.ndarray
    By: np.ndarray
    Bz: np.ndarray
    Gx: np.ndarray
    Gy: np.ndarray
    Gz: np.ndarray

    @property
    def L(self) -> int:
        return len(self.Bz)

    def fields(self) -> dict[str, np.ndarray]:
        return {"x": self.Bx, "y": self.By, "z": self.Bz}

    def couplings(self) -> dict[str, np.ndarray]:
        return {"x": self.Gx, "y": self.Gy, "z": self.Gz}


@dataclass(frozen=True)
class ConstraintReport:
    field_residual: float
    cubic_residual: float | None  # None when L < 3
    field_scale: float
    cubic_scale: float | None

    @property
    def field_relative(self) -> float:
        return self.field_residual / self.field_scale if self.field_scale > 0 else 0.0

    @property
    def cubic_relative(self) -> float | None:
        if self.cubic_residual is None:
            return None
        return self.cubic_residual / self.cubic_scale if self.cubic_scale > 0 else 0.0

    def ok(self, rtol: float = 1e-12) -> bool:
        cubic = self.cubic_relative
        return self.field_relative <= rtol and (cubic is None or cubic <= rtol)


def build_params(raw: Mapping) -> ModelParams:
    """Validate a parameter bundle and return :class:`ModelParams`.

    ``raw`` must provide ``epsilons`` and may provide any of the seven model
    scalars (``lambda`` is accepted as an alias of ``lam``).
    """
    raw = dict(raw)
    if "lambda" in raw:
        raw["lam"] = raw.pop("lambda")
    if "epsilons" not in raw:
        raise InvalidParameters("missing 'epsilons'")
    eps = tuple(float(e) for e in np.ravel(np.asarray(raw["epsilons"], dtype=float)))
    if len(eps) < 1:
        raise InvalidParameters("L must be >= 1")
    if "L" in raw and int(raw["L"]) != len(eps):
        raise InvalidParameters(f"L={raw['L']} but {len(eps)} inhomogeneities given")
    eps_gap = float(raw.get("eps_gap", DEFAULT_EPS_GAP))

    scalars = {}
    for name in PARAM_NAMES:
        if name in raw:
            value = float(raw[name])
            if not np.isfinite(value):
                raise InvalidParameters(f"{name} must be finite, got {value}")
            scalars[name] = value
    if not all(np.isfinite(eps)):
        raise InvalidParameters("inhomogeneities must be finite")

    arr = np.asarray(eps)
    if len(arr) > 1:
        gaps = np.abs(arr[:, None] - arr[None, :])[~np.eye(len(arr), dtype=bool)]
        if gaps.min() < eps_gap:
            i, j = np.argwhere(
                (np.abs(arr[:, None] - arr[None, :]) < eps_gap) & ~np.eye(len(arr), dtype=bool)
            )[0]
            raise InvalidParameters(
                f"duplicate inhomogeneity: eps[{i}]={arr[i]!r} and eps[{j}]={arr[j]!r} "
                f"are closer than eps_gap={eps_gap:g}"
            )

    p = ModelParams(
        epsilons=eps,
        report_scaled=bool(raw.get("report_scaled", False)),
        eps_gap=eps_gap,
        **scalars,
    )
    for axis, w in (("x", p.x_weights), ("y", p.y_weights)):
        bad = np.flatnonzero(w <= 0)
        if bad.size:
            i = int(bad[0])
            raise InvalidParameters(
                f"alpha_{axis}*eps_{i + 1} + beta_{axis} = {w[i]:g} <= 0 "
                "(complex couplings are not supported)"
            )
    return p


def evaluate_couplings(p: ModelParams) -> CouplingSet:
    X, Y = p.x_weights, p.y_weights
    sx, sy = np.sqrt(X), np.sqrt(Y)
    L = p.L
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / (p.eps[:, None] - p.eps[None, :])
    inv[np.diag_indices(L)] = np.nan

    Gx = p.g * np.outer(sx, sy) * inv
    Gy = p.g * np.outer(sy, sx) * inv
    Gz = p.g * (sx * sy)[None, :] * inv
    return CouplingSet(
        Bx=p.gamma / sx,
        By=p.lam / sy,
        Bz=np.ones(L),
        Gx=Gx,
        Gy=Gy,
        Gz=Gz,
    )


def check_constraints(c: CouplingSet) -> ConstraintReport:
    """Evaluate the spin-1/2 commutation constraints on a coupling set.

    Field constraints, for every permutation (a, b, c) of (x, y, z):
        Gamma^b_ij B^a_j + Gamma^c_ji B^a_i = 0,   i != j
    Cubic constraints:
        Gamma^a_ik Gamma^b_jk - Gamma^a_ij Gamma^c_jk - Gamma^b_ji Gamma^c_ik = 0

    Returns the largest absolute violation of each family together with the
    largest individual term magnitude, so callers can judge it relatively.
    Nothing is raised for violated constraints.
    """
    L = c.L
    B, G = c.fields(), c.couplings()
    off = ~np.eye(L, dtype=bool)

    field_res, field_scale = 0.0, 0.0
    for a, b, cc in itertools.permutations("xyz"):
        t1 = G[b] * B[a][None, :]
        t2 = G[cc].T * B[a][:, None]
        field_res = max(field_res, float(np.abs(t1 + t2)[off].max(initial=0.0)))
        field_scale = max(
            field_scale,
            float(np.abs(t1)[off].max(initial=0.0)),
            float(np.abs(t2)[off].max(initial=0.0)),
        )

    if L < 3:
        return ConstraintReport(field_res, None, field_scale, None)

    i, j, k = np.array(
        [t for t in itertools.permutations(range(L), 3)]
    ).T
    cubic_res, cubic_scale = 0.0, 0.0
    for a, b, cc in itertools.permutations("xyz"):
        t1 = G[a][i, k] * G[b][j, k]
        t2 = G[a][i, j] * G[cc][j, k]
        t3 = G[b][j, i] * G[cc][i, k]
        cubic_res = max(cubic_res, float(np.abs(t1 - t2 - t3).max()))
        cubic_scale = max(cubic_scale, float(np.abs(np.stack([t1, t2, t3])).max()))
    return ConstraintReport(field_res, cubic_res, field_scale, cubic_scale)


def gaudin_kernel(p: ModelParams) -> np.ndarray:
    """Antisymmetric auxiliary coupling B^x_i Gamma^x_ij B^y_j.

    For this parametrisation it equals g*gamma*lambda/(eps_i - eps_j), the
    rational Gaudin solution that underlies all three coupling families.
    """
    c = evaluate_couplings(p)
    return c.Bx[:, None] * c.Gx * c.By[None, :]


def limit_constructor(kind: str, base: Mapping | ModelParams, g_large: float = 1e6) -> ModelParams:
    """Build parameters for a named special case.

    ``kind`` is one of ``"XXZ"`` (beta_x = beta_y = 0, alpha_y = alpha_x),
    ``"XXX"`` (alpha_x = alpha_y = 0, beta_y = beta_x) or ``"zero_field"``.
    The zero-field model is only approached numerically: g is set to
    ``g_large`` and the result is flagged so that q_i / g is reported.
    """
    raw = base.as_dict() if isinstance(base, ModelParams) else dict(base)
    if "lambda" in raw:
        raw["lam"] = raw.pop("lambda")
    kind_ = kind.lower()
    if kind_ == "xxz":
        eps = np.ravel(np.asarray(raw.get("epsilons", ()), dtype=float))
        if np.any(eps <= 0):
            raise InvalidParameters("XXZ limit requires eps_i > 0 at every site")
        alpha = float(raw.get("alpha_x", 1.0))
        raw.update(beta_x=0.0, beta_y=0.0, alpha_x=alpha, alpha_y=alpha)
    elif kind_ == "xxx":
        beta = float(raw.get("beta_x", 1.0))
        raw.update(alpha_x=0.0, alpha_y=0.0, beta_x=beta, beta_y=beta)
    elif kind_ in ("zero_field", "zero-field"):
        raw.update(g=float(g_large), report_scaled=True)
    else:
        raise ValueError(f"unknown limit {kind!r}; expected XXZ, XXX or zero_field")
    return build_params(raw)


def rescaled(p: ModelParams, c: float) -> ModelParams:
    """Compensated rescaling that leaves every field and coupling unchanged.

    (alpha_x, beta_x) -> c^2 (alpha_x, beta_x), gamma -> c gamma, g -> g / c.
    """
    return replace(
        p,
        alpha_x=c * c * p.alpha_x,
        beta_x=c * c * p.beta_x,
        gamma=c * p.gamma,
        g=p.g / c,
    )
