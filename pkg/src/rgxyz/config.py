"""Flat ``key = value`` run configurations.

Lines starting with ``#`` are comments.  Example::

    L = 10
    eps_start = 1
    eps_step = 1
    gamma = 0.5
    lambda = 0.5
    states = ground-branch
    sweep_param = g
    sweep_start = 0
    sweep_end = 1
    sweep_points = 51
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import oracle, solver
from .model import InvalidParameters, ModelParams, build_params, limit_constructor

SWEEP_PARAMS = ("g", "gamma", "lambda")
MAX_ALL_STATES = 12

_FLOAT_KEYS = {"alpha_x", "beta_x", "alpha_y", "beta_y", "gamma", "lambda", "g",
               "eps_start", "eps_step", "sweep_start", "sweep_end", "newton_tol",
               "eps_gap", "tol_q", "tol_obs", "tol_quad", "tol_comm"}
_INT_KEYS = {"L", "sweep_points", "seed", "threads"}
_STR_KEYS = {"epsilons", "states", "sweep_param", "output", "format", "oracle", "limit"}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | {"lam"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class OracleTolerances:
    q: float = 1e-8
    observables: float = 1e-6
    quadratic: float = 1e-9
    commutator: float = 1e-10


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    states: str = "ground-branch"  # "all", "ground-branch" or an explicit +/- label
    sweep_param: str = "g"
    sweep_start: float | None = None
    sweep_end: float | None = None
    sweep_points: int = 1
    newton_tol: float = solver.NEWTON_TOL
    seed: int = 0
    threads: int = 1
    output: str | None = None
    format: str = "csv"
    oracle: bool = False
    tolerances: OracleTolerances = field(default_factory=OracleTolerances)

    @property
    def L(self) -> int:
        return self.params.L

    def sweep_values(self) -> np.ndarray:
        base = self._base_value()
        start = base if self.sweep_start is None else self.sweep_start
        end = start if self.sweep_end is None else self.sweep_end
        return np.linspace(start, end, self.sweep_points)

    def _base_value(self) -> float:
        p = self.params
        return {"g": p.g, "gamma": p.gamma, "lambda": p.lam}[self.sweep_param]

    def sigmas(self) -> np.ndarray:
        if self.states == "all":
            return solver.all_sigmas(self.L)
        if self.states == "ground-branch":
            return -np.ones((1, self.L))
        return solver.check_sigma(solver.parse_sigma(self.states), self.L)[None, :]

    def params_at(self, value: float) -> ModelParams:
        key = "lam" if self.sweep_param == "lambda" else self.sweep_param
        return self.params.with_(**{key: float(value)})

    def policy(self) -> solver.StepPolicy:
        return solver.StepPolicy(newton_tol=self.newton_tol)

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        cfg = replace(self, **kw)
        validate_config(cfg)
        return cfg


def parse_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        out[key] = value
    return out


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def _epsilons(raw: dict) -> np.ndarray:
    if "epsilons" in raw:
        if "eps_start" in raw or "eps_step" in raw:
            raise ConfigError("give either 'epsilons' or 'eps_start'/'eps_step', not both")
        eps = np.array(_floats(raw["epsilons"]))
        if "L" in raw and int(raw["L"]) != len(eps):
            raise ConfigError(f"L={raw['L']} but {len(eps)} epsilons listed")
        return eps
    if "L" not in raw:
        raise ConfigError("missing 'L' (needed with eps_start/eps_step)")
    L = int(raw["L"])
    if L < 1:
        raise ConfigError("L must be >= 1")
    start = float(raw.get("eps_start", 1.0))
    step = float(raw.get("eps_step", 1.0))
    return start + step * np.arange(L)


def from_mapping(raw: dict[str, str]) -> RunConfig:
    try:
        model = {k: raw[k] for k in ("alpha_x", "beta_x", "alpha_y", "beta_y", "gamma", "g", "eps_gap") if k in raw}
        if "lambda" in raw or "lam" in raw:
            model["lam"] = raw.get("lambda", raw.get("lam"))
        model = {k: float(v) for k, v in model.items()}
        model["epsilons"] = _epsilons(raw)
        limit = raw.get("limit", "").strip()
        params = limit_constructor(limit, model) if limit else build_params(model)
        tol = OracleTolerances(
            q=float(raw.get("tol_q", 1e-8)),
            observables=float(raw.get("tol_obs", 1e-6)),
            quadratic=float(raw.get("tol_quad", 1e-9)),
            commutator=float(raw.get("tol_comm", 1e-10)),
        )
        cfg = RunConfig(
            params=params,
            states=raw.get("states", "ground-branch").strip(),
            sweep_param=raw.get("sweep_param", "g").strip(),
            sweep_start=float(raw["sweep_start"]) if "sweep_start" in raw else None,
            sweep_end=float(raw["sweep_end"]) if "sweep_end" in raw else None,
            sweep_points=int(raw.get("sweep_points", 1)),
            newton_tol=float(raw.get("newton_tol", solver.NEWTON_TOL)),
            seed=int(raw.get("seed", 0)),
            threads=int(raw.get("threads", 1)),
            output=raw.get("output"),
            format=raw.get("format", "csv").strip().lower(),
            oracle=raw.get("oracle", "off").strip().lower() in ("on", "true", "yes", "1"),
            tolerances=tol,
        )
    except (InvalidParameters, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    if cfg.sweep_points < 1:
        raise ConfigError("sweep_points must be >= 1")
    if cfg.sweep_param not in SWEEP_PARAMS:
        raise ConfigError(f"sweep_param must be one of {SWEEP_PARAMS}, got {cfg.sweep_param!r}")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg.format!r}")
    if not cfg.newton_tol > 0:
        raise ConfigError("newton_tol must be > 0")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if cfg.states == "all" and cfg.L > MAX_ALL_STATES:
        raise ConfigError(f"states=all is limited to L <= {MAX_ALL_STATES} (L={cfg.L})")
    if cfg.states not in ("all", "ground-branch"):
        try:
            solver.check_sigma(solver.parse_sigma(cfg.states), cfg.L)
        except ValueError as exc:
            raise ConfigError(f"states: {exc}") from exc
    if cfg.oracle and cfg.L > oracle.L_MAX:
        raise ConfigError(f"oracle requested for L={cfg.L} > L_max={oracle.L_MAX} (memory guard)")
    # every sweep point must describe a valid model
    for v in (cfg.sweep_values()[0], cfg.sweep_values()[-1]):
        try:
            cfg.params_at(v)
        except InvalidParameters as exc:
            raise ConfigError(f"sweep value {v}: {exc}") from exc


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a config file. OSError propagates for I/O problems."""
    text = Path(path).read_text(encoding="utf-8")
    return from_mapping(parse_text(text))


def bundled_config(name: str) -> Path:
    """Path of a config shipped with the package (``fig1_xxz``, ``fig1_aniso``)."""
    from importlib.resources import files

    stem = name[:-4] if name.endswith(".cfg") else name
    return Path(str(files("rgxyz") / "configs" / f"{stem}.cfg"))
