"""Sweeps, oracle comparisons and table output."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from . import observables, oracle, solver
from .config import RunConfig
from .model import ModelParams

COLUMNS = ("sweep_param", "sweep_value", "state", "site", "epsilon", "q",
           "sx", "sy", "sz", "residual", "error")
_FLOAT_COLS = ("sweep_value", "epsilon", "q", "sx", "sy", "sz", "residual")


def _point_rows(cfg: RunConfig, value: float, sigma: np.ndarray) -> list[dict]:
    label = solver.sigma_label(sigma)
    base = dict(sweep_param=cfg.sweep_param, sweep_value=float(value), state=label)
    try:
        p = cfg.params_at(value)
        st = solver.solve_state(sigma, p, cfg.policy())
        vecs = observables.spin_vectors(st, p)
        res = np.abs(solver.residual(st.q, p))
        q = st.q / p.g if p.report_scaled else st.q
        err = ""
        if res.max() > max(cfg.newton_tol, solver.rounding_floor(st.q, p)):
            err = f"residual {res.max():.3e} above newton_tol"
        return [
            dict(base, site=i + 1, epsilon=float(p.eps[i]), q=float(q[i]),
                 sx=float(vecs[i, 0]), sy=float(vecs[i, 1]), sz=float(vecs[i, 2]),
                 residual=float(res[i]), error=err)
            for i in range(p.L)
        ]
    except solver.SolverError as exc:
        nan = math.nan
        msg = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        return [
            dict(base, site=i + 1, epsilon=float(cfg.params.eps[i]), q=nan, sx=nan,
                 sy=nan, sz=nan, residual=nan, error=msg)
            for i in range(cfg.L)
        ]


def run_sweep(cfg: RunConfig) -> list[dict]:
    """One row per (sweep point, state, site).

    Every point is continued independently from g = 0, so failures stay local
    and the work can be spread over ``cfg.threads`` workers; rows are sorted
    by (sweep index, state label, site) before they are returned.
    """
    values = cfg.sweep_values()
    jobs = [(k, v, s) for k, v in enumerate(values) for s in cfg.sigmas()]

    def work(job):
        k, v, s = job
        return [(k, r) for r in _point_rows(cfg, v, s)]

    if cfg.threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(work, jobs))
    else:
        chunks = [work(j) for j in jobs]
    keyed = [item for c in chunks for item in c]
    keyed.sort(key=lambda kr: (kr[0], kr[1]["state"], kr[1]["site"]))
    return [r for _, r in keyed]


def run_solve(cfg: RunConfig) -> list[dict]:
    """Rows for the configured parameter point only (no sweep)."""
    single = replace(cfg, sweep_start=None, sweep_end=None, sweep_points=1)
    return run_sweep(single)


@dataclass(frozen=True)
class OracleReport:
    L: int
    g: float
    max_q_deviation: float
    max_observable_deviation: float
    max_quadratic_residual: float
    max_commutator: float
    passed: bool
    failures: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return asdict(self)


def match_rows(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, float]:
    """Optimal assignment of rows of A to rows of B under the max-norm distance."""
    cost = cdist(A, B, metric="chebyshev")
    r, c = linear_sum_assignment(cost)
    perm = np.empty(len(r), dtype=int)
    perm[r] = c
    return perm, float(cost[r, c].max(initial=0.0))


def oracle_compare(p: ModelParams, seed: int = 0, tolerances=None,
                   schedule: solver.StepPolicy | None = None) -> OracleReport:
    from .config import OracleTolerances

    tol = tolerances or OracleTolerances()
    cs = oracle.build_charges(p)
    es = oracle.joint_eigensystem(cs, seed=seed)
    quad = oracle.verify_quadratic(es, p).max_residual
    comm = cs.max_commutator()
    states = solver.solve_all(p, schedule=schedule)
    Q = np.array([s.q for s in states])
    perm, dq = match_rows(Q, es.eigenvalues)
    ed_spins = es.spin_expectations()
    dobs = 0.0
    for k, st in enumerate(states):
        hf = observables.spin_vectors(st, p)
        dobs = max(dobs, float(np.abs(hf - ed_spins[perm[k]]).max()))
    checks = (("q", dq, tol.q), ("observables", dobs, tol.observables),
              ("quadratic", quad, tol.quadratic), ("commutator", comm, tol.commutator))
    failures = tuple(f"{name}: {val:.3e} > {lim:.1e}" for name, val, lim in checks if not val <= lim)
    return OracleReport(p.L, p.g, dq, dobs, quad, comm, not failures, failures)


def run_oracle_compare(cfg: RunConfig) -> OracleReport:
    if cfg.L > oracle.L_MAX:
        raise oracle.SystemTooLarge(f"L={cfg.L} exceeds L_max={oracle.L_MAX}")
    return oracle_compare(cfg.params, cfg.seed, cfg.tolerances, cfg.policy())


def _fmt(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else format(v, ".17g")
    return str(v)


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in COLUMNS])
    return buf.getvalue()


def to_json(rows: list[dict]) -> str:
    clean = [
        {c: (None if isinstance(r[c], float) and math.isnan(r[c]) else r[c]) for c in COLUMNS}
        for r in rows
    ]
    return json.dumps(clean, indent=1) + "\n"


def read_csv(text: str) -> list[dict]:
    out = []
    for r in csv.DictReader(io.StringIO(text)):
        row = dict(r)
        row["site"] = int(row["site"])
        for c in _FLOAT_COLS:
            row[c] = math.nan if row[c] == "" else float(row[c])
        out.append(row)
    return out


def emit(rows: list[dict], fmt: str = "csv", path: str | Path | None = None) -> str:
    """Serialise ``rows``; write to ``path`` when given. Returns the text."""
    if not rows:
        raise ValueError("nothing to emit: table is empty")
    text = to_csv(rows) if fmt == "csv" else to_json(rows)
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text
