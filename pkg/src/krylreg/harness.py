"""Experiment harness: build problems, sweep solvers over noise levels,
and emit per-k curves plus summary tables as CSV/JSON.

Outputs are deterministic for a fixed spec and seed.  Wall-clock columns
are reported for information only; ``deterministic=True`` zeroes them so
repeated executions produce byte-identical files (the mode used by the
``verify`` battery).
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import bidiag, metrics, problems, solvers
from .hybrid import METHODS, HybridConfig, hyb_cgme_step, hyb_tcgme_step, run_hybrid
from .lsqr import LsqrConfig, lsqr_solve
from .operators import DenseOperator
from .problems import PROBLEM_NAMES, build_problem

__all__ = [
    "ExperimentSpec",
    "RunRow",
    "RunRecord",
    "run_experiment",
    "emit_csv",
    "emit_summary_csv",
    "emit_json",
    "records_to_json",
    "verification_suite",
    "VerificationCheck",
]

CURVE_COLUMNS = "method,problem,n,epsilon,seed,k,rel_error,inner_iters,wall_ms"
SUMMARY_COLUMNS = "method,problem,epsilon,best_k,best_error,total_wall_ms"


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a problem, a list of noise levels, and methods."""

    problem: str
    size: int
    epsilons: tuple[float, ...]
    seed: int
    methods: tuple[str, ...]
    L_kind: str | None = None
    max_outer_k: int = 50
    inner_tol: float = 1e-6
    reorth: str = "full"
    psf_sigma: float = 2.0

    def __post_init__(self) -> None:
        if self.problem not in PROBLEM_NAMES:
            raise ValueError(f"unknown problem {self.problem!r}; expected one of {PROBLEM_NAMES}")
        if not self.methods:
            raise ValueError("no methods given")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; expected a subset of {METHODS}")
        for eps in self.epsilons:
            if not 0.0 < eps < 1.0:
                raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
        if not self.epsilons:
            raise ValueError("no noise levels given")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        data = dict(data)
        for key in ("epsilons", "methods"):
            if key in data and isinstance(data[key], list):
                data[key] = tuple(data[key])
        return cls(**data)


@dataclass(frozen=True)
class RunRow:
    k: int
    rel_error: float
    inner_iterations: int
    wall_ms: float


@dataclass
class RunRecord:
    """One (method, epsilon) run: the ExperimentSpec echo, per-k rows, and bests."""

    method: str
    problem: str
    size: int
    epsilon: float
    seed: int
    rows: list[RunRow] = field(default_factory=list)
    best_k: int | None = None
    best_error: float | None = None
    total_wall_ms: float = 0.0
    breakdown: str | None = None
    error: str | None = None


def run_experiment(spec: ExperimentSpec) -> list[RunRecord]:
    """Run every (method, epsilon) pair of an ExperimentSpec.

    Failures of a single run are recorded on its RunRecord and do not
    abort the remaining runs.
    """
    records: list[RunRecord] = []
    for epsilon in spec.epsilons:
        problem = None
        build_error: str | None = None
        try:
            problem = build_problem(
                spec.problem, spec.size, epsilon, spec.seed,
                L_kind=spec.L_kind, psf_sigma=spec.psf_sigma,
            )
        except Exception as exc:  # recorded per-run below
            build_error = f"{type(exc).__name__}: {exc}"
        for method in spec.methods:
            record = RunRecord(
                method=method, problem=spec.problem, size=spec.size,
                epsilon=epsilon, seed=spec.seed,
            )
            records.append(record)
            if problem is None:
                record.error = build_error
                continue
            cfg = HybridConfig(
                inner=LsqrConfig(tol=spec.inner_tol),
                max_outer_k=spec.max_outer_k,
                reorth=spec.reorth,
            )
            t0 = time.perf_counter()
            try:
                sweep = run_hybrid(problem, method, cfg)
            except Exception as exc:
                record.error = f"{type(exc).__name__}: {exc}"
                continue
            record.total_wall_ms = (time.perf_counter() - t0) * 1e3
            record.breakdown = sweep.breakdown
            record.rows = [
                RunRow(k=k, rel_error=e, inner_iterations=it, wall_ms=w)
                for k, e, it, w in zip(
                    sweep.ks, sweep.rel_errors, sweep.inner_iterations, sweep.wall_ms
                )
            ]
            if sweep.ks:
                curve = metrics.analyze_curve(sweep.rel_errors, ks=sweep.ks)
                record.best_k = curve.best_k
                record.best_error = curve.best_error
    return records


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(records: list[RunRecord], path, deterministic: bool = False) -> None:
    """Per-k curve CSV with columns
    method,problem,n,epsilon,seed,k,rel_error,inner_iters,wall_ms."""
    lines = [CURVE_COLUMNS]
    for rec in records:
        for row in rec.rows:
            wall = 0.0 if deterministic else row.wall_ms
            lines.append(
                ",".join(
                    _fmt(v)
                    for v in (
                        rec.method, rec.problem, rec.size, rec.epsilon, rec.seed,
                        row.k, row.rel_error, row.inner_iterations, wall,
                    )
                )
            )
    _write_text(path, "\n".join(lines) + "\n")


def emit_summary_csv(records: list[RunRecord], path, deterministic: bool = False) -> None:
    """Best-per-run summary CSV with columns
    method,problem,epsilon,best_k,best_error,total_wall_ms."""
    lines = [SUMMARY_COLUMNS]
    for rec in records:
        wall = 0.0 if deterministic else rec.total_wall_ms
        lines.append(
            ",".join(
                _fmt(v)
                for v in (rec.method, rec.problem, rec.epsilon, rec.best_k, rec.best_error, wall)
            )
        )
    _write_text(path, "\n".join(lines) + "\n")


def records_to_json(records: list[RunRecord], deterministic: bool = False) -> str:
    payload = []
    for rec in records:
        entry = asdict(rec)
        if deterministic:
            entry["total_wall_ms"] = 0.0
            for row in entry["rows"]:
                row["wall_ms"] = 0.0
        payload.append(entry)
    return json.dumps(payload, indent=2, sort_keys=True)


def emit_json(records: list[RunRecord], path, deterministic: bool = False) -> None:
    """JSON mirror of the run records."""
    _write_text(path, records_to_json(records, deterministic) + "\n")


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Verification battery (the `verify` CLI subcommand).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerificationCheck:
    name: str
    passed: bool
    detail: str


def _check(name: str, passed: bool, detail: str) -> VerificationCheck:
    return VerificationCheck(name=name, passed=bool(passed), detail=detail)


def _bidiag_recurrence_check() -> VerificationCheck:
    A, x_true, b_true = problems.gen_shaw(64)
    b = problems.add_noise(b_true, 1e-2, 7)
    state = bidiag.bidiag_init(A, b)
    try:
        bidiag.bidiag_extend(state, A, 30)
    except bidiag.GolubKahanBreakdown:
        pass
    k = state.k
    mats = bidiag.extract_matrices(state, k)
    fro = A.frobenius_norm()
    dense = A.entries
    res1 = np.linalg.norm(dense @ state.Q_cols(k) - state.P_cols(k + 1) @ mats.B_kplus, "fro")
    res2 = np.linalg.norm(dense.T @ state.P_cols(k) - state.Q_cols(k) @ mats.B_k.T, "fro")
    orth = max(
        np.abs(state.P.T @ state.P - np.eye(state.P.shape[1])).max(),
        np.abs(state.Q.T @ state.Q - np.eye(k)).max(),
    )
    ok = res1 <= 1e-10 * fro and res2 <= 1e-10 * fro and orth <= 1e-10
    return _check(
        "bidiag-recurrence",
        ok,
        f"k={k} residuals=({res1 / fro:.2e},{res2 / fro:.2e}) orth={orth:.2e}",
    )


def _gap_ordering_check() -> VerificationCheck:
    A, x_true, b_true = problems.gen_shaw(64)
    b = problems.add_noise(b_true, 1e-2, 7)
    state = bidiag.bidiag_init(A, b)
    kmax = 12
    try:
        bidiag.bidiag_extend(state, A, kmax + 2)
    except bidiag.GolubKahanBreakdown:
        pass
    reports = {k: metrics.gamma_gaps(A, state, k) for k in range(1, kmax + 1)}
    slack = 1e-10
    ok = True
    prev_lsqr = float(np.linalg.norm(A.entries, 2))
    for k in range(1, kmax + 1):
        g = reports[k]
        ok &= g.gamma_lsqr < g.gamma_cgme + slack
        ok &= g.gamma_cgme < prev_lsqr + slack
        if k + 1 <= kmax:
            ok &= reports[k + 1].gamma_cgme < g.gamma_cgme + slack
            ok &= g.gamma_tcgme <= g.theta_min + reports[k + 1].gamma_cgme + slack
        prev_lsqr = g.gamma_lsqr
    return _check("gap-orderings", ok, f"shaw(64) k=1..{kmax}")


def _identity_collapse_check() -> VerificationCheck:
    problem = build_problem("shaw", 200, 1e-2, 11, L_kind="identity")
    state = bidiag.bidiag_init(problem.A, problem.b)
    bidiag.bidiag_extend(state, problem.A, 9)
    cfg = HybridConfig(inner=LsqrConfig(tol=1e-10), max_outer_k=8)
    worst = 0.0
    for k in (2, 5, 8):
        xc = solvers.cgme_iterate(state, k).x
        xt = solvers.tcgme_iterate(state, k).x
        hc = hyb_cgme_step(state, problem.L, k, cfg).x_L
        ht = hyb_tcgme_step(state, problem.L, k, cfg).x_L
        worst = max(
            worst,
            np.linalg.norm(hc - xc) / np.linalg.norm(xc),
            np.linalg.norm(ht - xt) / np.linalg.norm(xt),
        )
    return _check("identity-collapse", worst <= 1e-8, f"max rel dev {worst:.2e}")


def _condition_monotonicity_check() -> VerificationCheck:
    problem = build_problem("deriv2", 120, 1e-2, 13)
    state = bidiag.bidiag_init(problem.A, problem.b)
    bidiag.bidiag_extend(state, problem.A, 40)
    L_dense = DenseOperator(problem.L.to_dense())
    prev = np.inf
    ok = True
    worst = 0.0
    for k in range(2, 41):
        kappa = metrics.projected_condition(L_dense, state.Q_cols(k))
        if kappa > prev * (1.0 + 1e-10):
            ok = False
            worst = max(worst, kappa / prev - 1.0)
        prev = kappa
    return _check("condition-monotonicity", ok, "deriv2(120) k=2..40")


def _lsqr_pinv_check() -> VerificationCheck:
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(5):
        m, n, r = 40, 30, 18
        U = np.linalg.qr(rng.standard_normal((m, r)))[0]
        V = np.linalg.qr(rng.standard_normal((n, r)))[0]
        svals = np.linspace(1.0, 3.0, r)
        M = DenseOperator(U @ np.diag(svals) @ V.T)
        d = rng.standard_normal(m)
        report = lsqr_solve(M, d, LsqrConfig(tol=1e-12, max_iters=400))
        expected = np.linalg.pinv(M.entries) @ d
        worst = max(worst, np.linalg.norm(report.solution - expected) / np.linalg.norm(expected))
        if np.any(np.diff(report.residual_history) > 1e-12):
            return _check("lsqr-pinv", False, "residual history not monotone")
    return _check("lsqr-pinv", worst <= 1e-6, f"max rel dev {worst:.2e}")


def _semi_convergence_check(seed: int) -> tuple[VerificationCheck, list[RunRecord]]:
    spec = ExperimentSpec(
        problem="shaw",
        size=400,
        epsilons=(1e-2,),
        seed=seed,
        methods=("hyb_cgme", "hyb_tcgme"),
        max_outer_k=15,
    )
    records = run_experiment(spec)
    by_method = {rec.method: rec for rec in records}
    tc = by_method["hyb_tcgme"]
    cg = by_method["hyb_cgme"]
    ok = (
        tc.best_error is not None
        and cg.best_error is not None
        and tc.best_error < cg.best_error
        and tc.best_error <= 0.5
    )
    if ok:
        curve = metrics.analyze_curve([r.rel_error for r in tc.rows], ks=[r.k for r in tc.rows])
        ok = curve.interior_minimum
    detail = f"tcgme best={tc.best_error}(k={tc.best_k}) cgme best={cg.best_error}"
    return _check("semi-convergence-trend", ok, detail), records


def verification_suite(seed: int = 20240101) -> tuple[list[VerificationCheck], list[RunRecord]]:
    """Deterministic invariant/oracle battery behind ``krylreg verify``.

    Returns the check list plus the records of the canned experiment,
    whose summary CSV is byte-identical across executions for a fixed
    seed.
    """
    checks = [
        _bidiag_recurrence_check(),
        _gap_ordering_check(),
        _identity_collapse_check(),
        _condition_monotonicity_check(),
        _lsqr_pinv_check(),
    ]
    trend, records = _semi_convergence_check(seed)
    checks.append(trend)
    return checks, records
