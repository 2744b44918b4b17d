"""Evaluation quantities: seminorm relative errors, rank-k approximation
gaps, projected condition numbers, and convergence-curve analysis.

The gap and condition probes assemble dense matrices and run full SVDs;
they are test oracles, size-guarded and never part of a solver path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bidiag import BidiagState, extract_matrices
from .dense_kernels import TruncatedFactor, svd_small
from .operators import DenseOperator, LinearOperator

__all__ = [
    "ErrorCurve",
    "GammaGapReport",
    "relative_error",
    "gamma_gaps",
    "projected_condition",
    "analyze_curve",
]

_ORACLE_GUARD = 10**6
_COND_FLOOR_SCALE = 1e-14


@dataclass(frozen=True)
class ErrorCurve:
    """Summary of a relative-error sequence over outer indices ``ks``.

    ``best_k`` is the argmin (smallest index on ties);
    ``interior_minimum`` flags semi-convergence: the argmin is strictly
    between the first and last index.
    """

    ks: tuple[int, ...]
    rel_errors: tuple[float, ...]
    best_k: int
    best_error: float
    interior_minimum: bool


@dataclass(frozen=True)
class GammaGapReport:
    """Spectral gaps of the three rank-k approximations at index ``k``,
    together with the smallest singular value of the ``(k+1) x k``
    bidiagonal block."""

    k: int
    gamma_cgme: float
    gamma_tcgme: float
    gamma_lsqr: float
    theta_min: float


def relative_error(L: LinearOperator, x, x_true) -> float:
    """Seminorm relative error ``|L (x - x_true)| / |L x_true|``."""
    x = np.asarray(x, dtype=np.float64)
    x_true = np.asarray(x_true, dtype=np.float64)
    denom = float(np.linalg.norm(L.apply(x_true)))
    if denom == 0.0:
        raise ValueError("relative error is undefined: L x_true = 0")
    return float(np.linalg.norm(L.apply(x - x_true)) / denom)


def _spectral_norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2))


def gamma_gaps(A: DenseOperator, state: BidiagState, k: int) -> GammaGapReport:
    """Gaps ``|A - (rank-k approximation)|`` for the CGME, TCGME and
    LSQR projections, by explicit dense assembly (oracle only).

    Requires ``state.k >= k + 1`` so the square ``(k+1)`` block exists.
    """
    dense = A.entries
    if dense.size > _ORACLE_GUARD:
        raise ValueError(f"gamma-gap oracle refuses matrices with {dense.size} entries")
    if state.k < k + 1:
        raise ValueError(f"need {k + 1} bidiagonalization steps, have {state.k}")
    mats = extract_matrices(state, k)
    P_k = state.P_cols(k)
    P_k1 = state.P_cols(k + 1)
    Q_k = state.Q_cols(k)
    Q_k1 = state.Q_cols(k + 1)
    C_k = TruncatedFactor(source=svd_small(mats.B_kp1), rank=k).matrix()
    gamma_cgme = _spectral_norm(dense - P_k @ mats.B_k @ Q_k.T)
    gamma_tcgme = _spectral_norm(dense - P_k1 @ C_k @ Q_k1.T)
    gamma_lsqr = _spectral_norm(dense - P_k1 @ mats.B_kplus @ Q_k.T)
    theta_min = float(np.linalg.svd(mats.B_kplus, compute_uv=False)[-1])
    return GammaGapReport(
        k=k,
        gamma_cgme=gamma_cgme,
        gamma_tcgme=gamma_tcgme,
        gamma_lsqr=gamma_lsqr,
        theta_min=theta_min,
    )


def projected_condition(L, Q) -> float:
    """Condition number of ``L Q_perp`` with ``Q_perp`` a full
    orthogonal completion of ``Q`` (dense SVD oracle).

    Returns ``inf`` when the smallest singular value is below
    ``1e-14`` times the largest.  Requires ``p >= n - k``.
    """
    dense = L.entries if isinstance(L, DenseOperator) else np.asarray(L, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim == 1:
        Q = Q[:, None]
    n, k = Q.shape
    p = dense.shape[0]
    if dense.shape[1] != n:
        raise ValueError(f"L has {dense.shape[1]} columns but Q has {n} rows")
    if k >= n:
        raise ValueError("Q already spans the whole space; no complement left")
    if p < n - k:
        raise ValueError(f"condition probe needs p >= n - k (p={p}, n={n}, k={k})")
    full, _ = np.linalg.qr(Q, mode="complete")
    q_perp = full[:, k:]
    svals = np.linalg.svd(dense @ q_perp, compute_uv=False)
    if svals[-1] <= _COND_FLOOR_SCALE * svals[0]:
        return float("inf")
    return float(svals[0] / svals[-1])


def analyze_curve(rel_errors, ks=None) -> ErrorCurve:
    """Locate the best index of a relative-error sequence.

    ``ks`` defaults to ``1..len(rel_errors)``.  Ties resolve to the
    smallest index (the cheaper solution).
    """
    errors = tuple(float(e) for e in rel_errors)
    if not errors:
        raise ValueError("cannot analyze an empty error sequence")
    if ks is None:
        ks = tuple(range(1, len(errors) + 1))
    else:
        ks = tuple(int(k) for k in ks)
        if len(ks) != len(errors):
            raise ValueError("ks and rel_errors must have equal length")
    best_pos = int(np.argmin(errors))
    return ErrorCurve(
        ks=ks,
        rel_errors=errors,
        best_k=ks[best_pos],
        best_error=errors[best_pos],
        interior_minimum=0 < best_pos < len(errors) - 1,
    )
