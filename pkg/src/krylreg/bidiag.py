"""Golub-Kahan bidiagonalization with incremental extension.

Starting from ``p_1 = b / |b|``, each step computes

    r = A^T p_j - beta_j q_{j-1},   alpha_j = |r|,  q_j = r / alpha_j
    s = A q_j  - alpha_j p_j,       beta_{j+1} = |s|,  p_{j+1} = s / beta_{j+1}

accumulating orthonormal column blocks P (left) and Q (right) together
with the lower-bidiagonal coefficients.  On ill-posed problems the raw
recurrence loses orthogonality catastrophically, so the default policy
reorthogonalizes every new column against all previous ones twice; a
"none" policy is kept for experiments.

A coefficient falling below ``1e-14 * |A|_F`` signals that the Krylov
subspace is numerically exhausted (exact termination); extension then
raises :class:`GolubKahanBreakdown` after recording all completed steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import LinearOperator, _as_vector

__all__ = [
    "GolubKahanBreakdown",
    "BidiagState",
    "BidiagMatrices",
    "bidiag_init",
    "bidiag_extend",
    "extract_matrices",
    "lower_bidiagonal",
]

BREAKDOWN_SCALE = 1e-14

REORTH_POLICIES = ("full", "none")


class GolubKahanBreakdown(RuntimeError):
    """Krylov subspace exhausted: a recurrence coefficient vanished.

    ``step`` is the 1-based step at which the breakdown occurred;
    completed steps remain valid on the state.
    """

    def __init__(self, step: int, message: str):
        self.step = step
        super().__init__(message)

    @classmethod
    def at_coefficient(cls, step: int, coefficient: str, value: float,
                       threshold: float) -> "GolubKahanBreakdown":
        index = step + 1 if coefficient == "beta" else step
        return cls(
            step,
            f"{coefficient}_{index} = {value:.3e} below breakdown "
            f"threshold {threshold:.3e} at step {step}",
        )


class _ColumnBlock:
    """Growable matrix of columns with amortized O(1) appends."""

    __slots__ = ("_buf", "count")

    def __init__(self, dim: int, capacity: int = 32):
        self._buf = np.empty((dim, capacity))
        self.count = 0

    def append(self, col: np.ndarray) -> None:
        if self.count == self._buf.shape[1]:
            grown = np.empty((self._buf.shape[0], 2 * self._buf.shape[1]))
            grown[:, : self.count] = self._buf
            self._buf = grown
        self._buf[:, self.count] = col
        self.count += 1

    def view(self, count: int | None = None) -> np.ndarray:
        return self._buf[:, : (self.count if count is None else count)]

    def last(self) -> np.ndarray:
        return self._buf[:, self.count - 1]


class BidiagState:
    """Accumulated state of the bidiagonalization of ``A`` from ``b``.

    After ``k`` completed steps, ``P`` is ``m x (k+1)``, ``Q`` is
    ``n x k``, ``alphas`` holds ``alpha_1..alpha_k`` and ``betas`` holds
    ``beta_1..beta_{k+1}`` with ``beta_1 = |b|``.  A beta-side breakdown
    leaves ``P`` at ``m x k`` (the next left vector is not normalizable).

    Single writer: :func:`bidiag_extend` mutates; reads are safe once an
    extension has returned.
    """

    def __init__(self, p_block: _ColumnBlock, q_block: _ColumnBlock,
                 alphas: list[float], betas: list[float],
                 reorth: str, breakdown_tol: float):
        self._p = p_block
        self._q = q_block
        self._alphas = alphas
        self._betas = betas
        self.reorth = reorth
        self.breakdown_tol = breakdown_tol
        self.breakdown_step: int | None = None

    @property
    def k(self) -> int:
        """Number of completed bidiagonalization steps."""
        return len(self._alphas)

    @property
    def P(self) -> np.ndarray:
        """Left orthonormal block (view; do not mutate)."""
        return self._p.view()

    @property
    def Q(self) -> np.ndarray:
        """Right orthonormal block (view; do not mutate)."""
        return self._q.view()

    def P_cols(self, count: int) -> np.ndarray:
        return self._p.view(count)

    def Q_cols(self, count: int) -> np.ndarray:
        return self._q.view(count)

    @property
    def alphas(self) -> np.ndarray:
        return np.array(self._alphas)

    @property
    def betas(self) -> np.ndarray:
        return np.array(self._betas)

    @property
    def beta1(self) -> float:
        return self._betas[0]

    def __repr__(self) -> str:
        bd = f", breakdown at {self.breakdown_step}" if self.breakdown_step else ""
        return f"BidiagState(k={self.k}, reorth={self.reorth!r}{bd})"


@dataclass(frozen=True)
class BidiagMatrices:
    """Dense bidiagonal blocks extracted from a state at index ``k``.

    ``B_k`` is the ``k x k`` lower-bidiagonal block, ``B_kplus`` appends
    the row ``beta_{k+1} e_k^T``, and ``B_kp1`` is the square
    ``(k+1) x (k+1)`` block, present only when step ``k+1`` exists.
    """

    B_k: np.ndarray
    B_kplus: np.ndarray
    B_kp1: np.ndarray | None


def lower_bidiagonal(alphas, betas) -> np.ndarray:
    """Dense lower-bidiagonal matrix with diagonal ``alphas`` and
    subdiagonal ``betas`` (``len(betas) == len(alphas) - 1``)."""
    alphas = np.asarray(alphas, dtype=np.float64)
    betas = np.asarray(betas, dtype=np.float64)
    k = alphas.shape[0]
    if betas.shape[0] != k - 1:
        raise ValueError("need exactly k-1 subdiagonal entries")
    B = np.zeros((k, k))
    B[np.arange(k), np.arange(k)] = alphas
    if k > 1:
        B[np.arange(1, k), np.arange(k - 1)] = betas
    return B


def bidiag_init(A: LinearOperator, b, reorth: str = "full") -> BidiagState:
    """Set up the process with ``p_1 = b / |b|`` and no completed steps."""
    if reorth not in REORTH_POLICIES:
        raise ValueError(f"unknown reorthogonalization policy {reorth!r}")
    b = _as_vector(b, A.rows, "right-hand side")
    beta1 = float(np.linalg.norm(b))
    if beta1 == 0.0:
        raise GolubKahanBreakdown(0, "zero right-hand side")
    p = _ColumnBlock(A.rows)
    p.append(b / beta1)
    q = _ColumnBlock(A.cols)
    tol = BREAKDOWN_SCALE * A.frobenius_norm()
    return BidiagState(p, q, [], [beta1], reorth, tol)


def _reorthogonalize(r: np.ndarray, block: np.ndarray) -> np.ndarray:
    # Two classical Gram-Schmidt passes; "twice is enough" for working
    # precision when the new direction is not pure noise.
    for _ in range(2):
        r = r - block @ (block.T @ r)
    return r


def bidiag_extend(state: BidiagState, A: LinearOperator, steps: int) -> BidiagState:
    """Advance the process by ``steps`` steps, mutating ``state``.

    Raises :class:`GolubKahanBreakdown` on exact termination; completed
    steps remain available on the state.
    """
    if state.breakdown_step is not None:
        raise GolubKahanBreakdown(
            state.breakdown_step,
            f"cannot extend past breakdown at step {state.breakdown_step}",
        )
    full = state.reorth == "full"
    for _ in range(steps):
        j = state.k + 1
        r = A.apply_adjoint(state._p.last())
        if j >= 2:
            r -= state._betas[j - 1] * state._q.last()
        if full and state._q.count:
            r = _reorthogonalize(r, state._q.view())
        alpha = float(np.linalg.norm(r))
        if alpha <= state.breakdown_tol:
            state.breakdown_step = j
            raise GolubKahanBreakdown.at_coefficient(j, "alpha", alpha, state.breakdown_tol)
        qj = r / alpha
        state._q.append(qj)
        state._alphas.append(alpha)
        s = A.apply(qj) - alpha * state._p.last()
        if full:
            s = _reorthogonalize(s, state._p.view())
        beta = float(np.linalg.norm(s))
        state._betas.append(beta)
        if beta <= state.breakdown_tol:
            state.breakdown_step = j
            raise GolubKahanBreakdown.at_coefficient(j, "beta", beta, state.breakdown_tol)
        state._p.append(s / beta)
    return state


def extract_matrices(state: BidiagState, k: int | None = None) -> BidiagMatrices:
    """Dense coefficient blocks at index ``k`` (default: the full state)."""
    if k is None:
        k = state.k
    if not 1 <= k <= state.k:
        raise ValueError(f"k must be in [1, {state.k}], got {k}")
    alphas = state._alphas
    betas = state._betas
    B_k = lower_bidiagonal(alphas[:k], betas[1:k])
    B_kplus = np.zeros((k + 1, k))
    B_kplus[:k, :] = B_k
    B_kplus[k, k - 1] = betas[k]
    B_kp1 = None
    if state.k >= k + 1:
        B_kp1 = lower_bidiagonal(alphas[: k + 1], betas[1 : k + 1])
    return BidiagMatrices(B_k=B_k, B_kplus=B_kplus, B_kp1=B_kp1)
