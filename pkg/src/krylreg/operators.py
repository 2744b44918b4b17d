"""Matrix-free linear operators.

Every solver in this package works against the :class:`LinearOperator`
interface: an ``m x n`` real map exposing ``apply`` (the action of the
matrix) and ``apply_adjoint`` (the action of its transpose).  Concrete
operators either wrap a dense array or implement their action directly so
that large structured matrices (2-D difference stacks, Kronecker blurs,
projected regularizers) are never materialized.

All vectors are 1-D float64 numpy arrays.  Operators are immutable after
construction and safe to share across threads; ``apply``/``apply_adjoint``
allocate their own work buffers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DimensionMismatch",
    "OrthonormalityError",
    "OperatorShape",
    "LinearOperator",
    "DenseOperator",
    "IdentityOperator",
    "FirstDifferenceOperator",
    "Stacked2DDifferenceOperator",
    "ProjectedOperator",
    "KroneckerBlurOperator",
    "project_complement",
]

# Orthonormality slack accepted for projector blocks.
ORTHONORMALITY_TOL = 1e-10

_FROBENIUS_PROBES = 100
_FROBENIUS_SEED = 0x5EED


class DimensionMismatch(ValueError):
    """A vector length does not match the operator dimension it feeds."""


class OrthonormalityError(ValueError):
    """A column block required to be orthonormal is not (beyond tolerance)."""


@dataclass(frozen=True)
class OperatorShape:
    """Dimensions of an ``m x n`` operator."""

    rows: int
    cols: int

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"operator shape must be at least 1x1, got {self.rows}x{self.cols}")

    def __iter__(self):
        return iter((self.rows, self.cols))


def _as_vector(v, length: int, what: str) -> np.ndarray:
    vec = np.asarray(v, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != length:
        raise DimensionMismatch(f"{what} must be a vector of length {length}, got shape {vec.shape}")
    return vec


class LinearOperator:
    """Abstract ``m x n`` real linear map.

    Subclasses set ``self._shape`` and implement ``_apply``/``_adjoint``
    on validated float64 vectors.
    """

    _shape: OperatorShape

    @property
    def shape(self) -> OperatorShape:
        return self._shape

    @property
    def rows(self) -> int:
        return self._shape.rows

    @property
    def cols(self) -> int:
        return self._shape.cols

    def apply(self, v) -> np.ndarray:
        """Return ``A @ v`` for a length-``cols`` vector ``v``."""
        return self._apply(_as_vector(v, self.cols, "apply input"))

    def apply_adjoint(self, u) -> np.ndarray:
        """Return ``A.T @ u`` for a length-``rows`` vector ``u``."""
        return self._adjoint(_as_vector(u, self.rows, "adjoint input"))

    def _apply(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _adjoint(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def frobenius_norm(self) -> float:
        """Frobenius norm, exact where cheap and stochastic otherwise.

        The fallback uses the identity E|A v|^2 = |A|_F^2 for standard
        normal ``v``, averaged over a fixed number of seeded probes, so the
        returned value is deterministic.
        """
        rng = np.random.default_rng(_FROBENIUS_SEED)
        acc = 0.0
        for _ in range(_FROBENIUS_PROBES):
            av = self._apply(rng.standard_normal(self.cols))
            acc += float(av @ av)
        return float(np.sqrt(acc / _FROBENIUS_PROBES))

    def to_dense(self, max_entries: int = 10**6) -> np.ndarray:
        """Materialize the operator column by column (test oracles only)."""
        if self.rows * self.cols > max_entries:
            raise ValueError(f"refusing to densify a {self.rows}x{self.cols} operator")
        out = np.empty((self.rows, self.cols))
        e = np.zeros(self.cols)
        for j in range(self.cols):
            e[j] = 1.0
            out[:, j] = self._apply(e)
            e[j] = 0.0
        return out

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.rows}x{self.cols})"


class DenseOperator(LinearOperator):
    """Operator backed by an explicit row-major array."""

    def __init__(self, entries) -> None:
        # private copy: operators are immutable after construction
        mat = np.array(entries, dtype=np.float64, order="C", copy=True)
        if mat.ndim != 2:
            raise ValueError("entries must be a 2-D array")
        if not np.all(np.isfinite(mat)):
            raise ValueError("entries must be finite")
        self.entries = mat
        self._shape = OperatorShape(*mat.shape)

    def _apply(self, v: np.ndarray) -> np.ndarray:
        return self.entries @ v

    def _adjoint(self, u: np.ndarray) -> np.ndarray:
        return self.entries.T @ u

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.entries, "fro"))

    def to_dense(self, max_entries: int = 10**6) -> np.ndarray:
        return self.entries.copy()


class IdentityOperator(LinearOperator):
    """The ``n x n`` identity."""

    def __init__(self, n: int) -> None:
        self._shape = OperatorShape(n, n)

    def _apply(self, v: np.ndarray) -> np.ndarray:
        return v.copy()

    _adjoint = _apply

    def frobenius_norm(self) -> float:
        return float(np.sqrt(self.cols))


class FirstDifferenceOperator(LinearOperator):
    """Forward first-difference matrix: ``(n-1) x n`` with rows (1, -1)."""

    def __init__(self, n: int) -> None:
        if n < 2:
            raise ValueError("first-difference operator needs n >= 2")
        self.n = n
        self._shape = OperatorShape(n - 1, n)

    def _apply(self, v: np.ndarray) -> np.ndarray:
        return v[:-1] - v[1:]

    def _adjoint(self, u: np.ndarray) -> np.ndarray:
        w = np.zeros(self.n)
        w[:-1] += u
        w[1:] -= u
        return w

    def frobenius_norm(self) -> float:
        return float(np.sqrt(2.0 * (self.n - 1)))


class Stacked2DDifferenceOperator(LinearOperator):
    """First differences along both axes of an ``N x N`` image.

    Represents the stack [I_N kron D ; D kron I_N] with D the 1-D
    first-difference matrix, acting on column-major vectorized images.
    The matrix, of shape ``2N(N-1) x N^2``, is never formed: both blocks
    are one-dimensional difference passes over image rows and columns.
    """

    def __init__(self, grid_side: int) -> None:
        if grid_side < 2:
            raise ValueError("2-D difference operator needs grid_side >= 2")
        self.grid_side = grid_side
        n = grid_side
        self._shape = OperatorShape(2 * n * (n - 1), n * n)

    def _apply(self, v: np.ndarray) -> np.ndarray:
        n = self.grid_side
        x = v.reshape((n, n), order="F")
        down = x[:-1, :] - x[1:, :]        # (I kron D) vec(X) = vec(D X)
        across = x[:, :-1] - x[:, 1:]      # (D kron I) vec(X) = vec(X D^T)
        return np.concatenate([down.ravel(order="F"), across.ravel(order="F")])

    def _adjoint(self, u: np.ndarray) -> np.ndarray:
        n = self.grid_side
        nblk = n * (n - 1)
        u1 = u[:nblk].reshape((n - 1, n), order="F")
        u2 = u[nblk:].reshape((n, n - 1), order="F")
        w = np.zeros((n, n))
        w[:-1, :] += u1
        w[1:, :] -= u1
        w[:, :-1] += u2
        w[:, 1:] -= u2
        return w.ravel(order="F")

    def frobenius_norm(self) -> float:
        n = self.grid_side
        return float(np.sqrt(4.0 * n * (n - 1)))


def _check_orthonormal(Q: np.ndarray) -> np.ndarray:
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim == 1:
        Q = Q[:, None]
    if Q.ndim != 2 or Q.shape[0] < Q.shape[1]:
        raise ValueError(f"expected a tall orthonormal block, got shape {Q.shape}")
    gram_err = np.abs(Q.T @ Q - np.eye(Q.shape[1])).max()
    if gram_err > ORTHONORMALITY_TOL:
        raise OrthonormalityError(f"columns are not orthonormal: max |Q'Q - I| = {gram_err:.3e}")
    return Q


def project_complement(Q, v) -> np.ndarray:
    """Project ``v`` onto the orthogonal complement of range(Q).

    Returns ``v - Q (Q^T v)`` for an orthonormal column block ``Q``.
    """
    Q = _check_orthonormal(Q)
    vec = _as_vector(v, Q.shape[0], "projection input")
    return vec - Q @ (Q.T @ vec)


class ProjectedOperator(LinearOperator):
    """The composition ``L (I - Q Q^T)`` without forming it.

    ``Q`` must have orthonormal columns.  Applies as
    ``L(v - Q(Q^T v))`` and its adjoint as ``w - Q(Q^T w)`` with
    ``w = L^T u``, so the dense ``p x n`` product never exists.
    """

    def __init__(self, L: LinearOperator, Q) -> None:
        Q = _check_orthonormal(Q)
        if Q.shape[0] != L.cols:
            raise DimensionMismatch(
                f"Q has {Q.shape[0]} rows but L has {L.cols} columns"
            )
        self.L = L
        self.Q = Q.copy()  # decouple from any live factorization buffer
        self._shape = OperatorShape(L.rows, L.cols)

    def _apply(self, v: np.ndarray) -> np.ndarray:
        return self.L.apply(v - self.Q @ (self.Q.T @ v))

    def _adjoint(self, u: np.ndarray) -> np.ndarray:
        w = self.L.apply_adjoint(u)
        return w - self.Q @ (self.Q.T @ w)

    def frobenius_norm(self) -> float:
        # |L (I - QQ^T)|_F^2 = |L|_F^2 - |L Q|_F^2 (orthogonal projector).
        lf = self.L.frobenius_norm()
        lq = np.linalg.norm(
            np.column_stack([self.L.apply(q) for q in self.Q.T]), "fro"
        )
        return float(np.sqrt(max(lf * lf - lq * lq, 0.0)))


class KroneckerBlurOperator(LinearOperator):
    """Separable blur ``X -> left @ X @ right^T`` on vectorized images.

    Uses column-major vectorization, so the matrix form is
    ``right kron left`` of shape ``N^2 x N^2``.
    """

    def __init__(self, left_factor, right_factor) -> None:
        left = np.array(left_factor, dtype=np.float64, order="C", copy=True)
        right = np.array(right_factor, dtype=np.float64, order="C", copy=True)
        if left.ndim != 2 or left.shape[0] != left.shape[1]:
            raise ValueError("left_factor must be square")
        if right.shape != left.shape:
            raise ValueError("factors must have identical square shapes")
        self.left_factor = left
        self.right_factor = right
        n2 = left.shape[0] ** 2
        self._shape = OperatorShape(n2, n2)

    def _image(self, v: np.ndarray) -> np.ndarray:
        n = self.left_factor.shape[0]
        return v.reshape((n, n), order="F")

    def _apply(self, v: np.ndarray) -> np.ndarray:
        x = self._image(v)
        return (self.left_factor @ x @ self.right_factor.T).ravel(order="F")

    def _adjoint(self, u: np.ndarray) -> np.ndarray:
        x = self._image(u)
        return (self.left_factor.T @ x @ self.right_factor).ravel(order="F")

    def frobenius_norm(self) -> float:
        return float(
            np.linalg.norm(self.left_factor, "fro")
            * np.linalg.norm(self.right_factor, "fro")
        )
