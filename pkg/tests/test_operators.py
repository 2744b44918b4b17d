import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from krylreg.operators import (
    DenseOperator,
    DimensionMismatch,
    FirstDifferenceOperator,
    IdentityOperator,
    KroneckerBlurOperator,
    OperatorShape,
    ProjectedOperator,
    Stacked2DDifferenceOperator,
    project_complement,
)

from conftest import random_orthonormal


def test_shape_validation():
    with pytest.raises(ValueError):
        OperatorShape(0, 3)
    rows, cols = OperatorShape(4, 3)
    assert (rows, cols) == (4, 3)


def test_first_difference_apply_examples():
    L = FirstDifferenceOperator(3)
    np.testing.assert_allclose(L.apply([1.0, 1.0, 1.0]), [0.0, 0.0])
    np.testing.assert_allclose(L.apply([3.0, 2.0, 0.0]), [1.0, 2.0])


def test_first_difference_adjoint_example():
    L = FirstDifferenceOperator(3)
    np.testing.assert_allclose(L.apply_adjoint([1.0, 0.0]), [1.0, -1.0, 0.0])


def test_dense_adjoint_example():
    A = DenseOperator([[2.0, 0.0], [0.0, 3.0]])
    np.testing.assert_allclose(A.apply_adjoint([1.0, 1.0]), [2.0, 3.0])


def test_projected_operator_example():
    op = ProjectedOperator(IdentityOperator(2), np.array([[1.0], [0.0]]))
    np.testing.assert_allclose(op.apply([1.0, 1.0]), [0.0, 1.0])


def test_dimension_mismatch():
    A = DenseOperator(np.ones((3, 2)))
    with pytest.raises(DimensionMismatch):
        A.apply([1.0, 2.0, 3.0])
    with pytest.raises(DimensionMismatch):
        A.apply_adjoint([1.0, 2.0])


def test_dense_rejects_nonfinite():
    with pytest.raises(ValueError):
        DenseOperator([[1.0, np.nan]])


def _operators_for_adjoint_check(seed):
    rng = np.random.default_rng(seed)
    ops = [
        DenseOperator(rng.standard_normal((7, 5))),
        FirstDifferenceOperator(9),
        Stacked2DDifferenceOperator(5),
        IdentityOperator(6),
        KroneckerBlurOperator(rng.standard_normal((4, 4)), rng.standard_normal((4, 4))),
        ProjectedOperator(
            DenseOperator(rng.standard_normal((8, 6))), random_orthonormal(6, 2, seed)
        ),
    ]
    return ops


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_adjoint_consistency(seed):
    rng = np.random.default_rng(seed)
    for op in _operators_for_adjoint_check(seed):
        v = rng.standard_normal(op.cols)
        u = rng.standard_normal(op.rows)
        lhs = op.apply(v) @ u
        rhs = v @ op.apply_adjoint(u)
        scale = op.frobenius_norm() * np.linalg.norm(v) * np.linalg.norm(u)
        assert abs(lhs - rhs) <= 1e-12 * max(scale, 1e-300)


def test_random_dense_adjoint_identity_tight(rng):
    A = DenseOperator(rng.standard_normal((7, 5)))
    for _ in range(50):
        v = rng.standard_normal(5)
        u = rng.standard_normal(7)
        av = A.apply(v)
        assert abs(av @ u - v @ A.apply_adjoint(u)) <= 1e-12 * np.linalg.norm(av) * np.linalg.norm(u) + 1e-15


def test_project_complement_examples():
    e1 = np.eye(3)[:, :1]
    np.testing.assert_allclose(project_complement(e1, [5.0, 1.0, 2.0]), [0.0, 1.0, 2.0])
    full = np.eye(3)
    assert np.linalg.norm(project_complement(full, [0.3, -2.0, 4.0])) <= 1e-10


def test_project_complement_random_block():
    Q = random_orthonormal(50, 10, seed=3)
    rng = np.random.default_rng(4)
    v = rng.standard_normal(50)
    res = project_complement(Q, v)
    assert np.linalg.norm(Q.T @ res) <= 1e-10 * np.linalg.norm(v)


def test_projected_operator_requires_orthonormal_columns():
    L = IdentityOperator(4)
    bad = np.ones((4, 2))
    with pytest.raises(ValueError):
        ProjectedOperator(L, bad)


@pytest.mark.parametrize("n,k,seed", [(40, 5, 0), (200, 17, 1), (63, 1, 2)])
def test_projected_operator_matches_dense(n, k, seed):
    rng = np.random.default_rng(seed)
    L = DenseOperator(rng.standard_normal((n - 1, n)))
    Q = random_orthonormal(n, k, seed)
    op = ProjectedOperator(L, Q)
    dense = L.entries @ (np.eye(n) - Q @ Q.T)
    v = rng.standard_normal(n)
    u = rng.standard_normal(n - 1)
    np.testing.assert_allclose(op.apply(v), dense @ v, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(op.apply_adjoint(u), dense.T @ u, rtol=1e-10, atol=1e-12)


def _first_difference_dense(n):
    D = np.zeros((n - 1, n))
    D[np.arange(n - 1), np.arange(n - 1)] = 1.0
    D[np.arange(n - 1), np.arange(1, n)] = -1.0
    return D


@pytest.mark.parametrize("N", [2, 5, 16])
def test_stacked_2d_difference_matches_kronecker(N):
    op = Stacked2DDifferenceOperator(N)
    D = _first_difference_dense(N)
    dense = np.vstack([np.kron(np.eye(N), D), np.kron(D, np.eye(N))])
    assert op.shape.rows == 2 * N * (N - 1)
    np.testing.assert_allclose(op.to_dense(), dense, atol=1e-12)


def test_kronecker_blur_matches_dense_kron(rng):
    left = rng.standard_normal((6, 6))
    right = rng.standard_normal((6, 6))
    op = KroneckerBlurOperator(left, right)
    dense = np.kron(right, left)  # column-major vec convention
    v = rng.standard_normal(36)
    np.testing.assert_allclose(op.apply(v), dense @ v, atol=1e-12)
    u = rng.standard_normal(36)
    np.testing.assert_allclose(op.apply_adjoint(u), dense.T @ u, atol=1e-12)


def test_frobenius_norms_exact_paths(rng):
    A = rng.standard_normal((9, 7))
    assert DenseOperator(A).frobenius_norm() == pytest.approx(np.linalg.norm(A, "fro"))
    assert FirstDifferenceOperator(10).frobenius_norm() == pytest.approx(np.sqrt(18.0))
    assert Stacked2DDifferenceOperator(4).frobenius_norm() == pytest.approx(np.sqrt(48.0))
    proj = ProjectedOperator(DenseOperator(A.T @ A), random_orthonormal(7, 3, 5))
    dense = proj.to_dense()
    assert proj.frobenius_norm() == pytest.approx(np.linalg.norm(dense, "fro"), rel=1e-10)


def test_stochastic_frobenius_estimate_is_reasonable(rng):
    class Opaque(KroneckerBlurOperator):
        def frobenius_norm(self):
            return super(KroneckerBlurOperator, self).frobenius_norm()

    left = rng.standard_normal((5, 5))
    right = rng.standard_normal((5, 5))
    op = Opaque(left, right)
    exact = np.linalg.norm(np.kron(right, left), "fro")
    assert op.frobenius_norm() == pytest.approx(exact, rel=0.5)
