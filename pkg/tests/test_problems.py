import numpy as np
import pytest

from krylreg.operators import KroneckerBlurOperator, Stacked2DDifferenceOperator
from krylreg.problems import (
    add_noise,
    build_problem,
    gen_baart,
    gen_blur2d,
    gen_deriv2,
    gen_heat,
    gen_shaw,
    load_problem,
    make_L,
    problem_digest,
    save_problem,
)

GENERATORS = {"shaw": gen_shaw, "baart": gen_baart, "deriv2": gen_deriv2, "heat": gen_heat}


def test_shaw_matrix_is_symmetric():
    A, x_true, b_true = gen_shaw(64)
    assert np.abs(A.entries - A.entries.T).max() <= 1e-12


def test_shaw_singular_values_decay_fast():
    A, *_ = gen_shaw(64)
    s = np.linalg.svd(A.entries, compute_uv=False)
    assert s[25] <= 1e-12 * s[0]
    assert s[10] > 1e-12 * s[0]  # not degenerate either


def test_deriv2_true_solution_is_midpoint_ramp():
    A, x_true, b_true = gen_deriv2(100)
    h = 1.0 / 100
    np.testing.assert_allclose(x_true, (np.arange(1, 101) - 0.5) * h)
    np.testing.assert_allclose(A.entries @ x_true, b_true)


def test_heat_matrix_is_lower_triangular_toeplitz():
    A, x_true, b_true = gen_heat(32)
    M = A.entries
    assert np.abs(np.triu(M, 1)).max() == 0.0
    d0 = np.diag(M, -3)
    assert np.allclose(d0, d0[0])
    assert x_true[: 16].max() > 0 and np.all(x_true[16:] == 0.0)


@pytest.mark.parametrize("name", list(GENERATORS))
def test_generated_instances_satisfy_invariants(name):
    problem = build_problem(name, 64, 0.1, 11)
    consistency = np.linalg.norm(problem.A.apply(problem.x_true) - problem.b_true)
    assert consistency <= 1e-10 * np.linalg.norm(problem.b_true)
    level = np.linalg.norm(problem.b - problem.b_true) / np.linalg.norm(problem.b_true)
    assert abs(level - 0.1) <= 1e-12


@pytest.mark.parametrize("name", ["shaw", "heat"])
def test_even_n_requirements(name):
    with pytest.raises(ValueError, match="even"):
        GENERATORS[name](63)


def test_minimum_size_enforced():
    for gen in GENERATORS.values():
        with pytest.raises(ValueError):
            gen(4)


def test_blur_delta_kernel_limit():
    A, x_true, b_true = gen_blur2d(16, psf_sigma=0.05)
    assert np.linalg.norm(b_true - x_true) <= 1e-8 * np.linalg.norm(x_true)


def test_blur_factor_rows_normalized():
    A, *_ = gen_blur2d(12, psf_sigma=2.5)
    sums = A.left_factor.sum(axis=1)
    np.testing.assert_allclose(sums, 1.0, atol=1e-12)


def test_blur_matches_explicit_kronecker():
    A, x_true, b_true = gen_blur2d(12, psf_sigma=1.5)
    dense = np.kron(A.right_factor, A.left_factor)
    v = np.sin(np.arange(144.0))
    np.testing.assert_allclose(A.apply(v), dense @ v, atol=1e-12)


def test_make_L_shapes():
    L1 = make_L("first_diff_1d", 4)
    assert (L1.rows, L1.cols) == (3, 4)
    dense = L1.to_dense()
    np.testing.assert_allclose(dense[0], [1.0, -1.0, 0.0, 0.0])
    L2 = make_L("first_diff_2d", 3)
    assert (L2.rows, L2.cols) == (12, 9)
    assert isinstance(L2, Stacked2DDifferenceOperator)
    LI = make_L("identity", 5)
    np.testing.assert_allclose(LI.apply([1.0, 2.0, 3.0, 4.0, 5.0]), [1, 2, 3, 4, 5])
    with pytest.raises(ValueError):
        make_L("second_diff", 5)


def test_add_noise_exact_level_and_determinism():
    rng = np.random.default_rng(0)
    b_true = rng.standard_normal(500)
    b1 = add_noise(b_true, 0.1, seed=42)
    b2 = add_noise(b_true, 0.1, seed=42)
    level = np.linalg.norm(b1 - b_true) / np.linalg.norm(b_true)
    assert abs(level - 0.1) <= 1e-12
    np.testing.assert_array_equal(b1, b2)


def test_add_noise_seeds_decorrelated():
    rng = np.random.default_rng(0)
    b_true = rng.standard_normal(1000)
    e1 = add_noise(b_true, 0.1, seed=1) - b_true
    e2 = add_noise(b_true, 0.1, seed=2) - b_true
    rho = (e1 @ e2) / (np.linalg.norm(e1) * np.linalg.norm(e2))
    assert abs(rho) < 0.2


def test_add_noise_validation():
    with pytest.raises(ValueError):
        add_noise(np.zeros(4), 0.1, 0)
    with pytest.raises(ValueError):
        add_noise(np.ones(4), -0.5, 0)


def test_problem_roundtrip_through_container(tmp_path):
    problem = build_problem("heat", 32, 0.05, 77)
    path = tmp_path / "heat.krp"
    save_problem(problem, path)
    loaded = load_problem(path)
    np.testing.assert_array_equal(loaded.x_true, problem.x_true)
    np.testing.assert_array_equal(loaded.b_true, problem.b_true)
    np.testing.assert_array_equal(loaded.b, problem.b)
    assert loaded.epsilon == problem.epsilon
    assert loaded.seed == problem.seed
    assert loaded.L_kind == problem.L_kind
    np.testing.assert_allclose(loaded.A.to_dense(), problem.A.to_dense())


def test_blur_problem_roundtrip(tmp_path):
    problem = build_problem("blur2d", 10, 0.01, 3, psf_sigma=1.2)
    path = tmp_path / "blur.krp"
    save_problem(problem, path)
    loaded = load_problem(path)
    assert isinstance(loaded.A, KroneckerBlurOperator)
    np.testing.assert_array_equal(loaded.b, problem.b)


def test_serialized_output_is_sha_stable():
    a = problem_digest(build_problem("shaw", 64, 0.01, 123))
    b = problem_digest(build_problem("shaw", 64, 0.01, 123))
    c = problem_digest(build_problem("shaw", 64, 0.01, 124))
    assert a == b
    assert a != c


def test_load_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b'{"format": "something-else"}\n')
    with pytest.raises(ValueError):
        load_problem(path)
