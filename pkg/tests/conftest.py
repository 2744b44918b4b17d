import numpy as np
import pytest


def random_orthonormal(n: int, k: int, seed: int = 0) -> np.ndarray:
    """Orthonormal n x k block from a seeded Gaussian QR."""
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
