"""Seeded generators for ill-posed test problems and regularizers.

The four classic 1-D Fredholm/Volterra discretizations (shaw, baart,
deriv2, heat) are built on midpoint grids; the clean right-hand side is
always computed as ``b_true = A @ x_true`` so the consistency assumption
of the solvers holds to machine precision rather than to quadrature
accuracy.  A separable Gaussian blur provides a desk-scale 2-D problem.

Noise is Gaussian white noise rescaled so the relative noise level
``|e| / |b_true|`` equals the requested epsilon exactly.  All randomness
flows through ``numpy.random.default_rng`` (PCG64), so instances are
reproducible from ``(name, size, epsilon, seed)``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .operators import (
    DenseOperator,
    FirstDifferenceOperator,
    IdentityOperator,
    KroneckerBlurOperator,
    LinearOperator,
    Stacked2DDifferenceOperator,
)

__all__ = [
    "ProblemInstance",
    "PROBLEM_NAMES",
    "L_KINDS",
    "gen_shaw",
    "gen_baart",
    "gen_deriv2",
    "gen_heat",
    "gen_blur2d",
    "make_L",
    "add_noise",
    "build_problem",
    "serialize_problem",
    "save_problem",
    "load_problem",
    "problem_digest",
]

_MIN_N = 8


@dataclass
class ProblemInstance:
    """One noisy inverse problem: operator, regularizer, truth, data."""

    name: str
    A: LinearOperator
    L: LinearOperator
    x_true: np.ndarray
    b_true: np.ndarray
    b: np.ndarray
    epsilon: float
    seed: int
    size: int = 0
    L_kind: str = "first_diff_1d"
    psf_sigma: float | None = None


def _check_n(n: int, name: str, even: bool = False) -> None:
    if n < _MIN_N:
        raise ValueError(f"{name} needs n >= {_MIN_N}, got {n}")
    if even and n % 2 != 0:
        raise ValueError(f"{name} needs even n, got {n}")


def gen_shaw(n: int) -> tuple[DenseOperator, np.ndarray, np.ndarray]:
    """1-D image restoration model (severely ill-posed).

    Kernel ``(cos s + cos t)^2 (sin u / u)^2`` with
    ``u = pi (sin s + sin t)`` on ``[-pi/2, pi/2]^2``; true solution a sum
    of two Gaussians.  The midpoint-rule matrix is symmetric.
    """
    _check_n(n, "shaw", even=True)
    h = np.pi / n
    t = -np.pi / 2 + (np.arange(1, n + 1) - 0.5) * h
    co = np.cos(t)
    psi = np.pi * np.sin(t)
    u = psi[:, None] + psi[None, :]
    entries = h * (co[:, None] + co[None, :]) ** 2 * np.sinc(u / np.pi) ** 2
    x_true = 2.0 * np.exp(-6.0 * (t - 0.8) ** 2) + np.exp(-2.0 * (t + 0.5) ** 2)
    A = DenseOperator(entries)
    return A, x_true, entries @ x_true


def gen_baart(n: int) -> tuple[DenseOperator, np.ndarray, np.ndarray]:
    """1-D gravity-surveying style problem (severely ill-posed).

    Kernel ``exp(s cos t)`` for ``s in [0, pi/2]``, ``t in [0, pi]``;
    true solution ``sin t``.
    """
    _check_n(n, "baart")
    hs = (np.pi / 2) / n
    ht = np.pi / n
    s = (np.arange(1, n + 1) - 0.5) * hs
    t = (np.arange(1, n + 1) - 0.5) * ht
    entries = ht * np.exp(s[:, None] * np.cos(t[None, :]))
    x_true = np.sin(t)
    A = DenseOperator(entries)
    return A, x_true, entries @ x_true


def gen_deriv2(n: int) -> tuple[DenseOperator, np.ndarray, np.ndarray]:
    """Second-derivative (Green's function) problem (mildly ill-posed).

    Kernel ``s (t - 1)`` for ``s < t`` and ``t (s - 1)`` otherwise on the
    unit square; true solution ``x(t) = t`` at the midpoints.
    """
    _check_n(n, "deriv2")
    h = 1.0 / n
    t = (np.arange(1, n + 1) - 0.5) * h
    s_col = t[:, None]
    t_row = t[None, :]
    entries = h * np.where(s_col < t_row, s_col * (t_row - 1.0), t_row * (s_col - 1.0))
    x_true = t.copy()
    A = DenseOperator(entries)
    return A, x_true, entries @ x_true


def gen_heat(n: int) -> tuple[DenseOperator, np.ndarray, np.ndarray]:
    """Inverse heat equation (moderately ill-posed).

    Volterra kernel ``t^{-3/2} / (2 sqrt(pi)) * exp(-1/(4t))`` (unit
    conductivity), discretized as a lower-triangular Toeplitz matrix on
    midpoints; true solution is the classic ramp/hump profile supported
    on the first half of the interval.
    """
    _check_n(n, "heat", even=True)
    h = 1.0 / n
    t = (np.arange(1, n + 1) - 0.5) * h
    kern = (h / (2.0 * np.sqrt(np.pi))) * t ** (-1.5) * np.exp(-0.25 / t)
    idx = np.arange(n)
    lag = idx[:, None] - idx[None, :]
    entries = np.where(lag >= 0, kern[np.abs(lag)], 0.0)
    x_true = np.zeros(n)
    ti = np.arange(1, n // 2 + 1) * (20.0 / n)
    half = np.where(
        ti < 2.0,
        0.75 * ti**2 / 4.0,
        np.where(ti < 3.0, 0.75 + (ti - 2.0) * (3.0 - ti), 0.75 * np.exp(-(ti - 3.0) * 2.0)),
    )
    x_true[: n // 2] = half
    A = DenseOperator(entries)
    return A, x_true, entries @ x_true


def _piecewise_image(n: int) -> np.ndarray:
    x = np.zeros((n, n))
    x[n // 8 : n // 2, n // 8 : n // 2] = 1.0
    x[5 * n // 8 : 7 * n // 8, n // 4 : 3 * n // 4] = 0.5
    return x


def gen_blur2d(N: int, psf_sigma: float = 2.0) -> tuple[KroneckerBlurOperator, np.ndarray, np.ndarray]:
    """Separable Gaussian blur of an ``N x N`` piecewise-constant image.

    Each factor row is a sampled 1-D Gaussian normalized to unit sum
    (zero boundary: mass leaving the image is renormalized away).
    """
    _check_n(N, "blur2d")
    if psf_sigma <= 0:
        raise ValueError("psf_sigma must be positive")
    idx = np.arange(N)
    factor = np.exp(-((idx[:, None] - idx[None, :]) ** 2) / (2.0 * psf_sigma**2))
    factor /= factor.sum(axis=1, keepdims=True)
    A = KroneckerBlurOperator(factor, factor)
    x_img = _piecewise_image(N)
    x_true = x_img.ravel(order="F")
    return A, x_true, A.apply(x_true)


L_KINDS = ("identity", "first_diff_1d", "first_diff_2d")


def make_L(kind: str, dims: int) -> LinearOperator:
    """Regularization operator factory.

    ``identity`` and ``first_diff_1d`` take the vector length; the 2-D
    stack takes the image side ``N`` (acting on length ``N^2`` vectors).
    """
    if kind == "identity":
        return IdentityOperator(dims)
    if kind == "first_diff_1d":
        return FirstDifferenceOperator(dims)
    if kind == "first_diff_2d":
        return Stacked2DDifferenceOperator(dims)
    raise ValueError(f"unknown regularizer kind {kind!r}; expected one of {L_KINDS}")


def add_noise(b_true, epsilon: float, seed: int) -> np.ndarray:
    """Add seeded Gaussian noise rescaled so ``|e| = epsilon |b_true|``."""
    b_true = np.asarray(b_true, dtype=np.float64)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    bnorm = np.linalg.norm(b_true)
    if bnorm == 0.0:
        raise ValueError("cannot scale noise against a zero right-hand side")
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(b_true.shape[0])
    e *= epsilon * bnorm / np.linalg.norm(e)
    return b_true + e


_GENERATORS_1D = {
    "shaw": gen_shaw,
    "baart": gen_baart,
    "deriv2": gen_deriv2,
    "heat": gen_heat,
}

PROBLEM_NAMES = (*_GENERATORS_1D, "blur2d")


def build_problem(
    name: str,
    size: int,
    epsilon: float,
    seed: int,
    L_kind: str | None = None,
    psf_sigma: float = 2.0,
) -> ProblemInstance:
    """Assemble a full noisy instance.

    ``size`` is the vector length for 1-D problems and the image side
    for ``blur2d``.  The default regularizer is the first-difference
    operator matching the problem dimensionality.
    """
    if name in _GENERATORS_1D:
        A, x_true, b_true = _GENERATORS_1D[name](size)
        kind = L_kind or "first_diff_1d"
        if kind == "first_diff_2d":
            raise ValueError(f"first_diff_2d regularizer does not apply to 1-D problem {name!r}")
        L = make_L(kind, size)
        sigma = None
    elif name == "blur2d":
        A, x_true, b_true = gen_blur2d(size, psf_sigma)
        kind = L_kind or "first_diff_2d"
        L = make_L(kind, size if kind == "first_diff_2d" else size * size)
        sigma = psf_sigma
    else:
        raise ValueError(f"unknown problem {name!r}; expected one of {PROBLEM_NAMES}")
    b = add_noise(b_true, epsilon, seed)
    return ProblemInstance(
        name=name, A=A, L=L, x_true=x_true, b_true=b_true, b=b,
        epsilon=epsilon, seed=seed, size=size, L_kind=kind, psf_sigma=sigma,
    )


_FORMAT = "krylreg-problem"
_VECTORS = ("x_true", "b_true", "b")


def serialize_problem(problem: ProblemInstance) -> bytes:
    """Container bytes: one JSON header line, then the raw little-endian
    float64 payload of x_true, b_true, b."""
    header = {
        "format": _FORMAT,
        "version": 1,
        "name": problem.name,
        "size": problem.size,
        "epsilon": problem.epsilon,
        "seed": problem.seed,
        "L_kind": problem.L_kind,
        "psf_sigma": problem.psf_sigma,
        "dtype": "<f8",
        "vectors": {v: int(getattr(problem, v).shape[0]) for v in _VECTORS},
    }
    parts = [json.dumps(header, sort_keys=True).encode("utf-8"), b"\n"]
    parts += [np.ascontiguousarray(getattr(problem, v), dtype="<f8").tobytes() for v in _VECTORS]
    return b"".join(parts)


def save_problem(problem: ProblemInstance, path) -> None:
    Path(path).write_bytes(serialize_problem(problem))


def load_problem(path) -> ProblemInstance:
    """Rebuild a problem saved by :func:`save_problem`.

    Operators are regenerated from the header parameters; the stored
    vectors are used verbatim.
    """
    raw = Path(path).read_bytes()
    nl = raw.index(b"\n")
    header = json.loads(raw[:nl].decode("utf-8"))
    if header.get("format") != _FORMAT:
        raise ValueError(f"{path} is not a {_FORMAT} file")
    rebuilt = build_problem(
        header["name"],
        header["size"],
        header["epsilon"],
        header["seed"],
        L_kind=header["L_kind"],
        psf_sigma=header["psf_sigma"] or 2.0,
    )
    offset = nl + 1
    for v in _VECTORS:
        length = header["vectors"][v]
        vec = np.frombuffer(raw, dtype="<f8", count=length, offset=offset).copy()
        setattr(rebuilt, v, vec)
        offset += 8 * length
    return rebuilt


def problem_digest(problem: ProblemInstance) -> str:
    """SHA-256 of the serialized container (regression checks)."""
    return hashlib.sha256(serialize_problem(problem)).hexdigest()
