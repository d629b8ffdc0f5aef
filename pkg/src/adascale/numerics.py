"""Dense linear algebra, seeded randomness and Gaussian sampling.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. Everything here
is a pure function of its inputs; the only state is inside :class:`RngStream`
generators, which are rebuilt from ``(seed, stream_id)`` on demand.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ArgumentError, NumericalError

CHOLESKY_PIVOT_FLOOR = 1e-12
SYMMETRY_TOL = 1e-10


def as_matrix(X, name: str = "X") -> np.ndarray:
    """Validate user input as a finite 2-D float64 array."""
    A = np.asarray(X, dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        raise ArgumentError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ArgumentError(f"{name} contains NaN or infinite values")
    return A


def as_vector(y, name: str = "y") -> np.ndarray:
    v = np.asarray(y, dtype=np.float64)
    if v.ndim != 1:
        v = v.reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ArgumentError(f"{name} contains NaN or infinite values")
    return v


@dataclass(frozen=True)
class RngStream:
    """A reproducible, splittable random stream.

    Backed by numpy's PCG64 seeded through ``SeedSequence`` with
    ``spawn_key = (stream_id, *path)``, so the draws are identical on every
    platform numpy supports and distinct keys give independent streams.
    """

    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not (0 <= self.seed < 2**64 and 0 <= self.stream_id < 2**64):
            raise ArgumentError("seed and stream_id must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, *keys: int) -> "RngStream":
        """Independent sub-stream identified by ``keys`` (deterministic)."""
        return RngStream(self.seed, self.stream_id, self.path + tuple(int(k) for k in keys))


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise ArgumentError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def solve_least_squares(X, y) -> np.ndarray:
    """Minimum-norm minimiser of ``||y - X b||^2``.

    Uses the SVD-based LAPACK driver (``gelsd``), which is rank revealing, so
    singular designs return the minimum-norm solution instead of blowing up.
    """
    X = as_matrix(X)
    y = as_vector(y)
    n, p = X.shape
    if n < 1 or p < 1:
        raise ArgumentError("least squares needs n >= 1 and p >= 1")
    if y.shape[0] != n:
        raise ArgumentError(f"X has {n} rows but y has {y.shape[0]} entries")
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    return beta


def matrix_rank(X) -> int:
    return int(np.linalg.matrix_rank(as_matrix(X)))


def cholesky_factor(S) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == S``.

    Raises :class:`NumericalError` naming the first pivot that is not
    comfortably positive.
    """
    S = as_matrix(S, "S")
    p = S.shape[0]
    if S.shape != (p, p):
        raise ArgumentError(f"S must be square, got shape {S.shape}")
    if not np.allclose(S, S.T, rtol=0.0, atol=SYMMETRY_TOL):
        raise ArgumentError("S is not symmetric")
    L = np.zeros_like(S)
    for j in range(p):
        pivot = S[j, j] - L[j, :j] @ L[j, :j]
        if pivot <= CHOLESKY_PIVOT_FLOOR:
            raise NumericalError(f"matrix is not positive definite: pivot {j} = {pivot:.3e}")
        L[j, j] = np.sqrt(pivot)
        if j + 1 < p:
            L[j + 1:, j] = (S[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def sample_mvn(mu, S, n: int, rng) -> np.ndarray:
    """``n`` iid rows from N(mu, S), generated as ``mu + L z``."""
    mu = as_vector(mu, "mu")
    L = cholesky_factor(S)
    if L.shape[0] != mu.shape[0]:
        raise ArgumentError("mu and S have incompatible dimensions")
    if n < 0:
        raise ArgumentError("n must be non-negative")
    z = _generator(rng).standard_normal((int(n), mu.shape[0]))
    return mu + z @ L.T


class ColumnStats(NamedTuple):
    mean: np.ndarray
    sd: np.ndarray
    min: np.ndarray
    max: np.ndarray
    distinct: np.ndarray


def column_stats(X) -> ColumnStats:
    """Per-column mean, sample sd (n-1 divisor), range and distinct count."""
    X = as_matrix(X)
    n, p = X.shape
    if n == 0 or p == 0:
        raise ArgumentError("column_stats needs a non-empty matrix")
    mean = X.mean(axis=0)
    lo, hi = X.min(axis=0), X.max(axis=0)
    sd = X.std(axis=0, ddof=1) if n > 1 else np.zeros(p)
    # rounding in the mean can leave ~1e-17 spread on constant columns
    sd[lo == hi] = 0.0
    distinct = np.array([np.unique(X[:, j]).size for j in range(p)], dtype=np.int64)
    return ColumnStats(mean, sd, lo, hi, distinct)
