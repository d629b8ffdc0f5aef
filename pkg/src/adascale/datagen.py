"""Synthetic linear-model scenarios for the two simulation studies."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .numerics import cholesky_factor, sample_mvn

SIM2_BETAS = {
    1: (0, 0, 0, 0, 1, 1, 1, 1),
    2: (1, 1, 1, 1, 0, 0, 0, 0),
    3: (0, 0, 1, 1, 1, 1, 0, 0),
    4: (1, 1, 0, 0, 0, 0, 1, 1),
}


@dataclass(frozen=True)
class SimScenario:
    n: int
    p: int
    beta: np.ndarray
    mu: np.ndarray
    covariance: np.ndarray
    noise_sd: float
    train_ratio: float = 0.5

    def __post_init__(self):
        if self.beta.shape != (self.p,) or self.mu.shape != (self.p,):
            raise ArgumentError("beta and mu must have length p")
        if self.covariance.shape != (self.p, self.p):
            raise ArgumentError("covariance must be p x p")
        if not self.noise_sd > 0:
            raise ArgumentError("noise_sd must be positive")
        if not 0 < self.train_ratio < 1:
            raise ArgumentError("train_ratio must be in (0, 1)")
        cholesky_factor(self.covariance)

    @property
    def n_train(self) -> int:
        return math.ceil(self.n * self.train_ratio)


def _ar1(p: int, rho: float) -> np.ndarray:
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def sim1_scenario() -> SimScenario:
    return SimScenario(
        n=100, p=8,
        beta=np.array([3, 1.5, 0, 0, 2, 0, 0, 0], dtype=np.float64),
        mu=np.zeros(8),
        covariance=_ar1(8, 0.5),
        noise_sd=3.0,
    )


def sim2_scenario(case: int, correlated: bool = False, mode: str = "correlation") -> SimScenario:
    """Sim2 case 1..4 with variances 3^i (i = 1..8).

    In the correlated variant ``mode="correlation"`` sets corr(i, j) = 0.5^|i-j|;
    ``mode="raw"`` puts 0.5^|i-j| directly on the off-diagonal of the covariance
    (also positive definite here, since the variances dominate).
    """
    if case not in SIM2_BETAS:
        raise ArgumentError(f"sim2 case must be 1..4, got {case}")
    if mode not in ("correlation", "raw"):
        raise ArgumentError(f"unknown covariance mode {mode!r}")
    var = 3.0 ** np.arange(1, 9)
    if not correlated:
        cov = np.diag(var)
    elif mode == "correlation":
        sd = np.sqrt(var)
        cov = _ar1(8, 0.5) * np.outer(sd, sd)
    else:
        cov = _ar1(8, 0.5)
        np.fill_diagonal(cov, var)
    return SimScenario(n=1000, p=8, beta=np.array(SIM2_BETAS[case], dtype=np.float64),
                       mu=np.zeros(8), covariance=cov, noise_sd=5.0)


@dataclass(frozen=True)
class Realization:
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray


def realize(s: SimScenario, rng) -> Realization:
    """Draw X ~ N(mu, Sigma), y = X beta + eps; leading rows form the training set."""
    X = sample_mvn(s.mu, s.covariance, s.n, rng.child(0))
    eps = rng.child(1).generator().standard_normal(s.n) * s.noise_sd
    y = X @ s.beta + eps
    k = s.n_train
    return Realization(X[:k], y[:k], X[k:], y[k:])
