"""Per-feature affine scalers.

Every method, classical or adaptive, compiles to the same form::

    x'_ij = alpha_j * (x_ij - mu_j)

with ``mu`` and ``alpha`` learned from the training rows only. The adaptive
family derives ``alpha`` from least-squares coefficients of the response on
the centred training design.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ArgumentError, DataError, NumericalError
from .numerics import as_matrix, as_vector, column_stats, matrix_rank, solve_least_squares

LEVEL_MEAN_FLOOR = 1e-12
SNAP_RTOL = 1e-12
DEFAULT_GAMMA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


class ZeroedFeatureWarning(UserWarning):
    pass


class Method(str, enum.Enum):
    NONE = "None"
    ADAPTIVE = "Adaptive"
    GENERALIZED_ADAPTIVE = "GeneralizedAdaptive"
    ADAPTIVE_HIGH_DIM = "AdaptiveHighDim"
    STANDARDIZATION = "Standardization"
    RANGE = "Range"
    PARETO = "Pareto"
    VAST = "Vast"
    LEVEL = "Level"
    GELMAN_2SD = "Gelman2SD"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def needs_target(self) -> bool:
        return self in (Method.ADAPTIVE, Method.GENERALIZED_ADAPTIVE, Method.ADAPTIVE_HIGH_DIM)

    @classmethod
    def parse(cls, name: str) -> "Method":
        key = name.strip().lower().replace("-", "").replace("_", "").replace(" ", "")
        try:
            return _ALIASES[key]
        except KeyError:
            raise ArgumentError(f"unknown scaling method {name!r}") from None


# Report row order; Gelman goes last.
_LABELS = {
    Method.NONE: "No",
    Method.ADAPTIVE: "AS",
    Method.GENERALIZED_ADAPTIVE: "GAS",
    Method.ADAPTIVE_HIGH_DIM: "ASHD",
    Method.STANDARDIZATION: "Stand",
    Method.RANGE: "RS",
    Method.PARETO: "PS",
    Method.VAST: "VS",
    Method.LEVEL: "LS",
    Method.GELMAN_2SD: "Gelman",
}
TABLE_ORDER = tuple(_LABELS)

_ALIASES = {}
for _m, _lab in _LABELS.items():
    for _k in (_m.value, _lab, _m.name):
        _ALIASES[_k.lower().replace("_", "")] = _m
_ALIASES.update({
    "no": Method.NONE, "noscaling": Method.NONE, "ash": Method.ADAPTIVE_HIGH_DIM,
    "zscore": Method.STANDARDIZATION, "standardize": Method.STANDARDIZATION,
    "minmax": Method.RANGE, "gelman": Method.GELMAN_2SD,
})


@dataclass(frozen=True)
class ScalerSpec:
    method: Method = Method.NONE
    gamma: float = 1.0

    def __post_init__(self):
        if not isinstance(self.method, Method):
            object.__setattr__(self, "method", Method(self.method))
        if not 0.0 <= self.gamma <= 1.0:
            raise ArgumentError(f"gamma must lie in [0, 1], got {self.gamma}")

    @classmethod
    def parse(cls, text: str) -> "ScalerSpec":
        """Parse ``"GAS"`` or ``"ASHD:0.5"`` style names."""
        name, _, g = text.partition(":")
        return cls(Method.parse(name), float(g) if g else 1.0)

    @property
    def label(self) -> str:
        return self.method.label


@dataclass(frozen=True)
class FittedScaler:
    spec: ScalerSpec
    offsets: np.ndarray
    multipliers: np.ndarray
    zeroed_features: tuple[int, ...] = field(default=())

    @property
    def n_features(self) -> int:
        return self.offsets.shape[0]

    def transform(self, X) -> np.ndarray:
        return transform(self, X)

    def to_record(self) -> str:
        """Line-oriented ``key=value`` text; floats use round-trip repr."""
        def floats(v):
            return ",".join(repr(float(x)) for x in v)
        lines = [
            f"method={self.spec.method.value}",
            f"gamma={self.spec.gamma!r}",
            f"n_features={self.n_features}",
            f"offsets={floats(self.offsets)}",
            f"multipliers={floats(self.multipliers)}",
            f"zeroed={','.join(str(j) for j in self.zeroed_features)}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_record(cls, text: str) -> "FittedScaler":
        kv = {}
        for line in text.splitlines():
            if line.strip():
                k, sep, v = line.partition("=")
                if not sep:
                    raise DataError(f"malformed scaler record line {line!r}")
                kv[k.strip()] = v.strip()
        try:
            spec = ScalerSpec(Method(kv["method"]), float(kv["gamma"]))
            p = int(kv["n_features"])
            mu = np.array([float(x) for x in kv["offsets"].split(",")] if p else [])
            alpha = np.array([float(x) for x in kv["multipliers"].split(",")] if p else [])
            zeroed = tuple(int(j) for j in kv["zeroed"].split(",") if j)
        except (KeyError, ValueError) as exc:
            raise DataError(f"malformed scaler record: {exc}") from None
        if mu.shape != (p,) or alpha.shape != (p,):
            raise DataError("scaler record vector lengths disagree with n_features")
        return cls(spec, mu, alpha, zeroed)


def _centered_ols(Xc: np.ndarray, y: np.ndarray) -> np.ndarray:
    n, p = Xc.shape
    if n <= p or matrix_rank(Xc) < p:
        raise NumericalError(
            f"adaptive scaling needs a full-rank centred design with n > p (n={n}, p={p})")
    yc = y - y.mean()
    return _snap(solve_least_squares(Xc, yc), Xc, yc)


def _univariate_slopes(Xc: np.ndarray, y: np.ndarray) -> np.ndarray:
    ss = np.einsum("ij,ij->j", Xc, Xc)
    yc = y - y.mean()
    cross = Xc.T @ yc
    out = np.zeros_like(ss)
    ok = ss > 0
    out[ok] = cross[ok] / ss[ok]
    return _snap(out, Xc, yc)


def _snap(beta, Xc, yc):
    """Set coefficients whose fitted contribution is rounding noise to exactly 0."""
    contrib = np.abs(beta) * np.sqrt(np.einsum("ij,ij->j", Xc, Xc))
    beta = beta.copy()
    beta[contrib <= SNAP_RTOL * np.sqrt(yc @ yc)] = 0.0
    return beta


def _is_binary(stats, kinds, j) -> bool:
    if kinds is not None and kinds[j] is not None:
        return str(kinds[j]).lower() == "binary"
    return stats.distinct[j] <= 2


def fit_scaler(spec: ScalerSpec, X_train, y_train=None, kinds: Sequence[str] | None = None
               ) -> FittedScaler:
    """Learn offsets and multipliers for ``spec`` from training data."""
    if isinstance(spec, (str, Method)):
        spec = ScalerSpec(Method.parse(spec) if isinstance(spec, str) else spec)
    X = as_matrix(X_train, "X_train")
    n, p = X.shape
    if kinds is not None and len(kinds) != p:
        raise ArgumentError(f"kinds has {len(kinds)} entries for {p} features")
    m = spec.method
    if m.needs_target:
        if y_train is None:
            raise ArgumentError(f"{m.value} scaling requires y_train")
        y = as_vector(y_train, "y_train")
        if y.shape[0] != n:
            raise ArgumentError("X_train and y_train lengths differ")

    stats = column_stats(X)
    mean, sd = stats.mean, stats.sd
    mu = mean.copy()
    alpha = np.ones(p)

    def inv(v):
        out = np.zeros(p)
        nz = v != 0
        out[nz] = 1.0 / v[nz]
        return out

    if m is Method.NONE:
        mu = np.zeros(p)
    elif m is Method.STANDARDIZATION:
        alpha = inv(sd)
    elif m is Method.RANGE:
        mu = stats.min.copy()
        alpha = inv(stats.max - stats.min)
    elif m is Method.PARETO:
        alpha = inv(np.sqrt(sd))
    elif m is Method.GELMAN_2SD:
        alpha = inv(2.0 * sd)
        for j in range(p):
            if _is_binary(stats, kinds, j):
                mu[j], alpha[j] = 0.0, 1.0
    elif m is Method.VAST:
        alpha = mean * inv(sd**2)
    elif m is Method.LEVEL:
        bad = np.flatnonzero(np.abs(mean) < LEVEL_MEAN_FLOOR)
        if bad.size:
            raise NumericalError(
                f"unstable level scaling: feature {int(bad[0])} has mean {mean[bad[0]]:.3e}")
        alpha = 1.0 / mean
    else:
        Xc = X - mean
        if m is Method.ADAPTIVE_HIGH_DIM:
            beta = _univariate_slopes(Xc, y)
        else:
            beta = _centered_ols(Xc, y)
        if m is Method.ADAPTIVE:
            alpha = beta
        else:
            alpha = np.abs(beta) ** spec.gamma

    zeroed = tuple(int(j) for j in np.flatnonzero(alpha == 0))
    if zeroed:
        warnings.warn(f"{m.value} scaling zeroed features {list(zeroed)}", ZeroedFeatureWarning,
                      stacklevel=2)
    return FittedScaler(spec, mu, alpha, zeroed)


def transform(s: FittedScaler, X) -> np.ndarray:
    X = as_matrix(X)
    if X.shape[1] != s.n_features:
        raise ArgumentError(f"scaler fitted on {s.n_features} features, got {X.shape[1]}")
    if s.spec.method is Method.NONE:
        return X.copy()
    return s.multipliers * (X - s.offsets)


def _cv_loss(y_true, y_pred, loss: str) -> float:
    if loss == "mse":
        return float(np.mean((y_true - y_pred) ** 2))
    if loss == "error_rate":
        return float(np.mean(y_true != y_pred))
    raise ArgumentError(f"unknown loss {loss!r}")


@dataclass(frozen=True)
class GammaSelection:
    gamma_star: float
    grid: tuple[float, ...]
    cv_scores: tuple[float, ...]


def select_gamma_cv(X_train, y_train, grid=DEFAULT_GAMMA_GRID, folds: int = 5,
                    downstream: Callable | None = None, rng=None, *,
                    method: Method = Method.GENERALIZED_ADAPTIVE, loss: str = "mse",
                    kinds=None) -> GammaSelection:
    """Choose gamma for GAS/ASH by k-fold CV of a downstream model.

    ``downstream(X_fit, y_fit, X_val, rng)`` must return predictions for
    ``X_val``. The same folds and the same downstream stream are used for
    every grid value. Scores within ``1e-9 * (score + var(y))`` of each other
    are treated as tied and resolved toward the smaller gamma.
    """
    from .dataio import kfold_indices

    X = as_matrix(X_train, "X_train")
    y = np.asarray(y_train)
    grid = tuple(float(g) for g in grid)
    if not grid:
        raise ArgumentError("gamma grid is empty")
    if any(not 0.0 <= g <= 1.0 for g in grid):
        raise ArgumentError("gamma grid values must lie in [0, 1]")
    if folds < 2:
        raise ArgumentError("folds must be >= 2")
    if downstream is None:
        raise ArgumentError("select_gamma_cv needs a downstream model")
    if rng is None:
        raise ArgumentError("select_gamma_cv needs an rng")
    n = X.shape[0]
    fold_sets = kfold_indices(n, folds, rng.child(0))
    for v in fold_sets:
        if n - v.size < 2 or v.size < 1:
            raise ArgumentError("each CV fold needs at least 2 fitting rows and 1 validation row")

    scores = []
    for g in grid:
        spec = ScalerSpec(method, g)
        total = 0.0
        for f, val in enumerate(fold_sets):
            fit_rows = np.setdiff1d(np.arange(n), val)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ZeroedFeatureWarning)
                sc = fit_scaler(spec, X[fit_rows], y[fit_rows], kinds)
            pred = downstream(sc.transform(X[fit_rows]), y[fit_rows], sc.transform(X[val]),
                              rng.child(1, f))
            total += _cv_loss(y[val], np.asarray(pred), loss) * val.size
        scores.append(total / n)

    scale = float(np.var(y.astype(np.float64))) if loss == "mse" else 0.0
    order = sorted(range(len(grid)), key=lambda i: grid[i])
    best = order[0]
    for i in order[1:]:
        if scores[i] < scores[best] - 1e-9 * (abs(scores[best]) + scale):
            best = i
    return GammaSelection(grid[best], grid, tuple(scores))
