"""Linear model zoo: OLS and penalised least squares by coordinate descent.

All penalised fits minimise ``1/2 ||y - b0 - X b||^2 + sum_j pen(|b_j|)`` with
an unpenalised intercept (handled by centring). Supported penalties are the
lasso, the adaptive lasso (weighted l1), SCAD, MCP and the nonnegative
garrote.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import _cd
from .errors import ArgumentError, ConvergenceError, NumericalError
from .numerics import as_matrix, as_vector, matrix_rank, solve_least_squares

TOL = 1e-7
MAX_SWEEPS = 10_000
N_LAMBDA = 50
LAMBDA_MIN_RATIO = 1e-3


class Family(str, enum.Enum):
    LASSO = "Lasso"
    ADAPTIVE_LASSO = "AdaptiveLasso"
    SCAD = "SCAD"
    MCP = "MCP"
    GARROTE = "Garrote"

    @classmethod
    def parse(cls, name: str) -> "Family":
        key = name.strip().lower().replace("_", "").replace("-", "").replace(" ", "")
        for f in cls:
            if f.value.lower() == key:
                return f
        if key in ("alasso", "adalasso"):
            return cls.ADAPTIVE_LASSO
        raise ArgumentError(f"unknown penalty family {name!r}")


@dataclass(frozen=True)
class PenaltySpec:
    family: Family = Family.LASSO
    lam: float = 0.0
    scad_a: float = 3.7
    mcp_gamma: float = 3.0
    adaptive_weights: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not self.lam >= 0:
            raise ArgumentError(f"lambda must be >= 0, got {self.lam}")
        if not self.scad_a > 2:
            raise ArgumentError("scad_a must exceed 2")
        if not self.mcp_gamma > 1:
            raise ArgumentError("mcp_gamma must exceed 1")
        if self.adaptive_weights is not None:
            w = np.asarray(self.adaptive_weights, dtype=np.float64)
            if np.any(~(w > 0)):
                raise ArgumentError("adaptive weights must be positive")
            object.__setattr__(self, "adaptive_weights", w)


@dataclass(frozen=True)
class LinearFit:
    intercept: float
    coefficients: np.ndarray
    lambda_used: float = 0.0
    objective_trace: tuple[float, ...] = ()
    selected_support: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        support = tuple(int(j) for j in np.flatnonzero(self.coefficients != 0))
        object.__setattr__(self, "selected_support", support)

    def predict(self, X) -> np.ndarray:
        return predict_linear(self, X)

    def to_record(self) -> str:
        return "\n".join([
            f"intercept={float(self.intercept)!r}",
            "coefficients=" + ",".join(repr(float(b)) for b in self.coefficients),
            f"lambda={float(self.lambda_used)!r}",
            "support=" + ",".join(str(j) for j in self.selected_support),
        ]) + "\n"


def predict_linear(fit: LinearFit, X) -> np.ndarray:
    X = as_matrix(X)
    if X.shape[1] != fit.coefficients.shape[0]:
        raise ArgumentError(f"fit has {fit.coefficients.shape[0]} coefficients, X has "
                            f"{X.shape[1]} columns")
    return fit.intercept + X @ fit.coefficients


def _prep(X, y):
    X = as_matrix(X)
    y = as_vector(y)
    if X.shape[0] != y.shape[0]:
        raise ArgumentError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if X.shape[0] < 2:
        raise ArgumentError("need at least 2 observations")
    xm, ym = X.mean(axis=0), y.mean()
    return X, y, X - xm, y - ym, xm, ym


def fit_ols(X, y) -> LinearFit:
    """Least squares with intercept; minimum-norm slopes if rank deficient."""
    X, y, Xc, yc, xm, ym = _prep(X, y)
    beta = solve_least_squares(Xc, yc)
    return LinearFit(float(ym - xm @ beta), beta)


def _full_rank_ols(Xc, yc, family):
    n, p = Xc.shape
    if n <= p or matrix_rank(Xc) < p:
        raise NumericalError(f"{family.value} needs a full-rank OLS fit with n > p "
                             f"(n={n}, p={p})")
    return solve_least_squares(Xc, yc)


@dataclass(frozen=True)
class _Problem:
    """Centred Gram-form problem plus the map back to original coefficients."""

    G: np.ndarray
    c: np.ndarray
    yy: float
    n: int
    weights: np.ndarray
    fam: int
    param: float
    to_coef: np.ndarray      # original coefficient = to_coef * solver variable
    xm: np.ndarray
    ym: float

    def lambda_max(self) -> float:
        if self.fam == _cd.NONNEG_LASSO:
            m = float(np.max(self.c)) if self.c.size else 0.0
            return m if m > 0 else float(np.max(np.abs(self.c)))
        finite = np.isfinite(self.weights)
        if not finite.any():
            return 0.0
        return float(np.max(np.abs(self.c[finite]) / self.weights[finite]))

    def finish(self, v, lam, trace=()) -> LinearFit:
        coef = self.to_coef * v
        coef[coef == 0] = 0.0  # drop signed zeros
        return LinearFit(float(self.ym - self.xm @ coef), coef, float(lam), tuple(trace))


def _problem(X, y, spec: PenaltySpec) -> _Problem:
    X, y, Xc, yc, xm, ym = _prep(X, y)
    p = X.shape[1]
    fam = spec.family
    weights = np.ones(p)
    to_coef = np.ones(p)
    param = 0.0
    code = _cd.LASSO
    if fam is Family.ADAPTIVE_LASSO:
        if spec.adaptive_weights is not None:
            if spec.adaptive_weights.shape != (p,):
                raise ArgumentError("adaptive_weights length differs from p")
            weights = spec.adaptive_weights.copy()
        else:
            b = np.abs(_full_rank_ols(Xc, yc, fam))
            weights = np.full(p, np.inf)
            weights[b > 0] = 1.0 / b[b > 0]
    elif fam is Family.GARROTE:
        b = _full_rank_ols(Xc, yc, fam)
        Xc = Xc * b
        to_coef = b.copy()
        code = _cd.NONNEG_LASSO
    elif fam is Family.SCAD:
        code, param = _cd.SCAD, spec.scad_a
    elif fam is Family.MCP:
        code, param = _cd.MCP, spec.mcp_gamma
    G = Xc.T @ Xc
    c = Xc.T @ yc
    return _Problem(G, c, float(yc @ yc), X.shape[0], weights, code, float(param), to_coef, xm,
                    float(ym))


def fit_penalized(X, y, spec: PenaltySpec, *, tol: float = TOL,
                  max_sweeps: int = MAX_SWEEPS) -> LinearFit:
    """Single-lambda fit from a zero start, recording the objective per sweep."""
    pr = _problem(X, y, spec)
    trace = np.empty(max_sweeps + 1)
    v, used, ok = _cd.solve(pr.G, pr.c, pr.yy, pr.n, np.zeros(pr.c.shape[0]), float(spec.lam),
                            pr.weights, pr.fam, pr.param, tol, max_sweeps, trace)
    trace = trace[:used + 1]
    if not ok:
        raise ConvergenceError(f"{spec.family.value} did not converge in {max_sweeps} sweeps",
                               trace)
    return pr.finish(v, spec.lam, trace)


def lambda_grid(X, y, spec: PenaltySpec, n_lambda: int = N_LAMBDA,
                min_ratio: float = LAMBDA_MIN_RATIO) -> np.ndarray:
    """Log-spaced grid from the smallest all-zero lambda down to ``min_ratio`` of it.

    For the plain lasso, SCAD and MCP the top is ``max_j |x_j'(y - ybar)|``;
    weighted and garrote problems use the matching weighted/transformed KKT
    bound so the grid moves with the features under rescaling.
    """
    top = _problem(X, y, spec).lambda_max()
    return _grid_from_top(top, n_lambda, min_ratio)


def _grid_from_top(top, n_lambda, min_ratio):
    if top <= 0:
        return np.zeros(1)
    return np.geomspace(top, top * min_ratio, n_lambda)


def fit_path(X, y, spec: PenaltySpec, lambdas, *, tol: float = TOL,
             max_sweeps: int = MAX_SWEEPS) -> list[LinearFit]:
    """Warm-started fits along ``lambdas`` in the order given."""
    pr = _problem(X, y, spec)
    return _path_fits(pr, np.asarray(lambdas, dtype=np.float64), spec, tol, max_sweeps)


def _path_fits(pr: _Problem, lams, spec, tol, max_sweeps):
    betas, failed = _cd.path(pr.G, pr.c, pr.yy, pr.n, lams, pr.weights, pr.fam, pr.param, tol,
                             max_sweeps)
    if failed >= 0:
        raise ConvergenceError(f"{spec.family.value} did not converge at lambda="
                               f"{lams[failed]:.4g} in {max_sweeps} sweeps")
    return [pr.finish(betas[i], lams[i]) for i in range(lams.shape[0])]


@dataclass(frozen=True)
class LambdaSelection:
    lambda_star: float
    grid: np.ndarray
    cv_mse: np.ndarray
    fit: LinearFit | None = None


def cv_select_lambda(X, y, spec: PenaltySpec | Family | str = Family.LASSO, lambda_grid_=None,
                     folds: int = 5, rng=None, *, refit: bool = True) -> LambdaSelection:
    """K-fold CV over a lambda grid (largest first); ties go to the larger lambda.

    With ``refit`` the returned selection also carries the full-data fit at
    ``lambda_star``, computed along the same warm-started path as the folds.
    """
    from .dataio import kfold_indices

    if isinstance(spec, (str, Family)):
        spec = PenaltySpec(Family.parse(spec) if isinstance(spec, str) else spec)
    if folds < 2:
        raise ArgumentError("folds must be >= 2")
    if rng is None:
        raise ArgumentError("cv_select_lambda needs an rng")
    X = as_matrix(X)
    y = as_vector(y)
    full = _problem(X, y, spec)
    if lambda_grid_ is None:
        grid = _grid_from_top(full.lambda_max(), N_LAMBDA, LAMBDA_MIN_RATIO)
    else:
        grid = np.sort(np.asarray(lambda_grid_, dtype=np.float64))[::-1]
        if grid.size == 0 or np.any(grid < 0):
            raise ArgumentError("lambda grid must be non-empty and non-negative")
    n = X.shape[0]
    sse = np.zeros(grid.size)
    for val in kfold_indices(n, folds, rng):
        fit_rows = np.setdiff1d(np.arange(n), val)
        fits = fit_path(X[fit_rows], y[fit_rows], spec, grid)
        Xv, yv = X[val], y[val]
        for i, f in enumerate(fits):
            r = yv - predict_linear(f, Xv)
            sse[i] += r @ r
    mse = sse / n
    best = 0
    for i in range(1, grid.size):
        if mse[i] < mse[best] * (1.0 - 1e-12):
            best = i
    fit = None
    if refit:
        fit = _path_fits(full, grid[:best + 1], spec, TOL, MAX_SWEEPS)[-1]
    return LambdaSelection(float(grid[best]), grid, mse, fit)


def with_lambda(spec: PenaltySpec, lam: float) -> PenaltySpec:
    return replace(spec, lam=float(lam))
