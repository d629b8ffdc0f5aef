"""Experiment orchestration over the scaler x model grid.

Replication ``r`` draws all of its randomness from ``RngStream(base_seed, r)``
and its children, so per-rep results do not depend on how many reps run, in
which order, or in how many processes. Aggregation walks reps in index order.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import classifiers as clf
from .datagen import realize, sim1_scenario, sim2_scenario
from . import dataio
from .dataio import CREDIT_KINDS, CREDIT_TARGET, Dataset, load_csv
from .errors import AdascaleError, ArgumentError
from .metrics import SelectionTruth, per_rep_rates, accuracy, rpe, summarize
from .numerics import RngStream
from .regression import Family, PenaltySpec, cv_select_lambda, predict_linear
from .report import ExperimentReport
from .scaling import (DEFAULT_GAMMA_GRID, TABLE_ORDER, Method, ScalerSpec, ZeroedFeatureWarning,
                      fit_scaler, select_gamma_cv)

REGRESSION_MODELS = ("Lasso", "AdaptiveLasso", "Garrote", "SCAD", "MCP")
CLASSIFIER_MODELS = ("KNN", "KMeansNC", "GaussianNB", "LogisticGD", "LDA")
SIM1_SCALERS = ("No", "AS", "GAS", "ASHD", "Stand", "RS", "PS", "VS", "LS")
SIM2_SCALERS = ("No", "AS", "ASHD", "Stand", "PS", "RS", "VS", "LS")
EMPIRICAL_SCALERS = SIM1_SCALERS
EMPIRICAL_REPS = {"KNN": 100, "KMeansNC": 100}
EMPIRICAL_DEFAULT_REPS = 10


@dataclass(frozen=True)
class ScalerChoice:
    """A scaler in an experiment; ``tune_gamma`` picks gamma by CV per cell."""

    spec: ScalerSpec
    tune_gamma: bool = False

    @classmethod
    def parse(cls, text: str) -> "ScalerChoice":
        name, _, g = text.strip().partition(":")
        m = Method.parse(name)
        if m is Method.GENERALIZED_ADAPTIVE and g in ("", "cv"):
            return cls(ScalerSpec(m, 1.0), True)
        if m is Method.ADAPTIVE_HIGH_DIM and g == "cv":
            return cls(ScalerSpec(m, 1.0), True)
        return cls(ScalerSpec(m, float(g) if g else 1.0))

    @property
    def label(self) -> str:
        base = self.spec.label
        if self.tune_gamma:
            return base if self.spec.method is Method.GENERALIZED_ADAPTIVE else base + "(cv)"
        if self.spec.method in (Method.GENERALIZED_ADAPTIVE, Method.ADAPTIVE_HIGH_DIM) \
                and self.spec.gamma != 1.0:
            return f"{base}({self.spec.gamma:g})"
        return base


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    scalers: tuple = ()
    models: tuple = ()
    reps: int | None = None
    base_seed: int = 0
    sim2_case: int = 1
    correlated: bool = False
    covariance_mode: str = "correlation"
    data_path: str | None = None
    target: str = CREDIT_TARGET
    one_hot: bool = False
    gamma_grid: tuple = DEFAULT_GAMMA_GRID
    folds: int = 5
    train_ratio: float = 0.5
    knn_k: int = 5
    kmeans_k: int | None = None
    learning_rate: float = 0.1
    max_epochs: int = 5000
    jobs: int = 1
    model_reps: tuple = ()  # (model, reps) pairs overriding the defaults

    def __post_init__(self):
        if self.experiment not in ("sim1", "sim2", "empirical"):
            raise ArgumentError(f"unknown experiment {self.experiment!r}")
        defaults = {"sim1": (SIM1_SCALERS, REGRESSION_MODELS),
                    "sim2": (SIM2_SCALERS, ("Lasso",)),
                    "empirical": (EMPIRICAL_SCALERS, CLASSIFIER_MODELS)}[self.experiment]
        scalers = self.scalers or defaults[0]
        scalers = tuple(s if isinstance(s, ScalerChoice) else ScalerChoice.parse(s)
                        for s in scalers)
        object.__setattr__(self, "scalers", scalers)
        object.__setattr__(self, "models", tuple(self.models or defaults[1]))
        allowed = REGRESSION_MODELS + ("OLS",) if self.experiment != "empirical" \
            else CLASSIFIER_MODELS
        for m in self.models:
            if m not in allowed:
                raise ArgumentError(f"model {m!r} is not available for {self.experiment}")
        if self.experiment == "sim2" and self.models != ("Lasso",):
            raise ArgumentError("sim2 uses the Lasso only")
        if self.reps is not None and self.reps < 1:
            raise ArgumentError("reps must be >= 1")
        if not self.scalers or not self.models:
            raise ArgumentError("scaler and model lists must be non-empty")
        if self.sim2_case not in (1, 2, 3, 4):
            raise ArgumentError(f"sim2 case must be 1..4, got {self.sim2_case}")
        if self.folds < 2:
            raise ArgumentError("folds must be >= 2")
        if self.jobs < 1:
            raise ArgumentError("jobs must be >= 1")
        if self.experiment == "empirical" and not self.data_path:
            raise ArgumentError("the empirical experiment needs a data path")
        labels = [s.label for s in self.scalers]
        if len(set(labels)) != len(labels):
            raise ArgumentError(f"duplicate scalers in {labels}")

    def reps_for(self, model: str) -> int:
        over = dict(self.model_reps)
        if model in over:
            return int(over[model])
        if self.reps is not None:
            return self.reps
        if self.experiment == "empirical":
            return EMPIRICAL_REPS.get(model, EMPIRICAL_DEFAULT_REPS)
        return 100

    @property
    def total_reps(self) -> int:
        return max(self.reps_for(m) for m in self.models)

    def ordered_scalers(self) -> tuple:
        rank = {m: i for i, m in enumerate(TABLE_ORDER)}
        return tuple(sorted(self.scalers, key=lambda s: rank[s.spec.method]))


# --------------------------------------------------------------- config file

_BOOL = {"1": True, "true": True, "yes": True, "0": False, "false": False, "no": False}
_KEYS = {
    "experiment": str, "reps": int, "base_seed": int, "case": int, "sim2_case": int,
    "correlated": lambda v: _BOOL[v.lower()], "covariance_mode": str, "data_path": str,
    "target": str, "one_hot": lambda v: _BOOL[v.lower()], "folds": int, "train_ratio": float,
    "knn_k": int, "kmeans_k": int, "learning_rate": float, "max_epochs": int, "jobs": int,
    "scalers": lambda v: tuple(x.strip() for x in v.split(",") if x.strip()),
    "models": lambda v: tuple(x.strip() for x in v.split(",") if x.strip()),
    "gamma_grid": lambda v: tuple(float(x) for x in v.split(",") if x.strip()),
}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines (``#`` starts a comment) into config kwargs."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in _KEYS:
            raise ArgumentError(f"config line {lineno}: unknown or malformed entry {raw.strip()!r}")
        try:
            out["sim2_case" if key == "case" else key] = _KEYS[key](value)
        except (ValueError, KeyError):
            raise ArgumentError(f"config line {lineno}: bad value for {key!r}: {value!r}") from None
    return out


def load_config(path, **overrides) -> ExperimentConfig:
    kwargs = parse_config_text(Path(path).read_text(encoding="utf-8"))
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**kwargs)


# ------------------------------------------------------------------- models

def _regression_predict(model: str, Xtr, ytr, Xte, rng, folds):
    """Fit ``model`` on (Xtr, ytr), lambda by CV; return (predictions, support)."""
    if model == "OLS":
        from .regression import fit_ols
        fit = fit_ols(Xtr, ytr)
    else:
        sel = cv_select_lambda(Xtr, ytr, PenaltySpec(Family.parse(model)), folds=folds, rng=rng)
        fit = sel.fit
    return predict_linear(fit, Xte), fit.selected_support


def _classifier_predict(model: str, Xtr, ytr, Xte, rng, cfg: ExperimentConfig):
    if model == "KNN":
        return clf.knn_classify(Xtr, ytr, Xte, cfg.knn_k)
    if model == "KMeansNC":
        k = cfg.kmeans_k or np.unique(ytr).size
        return clf.kmeans_nearest_centroid(Xtr, ytr, k, rng).predict(Xte)
    if model == "GaussianNB":
        return clf.gaussian_nb_fit(Xtr, ytr).predict(Xte)
    if model == "LogisticGD":
        return clf.logistic_fit_gd(Xtr, ytr, cfg.learning_rate, cfg.max_epochs).predict(Xte)
    if model == "LDA":
        return clf.lda_fit(Xtr, ytr).predict(Xte)
    raise ArgumentError(f"unknown classifier {model!r}")


def _fit_choice(choice: ScalerChoice, Xtr, ytr, kinds, downstream, loss, cfg, rng):
    spec = choice.spec
    if choice.tune_gamma:
        sel = select_gamma_cv(Xtr, ytr, cfg.gamma_grid, cfg.folds, downstream, rng,
                              method=spec.method, loss=loss, kinds=kinds)
        spec = replace(spec, gamma=sel.gamma_star)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroedFeatureWarning)
        return fit_scaler(spec, Xtr, ytr, kinds)


# --------------------------------------------------------------- replications

@dataclass
class RepResult:
    """Per-rep values keyed (scaler, model, metric); errors keyed (scaler, model)."""

    values: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    selected: dict = field(default_factory=dict)
    zeroed: dict = field(default_factory=dict)


def _regression_rep(cfg: ExperimentConfig, r: int, scenario) -> RepResult:
    rs = RngStream(cfg.base_seed, r)
    data = realize(scenario, rs.child(0))
    truth = SelectionTruth.from_beta(scenario.beta)
    out = RepResult()
    for mi, model in enumerate(cfg.models):
        if r >= cfg.reps_for(model):
            continue
        cv_rng = rs.child(1, mi)

        def downstream(Xf, yf, Xv, sub_rng, model=model):
            return _regression_predict(model, Xf, yf, Xv, sub_rng, cfg.folds)[0]

        for choice in cfg.scalers:
            key = (choice.label, model)
            try:
                sc = _fit_choice(choice, data.X_train, data.y_train, None, downstream, "mse", cfg,
                                 rs.child(2, mi))
                pred, support = _regression_predict(model, sc.transform(data.X_train),
                                                    data.y_train, sc.transform(data.X_test),
                                                    cv_rng, cfg.folds)
            except AdascaleError as exc:
                out.errors[key] = f"{type(exc).__name__}: {exc}"
                continue
            if sc.zeroed_features:
                out.zeroed[choice.label] = sc.zeroed_features
            out.values[(*key, "rpe")] = rpe(data.y_test, pred, scenario.noise_sd)
            if cfg.experiment == "sim2":
                out.selected[key] = support
                fake, lost = per_rep_rates(support, truth)
                out.values[(*key, "fake_ratio")] = fake
                out.values[(*key, "lost_ratio")] = lost
    return out


_DATA_CACHE: dict = {}


def _load_dataset(cfg: ExperimentConfig) -> Dataset:
    key = (cfg.data_path, cfg.target, cfg.one_hot)
    if key not in _DATA_CACHE:
        _DATA_CACHE[key] = load_csv(cfg.data_path, cfg.target, CREDIT_KINDS, one_hot=cfg.one_hot)
    return _DATA_CACHE[key]


def _empirical_rep(cfg: ExperimentConfig, r: int) -> RepResult:
    d = _load_dataset(cfg)
    rs = RngStream(cfg.base_seed, r)
    split = dataio.train_test_split(d, cfg.train_ratio, rs.child(0))
    Xtr, ytr = split.train.X, split.train.y
    Xte, yte = split.test.X, split.test.y
    kinds = d.feature_kinds
    out = RepResult()
    for mi, model in enumerate(cfg.models):
        if r >= cfg.reps_for(model):
            continue
        model_rng = rs.child(3, mi)

        def downstream(Xf, yf, Xv, sub_rng, model=model):
            return _classifier_predict(model, Xf, yf, Xv, sub_rng, cfg)

        for choice in cfg.scalers:
            key = (choice.label, model)
            try:
                sc = _fit_choice(choice, Xtr, ytr, kinds, downstream, "error_rate", cfg,
                                 rs.child(2, mi))
                pred = _classifier_predict(model, sc.transform(Xtr), ytr, sc.transform(Xte),
                                           model_rng, cfg)
            except AdascaleError as exc:
                out.errors[key] = f"{type(exc).__name__}: {exc}"
                continue
            if sc.zeroed_features:
                out.zeroed[choice.label] = sc.zeroed_features
            out.values[(*key, "accuracy")] = accuracy(yte, pred)
    return out


def run_rep(cfg: ExperimentConfig, r: int) -> RepResult:
    """Compute replication ``r`` in isolation (single-threaded BLAS)."""
    with threadpool_limits(limits=1):
        if cfg.experiment == "sim1":
            return _regression_rep(cfg, r, sim1_scenario())
        if cfg.experiment == "sim2":
            return _regression_rep(cfg, r, sim2_scenario(cfg.sim2_case, cfg.correlated,
                                                         cfg.covariance_mode))
        return _empirical_rep(cfg, r)


def _run_rep_star(args):
    return run_rep(*args)


def _run_all(cfg: ExperimentConfig) -> list[RepResult]:
    reps = range(cfg.total_reps)
    if cfg.jobs == 1:
        return [run_rep(cfg, r) for r in reps]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(_run_rep_star, [(cfg, r) for r in reps], chunksize=1))


def _metrics_for(cfg) -> tuple[str, ...]:
    return {"sim1": ("rpe",), "sim2": ("fake_ratio", "lost_ratio", "rpe"),
            "empirical": ("accuracy",)}[cfg.experiment]


def aggregate(cfg: ExperimentConfig, results: list[RepResult]) -> ExperimentReport:
    metrics = _metrics_for(cfg)
    scalers = cfg.ordered_scalers()
    report = ExperimentReport(cfg.experiment, tuple(s.label for s in scalers), cfg.models, metrics)
    for s in report.scalers:
        for m in report.models:
            n = cfg.reps_for(m)
            failed = [(r, res.errors[(s, m)]) for r, res in enumerate(results[:n])
                      if (s, m) in res.errors]
            if failed:
                r0, msg = failed[0]
                report.skips[(s, m)] = f"failed in {len(failed)}/{n} reps (first: rep {r0}, {msg})"
                continue
            for k in metrics:
                vals = [res.values[(s, m, k)] for res in results[:n]]
                report.per_rep[(s, m, k)] = dict(enumerate(vals))
                report.cells[(s, m, k)] = summarize(vals)
    for s in report.scalers:
        reps_zeroed = [r for r, res in enumerate(results) if s in res.zeroed]
        if reps_zeroed:
            feats = sorted({j for r in reps_zeroed for j in results[r].zeroed[s]})
            report.notes.append(f"{s} zeroed features {feats} in {len(reps_zeroed)} reps")
    return report


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.experiment == "empirical":
        _load_dataset(cfg)  # fail fast on unreadable data
    return aggregate(cfg, _run_all(cfg))


def run_sim1(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.experiment != "sim1":
        raise ArgumentError("run_sim1 needs experiment = sim1")
    return run_experiment(cfg)


def run_sim2(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.experiment != "sim2":
        raise ArgumentError("run_sim2 needs experiment = sim2")
    return run_experiment(cfg)


def run_empirical(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.experiment != "empirical":
        raise ArgumentError("run_empirical needs experiment = empirical")
    return run_experiment(cfg)
