"""Evaluation quantities: relative prediction error, selection rates, accuracy."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError


@dataclass(frozen=True)
class SelectionTruth:
    true_support: frozenset
    p: int

    def __post_init__(self):
        object.__setattr__(self, "true_support", frozenset(int(j) for j in self.true_support))
        if any(not 0 <= j < self.p for j in self.true_support):
            raise ArgumentError("true_support must be a subset of range(p)")

    @classmethod
    def from_beta(cls, beta) -> "SelectionTruth":
        beta = np.asarray(beta)
        return cls(frozenset(np.flatnonzero(beta != 0).tolist()), beta.shape[0])


@dataclass(frozen=True)
class MetricCell:
    mean: float
    sd: float
    n_reps: int


def rpe(y_test, y_hat, noise_sd: float) -> float:
    """Mean squared prediction error divided by the noise variance."""
    y_test = np.asarray(y_test, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y_test.shape != y_hat.shape:
        raise ArgumentError(f"length mismatch: {y_test.shape} vs {y_hat.shape}")
    if not noise_sd > 0:
        raise ArgumentError("noise_sd must be positive")
    return float(np.mean((y_test - y_hat) ** 2) / noise_sd**2)


@dataclass(frozen=True)
class SelectionRates:
    fake_ratio: float
    lost_ratio: float


def per_rep_rates(selected: Iterable[int], truth: SelectionTruth) -> tuple[float, float]:
    sel = {int(j) for j in selected}
    nulls = truth.p - len(truth.true_support)
    if nulls:
        fake = len(sel - truth.true_support) / nulls
    else:
        # all variables are true: nothing can be falsely selected
        fake = 0.0
    lost = (len(truth.true_support - sel) / len(truth.true_support)) if truth.true_support else 0.0
    return fake, lost


def selection_rates(selected_sets: Sequence[Iterable[int]],
                    truth: SelectionTruth) -> SelectionRates:
    """Per-variable fake/lost rates pooled over replications.

    ``fake = #(null variables selected) / (#nulls * reps)`` and
    ``lost = #(true variables missed) / (#true * reps)``.
    """
    if len(selected_sets) == 0:
        raise ArgumentError("need at least one replication")
    rates = np.array([per_rep_rates(s, truth) for s in selected_sets])
    # equal per-rep denominators, so the pooled ratio is the mean of per-rep ratios
    return SelectionRates(float(rates[:, 0].mean()), float(rates[:, 1].mean()))


def summarize(values: Sequence[float]) -> MetricCell:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ArgumentError("no values to summarise")
    sd = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return MetricCell(float(v.mean()), sd, int(v.size))


def accuracy_stats(per_rep_accuracies: Sequence[float]) -> MetricCell:
    v = np.asarray(per_rep_accuracies, dtype=np.float64)
    if v.size == 0:
        raise ArgumentError("no accuracies given")
    if np.any((v < 0) | (v > 1)):
        raise ArgumentError("accuracies must lie in [0, 1]")
    return summarize(v)


def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ArgumentError("label vectors differ in length")
    return float(np.mean(y_true == y_pred))
