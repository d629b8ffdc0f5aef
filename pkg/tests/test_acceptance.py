"""Acceptance criteria, one test and one printed PASS/FAIL line each.

Criterion 4 reads the credit-default CSV from $ADASCALE_CREDIT_CSV.
"""
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from adascale import harness
from adascale.classifiers import gaussian_nb_fit, logistic_loss_grad
from adascale.cli import main
from adascale.regression import (Family, PenaltySpec, fit_ols, fit_penalized, lambda_grid,
                                 predict_linear)
from adascale.scaling import Method, ScalerSpec, fit_scaler

from helpers import write_credit_like_csv

CREDIT_ENV = "ADASCALE_CREDIT_CSV"
HERE = Path(__file__).parent


def _verdict(capsys, number, failures, detail):
    status = "PASS" if not failures else "FAIL"
    with capsys.disabled():
        print(f"\ncriterion {number}: {status} {detail}")
        for f in failures:
            print(f"    - {f}")
    assert not failures, "; ".join(failures)


def _mean(report, scaler, model, metric):
    return report.cell(scaler, model, metric).mean


def _per_rep(report, scaler, model, metric):
    d = report.per_rep[(scaler, model, metric)]
    return np.array([d[k] for k in sorted(d)])


def _constant_column(report, model, metric, tol):
    base = _per_rep(report, report.scalers[0], model, metric)
    worst = max(np.max(np.abs(_per_rep(report, s, model, metric) - base)) for s in report.scalers)
    return worst <= tol, worst


# ------------------------------------------------------------------ 1

def _invariance_checks(tmp_path):
    bad = []
    g = np.random.default_rng(2024)
    X = g.standard_normal((60, 4)) * [1, 10, 0.1, 3] + [5, -3, 2, 8]
    y = X @ [1.0, 0.2, 5.0, -1.0] + g.standard_normal(60)
    Xt = g.standard_normal((25, 4)) * [1, 10, 0.1, 3] + [5, -3, 2, 8]
    raw = predict_linear(fit_ols(X, y), Xt)
    for m in Method:
        s = fit_scaler(ScalerSpec(m, 0.5), X, y)
        got = predict_linear(fit_ols(s.transform(X), y), s.transform(Xt))
        if not np.max(np.abs(got - raw)) <= 1e-8:
            bad.append(f"OLS predictions change under {m.value}")

    labels = (X[:, 0] + g.standard_normal(60) > 5).astype(int)
    base = gaussian_nb_fit(X, labels).predict(Xt)
    for _ in range(20):
        a = g.uniform(0.01, 100, 4) * g.choice([-1, 1], 4)
        c = g.standard_normal(4) * 10
        if not np.array_equal(gaussian_nb_fit(a * (X - c), labels).predict(a * (Xt - c)), base):
            bad.append("GaussianNB labels change under an affine map")
            break

    sim = harness.run_experiment(harness.ExperimentConfig("sim1", models=("AdaptiveLasso",),
                                                          reps=5))
    ok, worst = _constant_column(sim, "AdaptiveLasso", "rpe", 1e-6)
    if not ok:
        bad.append(f"AdaptiveLasso RPE varies across scalers by {worst:.3g}")
    csv = write_credit_like_csv(tmp_path / "credit.csv", 400, 1)
    emp = harness.run_experiment(harness.ExperimentConfig("empirical", data_path=str(csv),
                                                          models=("LDA",), reps=5))
    ok, worst = _constant_column(emp, "LDA", "accuracy", 1e-6)
    if not ok:
        bad.append(f"LDA accuracy varies across scalers by {worst:.3g}")

    for seed in range(10):
        h = np.random.default_rng(seed)
        A = h.standard_normal((40, 5))
        Q, _ = np.linalg.qr(A - A.mean(axis=0))
        yy = h.standard_normal(40) * 2
        b = Q.T @ (yy - yy.mean())
        lam = float(h.uniform(0, 2))
        want = np.sign(b) * np.maximum(np.abs(b) - lam, 0)
        got = fit_penalized(Q, yy, PenaltySpec(Family.LASSO, lam)).coefficients
        if not np.max(np.abs(got - want)) <= 1e-6:
            bad.append(f"soft-threshold oracle off (seed {seed})")

    Xr = g.standard_normal((80, 6))
    yr = Xr @ g.standard_normal(6) + g.standard_normal(80)
    diff = fit_penalized(Xr, yr, PenaltySpec(Family.LASSO, 0.0)).coefficients \
        - fit_ols(Xr, yr).coefficients
    if not np.max(np.abs(diff)) <= 1e-6:
        bad.append("Lasso at lambda 0 differs from OLS")

    h = 1e-5
    for _ in range(10):
        Xl = g.standard_normal((30, 4)) * g.uniform(0.5, 3, 4)
        yl = (g.random(30) < 0.5).astype(float)
        w, b0 = g.standard_normal(4), float(g.standard_normal())
        _, gw, gb = logistic_loss_grad(w, b0, Xl, yl)
        num = np.empty(5)
        for j in range(5):
            e = np.zeros(5)
            e[j] = h
            up = logistic_loss_grad(w + e[:4], b0 + e[4], Xl, yl)[0]
            dn = logistic_loss_grad(w - e[:4], b0 - e[4], Xl, yl)[0]
            num[j] = (up - dn) / (2 * h)
        if not np.max(np.abs(np.append(gw, gb) - num)) / np.max(np.abs(num)) < 1e-4:
            bad.append("logistic gradient disagrees with finite differences")
            break

    Xc = g.standard_normal((40, 6)) * [1, 5, 0.2, 2, 1, 10]
    Xc[:, 1] += 4 * Xc[:, 0]
    yc = Xc @ g.standard_normal(6) + g.standard_normal(40)
    for fam in (Family.LASSO, Family.SCAD, Family.MCP, Family.ADAPTIVE_LASSO, Family.GARROTE):
        lam = 0.2 * lambda_grid(Xc, yc, PenaltySpec(fam))[0]
        tr = np.array(fit_penalized(Xc, yc, PenaltySpec(fam, lam)).objective_trace)
        if np.any(np.diff(tr) > 1e-12 * np.abs(tr[:-1])):
            bad.append(f"{fam.value} objective increased during coordinate descent")
    return bad


def test_criterion_1_invariance_suite(capsys, tmp_path):
    t = time.perf_counter()
    bad = _invariance_checks(tmp_path)
    dt = time.perf_counter() - t
    if dt >= 60:
        bad.append(f"took {dt:.1f}s, limit 60s")
    _verdict(capsys, 1, bad, f"({dt:.1f}s)")


# ------------------------------------------------------------------ 2

def test_criterion_2_sim1(capsys):
    t = time.perf_counter()
    reports = [harness.run_experiment(harness.ExperimentConfig(
        "sim1", reps=100, base_seed=seed, jobs=os.cpu_count() or 1)) for seed in range(5)]
    dt = time.perf_counter() - t
    rep0 = reports[0]

    def avg(s, m):
        return float(np.mean([_mean(r, s, m, "rpe") for r in reports]))

    bad = []
    for s in ("No", "AS", "GAS", "ASHD", "Stand", "RS", "PS", "LS"):
        for m in harness.REGRESSION_MODELS:
            v = avg(s, m)
            if not 1.0 <= v <= 1.45:
                bad.append(f"{s} x {m} RPE {v:.4f} outside [1.0, 1.45]")
    stand = avg("Stand", "Lasso")
    for s in ("VS", "LS"):
        if not avg(s, "Lasso") > stand:
            bad.append(f"{s} x Lasso {avg(s, 'Lasso'):.4f} does not exceed Stand {stand:.4f}")
    ada = [avg(s, "AdaptiveLasso") for s in rep0.scalers]
    if max(ada) - min(ada) > 1e-6:
        bad.append(f"AdaptiveLasso column not constant: {min(ada):.6f}..{max(ada):.6f}")
    if not abs(ada[0] - 1.119) <= 0.15:
        bad.append(f"AdaptiveLasso RPE {ada[0]:.4f} not within 0.15 of 1.119")
    if dt >= 600:
        bad.append(f"took {dt:.0f}s, limit 600s")
    _verdict(capsys, 2, bad, f"(Lasso: Stand {stand:.4f}, VS {avg('VS', 'Lasso'):.4f}, "
                             f"LS {avg('LS', 'Lasso'):.4f}; AdaptiveLasso {ada[0]:.4f}; {dt:.0f}s)")


# ------------------------------------------------------------------ 3

def test_criterion_3_sim2(capsys):
    t = time.perf_counter()
    c1 = harness.run_experiment(harness.ExperimentConfig("sim2", sim2_case=1, reps=100))
    c4 = harness.run_experiment(harness.ExperimentConfig("sim2", sim2_case=4, reps=100))
    dt = time.perf_counter() - t
    bad = []
    fake = {s: _mean(c1, s, "Lasso", "fake_ratio") for s in c1.scalers}
    if not fake["AS"] <= 0.02:
        bad.append(f"case 1 AS fake_ratio {fake['AS']:.4f} > 0.02")
    for s in ("VS", "LS"):
        if not fake[s] >= 0.5:
            bad.append(f"case 1 {s} fake_ratio {fake[s]:.4f} < 0.50")
    as_rpe = _mean(c1, "AS", "Lasso", "rpe")
    if not abs(as_rpe - 4.949) <= 0.3:
        bad.append(f"case 1 AS RPE {as_rpe:.4f} not within 0.3 of 4.949")
    lost_no = _mean(c4, "No", "Lasso", "lost_ratio")
    lost_std = _mean(c4, "Stand", "Lasso", "lost_ratio")
    if not lost_no >= 0.35:
        bad.append(f"case 4 No lost_ratio {lost_no:.4f} < 0.35")
    if not lost_std <= 0.20:
        bad.append(f"case 4 Stand lost_ratio {lost_std:.4f} > 0.20")
    if dt >= 300:
        bad.append(f"took {dt:.0f}s, limit 300s")
    _verdict(capsys, 3, bad, f"({dt:.0f}s)")


# ------------------------------------------------------------------ 4

def test_criterion_4_empirical(capsys):
    path = os.environ.get(CREDIT_ENV)
    if not path or not Path(path).is_file():
        _verdict(capsys, 4, [f"credit-default CSV not available (set ${CREDIT_ENV})"], "")
    t = time.perf_counter()
    rep = harness.run_experiment(harness.ExperimentConfig(
        "empirical", data_path=path, models=("KNN", "GaussianNB", "LogisticGD", "LDA"), reps=10,
        jobs=os.cpu_count() or 1))
    dt = time.perf_counter() - t
    bad = []
    knn_std = _mean(rep, "Stand", "KNN", "accuracy")
    knn_no = _mean(rep, "No", "KNN", "accuracy")
    for name, v, want, tol in (("KNN Stand", knn_std, 0.8030, 0.015),
                               ("KNN No", knn_no, 0.7641, 0.015),
                               ("LDA No", _mean(rep, "No", "LDA", "accuracy"), 0.8111, 0.01),
                               ("GaussianNB No", _mean(rep, "No", "GaussianNB", "accuracy"),
                                0.7936, 0.015)):
        if not abs(v - want) <= tol:
            bad.append(f"{name} accuracy {v:.4f} not within {tol} of {want}")
    if not knn_std - knn_no >= 0.02:
        bad.append(f"KNN Stand-No gap {knn_std - knn_no:.4f} < 0.02")
    for model in ("LDA", "GaussianNB"):
        ok, worst = _constant_column(rep, model, "accuracy", 0.0)
        if not ok:
            bad.append(f"{model} accuracy varies across scalers by {worst:.3g}")
    if dt >= 1200:
        bad.append(f"took {dt:.0f}s, limit 1200s")
    _verdict(capsys, 4, bad, f"(KNN Stand {knn_std:.4f}, No {knn_no:.4f}; {dt:.0f}s)")


# ------------------------------------------------------------------ 5

def test_criterion_5_determinism(capsys, tmp_path):
    csv = write_credit_like_csv(tmp_path / "credit.csv", 300, 2)
    runs = {
        "sim1": ["sim1", "--reps", "4", "--seed", "7"],
        "sim2": ["sim2", "--reps", "6", "--case", "4", "--correlated"],
        "empirical": ["empirical", "--data", str(csv), "--reps", "3",
                      "--models", "KNN,KMeansNC,GaussianNB,LDA"],
    }
    bad = []
    for name, argv in runs.items():
        outs = []
        for i, jobs in enumerate(("1", "1", "3")):
            out = tmp_path / f"{name}-{i}.md"
            if main([*argv, "--jobs", jobs, "--out", str(out)]) != 0:
                bad.append(f"{name} run {i} failed")
            outs.append(out.read_bytes() if out.exists() else b"")
        if not outs[0] or outs[0] != outs[1]:
            bad.append(f"{name}: repeated serial runs differ")
        if outs[0] != outs[2]:
            bad.append(f"{name}: --jobs 3 differs from --jobs 1")
    _verdict(capsys, 5, bad, "(sim1, sim2, empirical; serial twice and --jobs 3)")


# ------------------------------------------------------------------ 6

def test_criterion_6_property_suite(capsys):
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           str(HERE / "test_properties.py")], capture_output=True, text=True)
    last = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    bad = [] if proc.returncode == 0 else [last]
    _verdict(capsys, 6, bad, f"({last})")
