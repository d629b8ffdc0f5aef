"""Shared fixtures-by-function for tests that need a credit-shaped CSV."""
import numpy as np

from adascale.dataio import CREDIT_COLUMNS


def write_credit_like_csv(path, n=400, seed=0):
    """Synthetic file with the credit header; the target depends on a few columns."""
    g = np.random.default_rng(seed)
    cols = {}
    cols["ID"] = np.arange(1, n + 1)
    cols["LIMIT_BAL"] = g.integers(1, 50, n) * 10_000
    cols["SEX"] = g.integers(1, 3, n)
    cols["EDUCATION"] = g.integers(1, 5, n)
    cols["MARRIAGE"] = g.integers(1, 4, n)
    cols["AGE"] = g.integers(21, 70, n)
    pay = g.integers(-2, 5, (n, 6))
    for j, name in enumerate(["PAY_0", "PAY_2", "PAY_3", "PAY_4", "PAY_5", "PAY_6"]):
        cols[name] = pay[:, j]
    for j in range(1, 7):
        cols[f"BILL_AMT{j}"] = g.integers(0, 200_000, n)
        cols[f"PAY_AMT{j}"] = g.integers(0, 20_000, n)
    score = 0.8 * pay[:, 0] - cols["LIMIT_BAL"] / 2e5 + g.standard_normal(n)
    cols["default payment next month"] = (score > 0.5).astype(int)
    with open(path, "w") as fh:
        fh.write(",".join(CREDIT_COLUMNS) + "\n")
        for i in range(n):
            fh.write(",".join(str(int(cols[c][i])) for c in CREDIT_COLUMNS) + "\n")
    return path
