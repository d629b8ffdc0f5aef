"""Lightweight classifiers used to probe scaling sensitivity.

K-NN and k-means depend on Euclidean geometry and therefore on feature
scales; Gaussian naive Bayes and LDA are invariant to per-feature affine
rescaling; gradient-descent logistic regression reaches the same optimum but
at a speed governed by feature conditioning.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NumericalError, TrainingError
from .numerics import _generator, as_matrix

NB_VAR_FLOOR = 1e-9
LDA_JITTER = 1e-8


class Kind(str, enum.Enum):
    KNN = "KNN"
    KMEANS = "KMeansNC"
    GAUSSIAN_NB = "GaussianNB"
    LOGISTIC = "LogisticGD"
    LDA = "LDA"


def _labels(y, n):
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != n:
        raise ArgumentError(f"expected {n} labels, got shape {y.shape}")
    return np.unique(y, return_inverse=True)


def _check_query(X, p):
    X = as_matrix(X, "X")
    if X.shape[1] != p:
        raise ArgumentError(f"model expects {p} features, got {X.shape[1]}")
    return X


def _vote(label_idx: np.ndarray, n_classes: int) -> np.ndarray:
    """Row-wise majority over class indices; ties go to the smaller index."""
    counts = np.zeros((label_idx.shape[0], n_classes), dtype=np.int64)
    np.add.at(counts, (np.arange(label_idx.shape[0])[:, None], label_idx), 1)
    return np.argmax(counts, axis=1)


# --------------------------------------------------------------------- K-NN

def _nearest(A: np.ndarray, a2: np.ndarray, B: np.ndarray, k: int, X: np.ndarray,
             Q: np.ndarray) -> np.ndarray:
    """Indices of the k nearest rows of X for every row of Q, ordered by
    (distance, row index).

    ``A``/``B`` are the centred copies used for the fast expanded distance.
    Candidates within rounding of the k-th distance are re-ranked with exact
    differences on the raw rows, so genuine ties resolve by index.
    """
    # |b|^2 is constant per query row, so it is left out of the ordering key
    D = a2[None, :] - 2.0 * (B @ A.T)
    b2 = np.einsum("ij,ij->i", B, B)
    out = np.empty((B.shape[0], k), dtype=np.int64)
    part = np.argpartition(D, k - 1, axis=1)[:, :k] if k < A.shape[0] else None
    amax = a2.max()
    for r in range(B.shape[0]):
        kth = D[r].max() if part is None else D[r, part[r]].max()
        slack = 1e-9 * (abs(kth) + b2[r] + amax) + 1e-300
        cand = np.flatnonzero(D[r] <= kth + slack)
        diff = X[cand] - Q[r]
        exact = np.einsum("ij,ij->i", diff, diff)
        out[r] = cand[np.lexsort((cand, exact))[:k]]
    return out


@dataclass(frozen=True)
class KNNModel:
    X_train: np.ndarray
    y_train: np.ndarray
    k: int = 5
    kind: Kind = Kind.KNN

    def predict(self, X, block: int = 512) -> np.ndarray:
        X = _check_query(X, self.X_train.shape[1])
        classes, yi = np.unique(self.y_train, return_inverse=True)
        center = self.X_train.mean(axis=0)
        A = self.X_train - center
        a2 = np.einsum("ij,ij->i", A, A)
        out = np.empty(X.shape[0], dtype=np.int64)
        for s in range(0, X.shape[0], block):
            nb = _nearest(A, a2, X[s:s + block] - center, self.k, self.X_train, X[s:s + block])
            out[s:s + block] = _vote(yi[nb], classes.size)
        return classes[out]


def knn_fit(X_train, y_train, k: int = 5) -> KNNModel:
    X = as_matrix(X_train, "X_train")
    if X.shape[0] == 0:
        raise ArgumentError("empty training set")
    _labels(y_train, X.shape[0])
    if not 1 <= k <= X.shape[0]:
        raise ArgumentError(f"k must be in [1, {X.shape[0]}], got {k}")
    return KNNModel(X, np.asarray(y_train), int(k))


def knn_classify(X_train, y_train, X_query, k: int = 5) -> np.ndarray:
    return knn_fit(X_train, y_train, k).predict(X_query)


# ------------------------------------------------------------------ k-means

@dataclass(frozen=True)
class KMeansModel:
    centroids: np.ndarray
    centroid_labels: np.ndarray
    n_iter: int
    kind: Kind = Kind.KMEANS

    def predict(self, X) -> np.ndarray:
        X = _check_query(X, self.centroids.shape[1])
        return self.centroid_labels[_assign(X, self.centroids)]


def _sqdist(X, C):
    d = (X * X).sum(axis=1)[:, None] - 2.0 * X @ C.T + (C * C).sum(axis=1)[None, :]
    return np.maximum(d, 0.0)


def _assign(X, C):
    return np.argmin(_sqdist(X, C), axis=1)


def _kmeanspp(X, k, gen):
    n = X.shape[0]
    chosen = [int(gen.integers(n))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(gen.choice(n, p=d2 / total))
        else:
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(gen.choice(rest))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[chosen].copy()


def kmeans_nearest_centroid(X_train, y_train, k: int, rng, max_iter: int = 300) -> KMeansModel:
    """Lloyd's algorithm from k-means++ seeds, then label each cluster by majority."""
    X = as_matrix(X_train, "X_train")
    classes, yi = _labels(y_train, X.shape[0])
    if not 1 <= k <= X.shape[0]:
        raise ArgumentError(f"k must be in [1, {X.shape[0]}], got {k}")
    gen = _generator(rng)
    C = _kmeanspp(X, k, gen)
    assign = None
    it = 0
    for it in range(1, max_iter + 1):
        d = _sqdist(X, C)
        new = np.argmin(d, axis=1)
        counts = np.bincount(new, minlength=k)
        for e in np.flatnonzero(counts == 0):
            far = int(np.argmax(d[np.arange(X.shape[0]), new]))
            new[far] = e
            d[far] = 0.0
            counts = np.bincount(new, minlength=k)
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        for c in range(k):
            C[c] = X[assign == c].mean(axis=0)
    labels = np.empty(k, dtype=classes.dtype)
    for c in range(k):
        members = yi[assign == c]
        labels[c] = classes[np.argmax(np.bincount(members, minlength=classes.size))]
    return KMeansModel(C, labels, it)


# ------------------------------------------------------------- naive Bayes

@dataclass(frozen=True)
class GaussianNBModel:
    classes: np.ndarray
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    kind: Kind = Kind.GAUSSIAN_NB

    def log_posterior(self, X) -> np.ndarray:
        """Unnormalised log p(C_k) + sum_i log p(x_i | C_k)."""
        X = _check_query(X, self.means.shape[1])
        out = np.empty((X.shape[0], self.classes.size))
        for c in range(self.classes.size):
            v = self.variances[c]
            out[:, c] = (np.log(self.priors[c]) - 0.5 * np.sum(np.log(2 * np.pi * v))
                         - 0.5 * (((X - self.means[c]) ** 2) / v).sum(axis=1))
        return out

    def predict(self, X) -> np.ndarray:
        lp = self.log_posterior(X)
        top = lp.max(axis=1, keepdims=True)
        # first class within rounding of the maximum (ties -> smaller label)
        tied = lp >= top - 1e-12 * (1.0 + np.abs(top))
        return self.classes[np.argmax(tied, axis=1)]


def gaussian_nb_fit(X_train, y_train) -> GaussianNBModel:
    X = as_matrix(X_train, "X_train")
    classes, yi = _labels(y_train, X.shape[0])
    counts = np.bincount(yi, minlength=classes.size)
    if np.any(counts < 2):
        bad = classes[np.argmin(counts)]
        raise ArgumentError(f"class {bad!r} has fewer than 2 training rows")
    floor = NB_VAR_FLOOR * (X.var(axis=0, ddof=1) + 1e-12)
    means = np.array([X[yi == c].mean(axis=0) for c in range(classes.size)])
    var = np.array([X[yi == c].var(axis=0, ddof=1) for c in range(classes.size)])
    return GaussianNBModel(classes, counts / counts.sum(), means, np.maximum(var, floor))


# ------------------------------------------------------ logistic regression

def logistic_loss_grad(w: np.ndarray, b: float, X: np.ndarray, y01: np.ndarray):
    """Mean log-loss and its gradient with respect to (w, b)."""
    z = X @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y01 * z))
    resid = 0.5 * (1.0 + np.tanh(0.5 * z)) - y01  # sigmoid(z) - y, overflow-free
    return loss, X.T @ resid / X.shape[0], float(resid.mean())


@dataclass(frozen=True)
class LogisticModel:
    classes: np.ndarray
    weights: np.ndarray
    intercept: float
    epochs_used: int
    converged: bool
    kind: Kind = Kind.LOGISTIC

    def decision(self, X) -> np.ndarray:
        X = _check_query(X, self.weights.shape[0])
        return X @ self.weights + self.intercept

    def predict(self, X) -> np.ndarray:
        return self.classes[(self.decision(X) > 0).astype(np.int64)]


def logistic_fit_gd(X_train, y_train, learning_rate: float = 0.1, max_epochs: int = 5000,
                    tol: float = 1e-6, patience: int = 10) -> LogisticModel:
    """Full-batch gradient descent on the mean log-loss.

    Stops when the largest gradient component falls below ``tol``. Raises
    :class:`TrainingError` if the loss rises ``patience`` epochs in a row.
    """
    X = as_matrix(X_train, "X_train")
    classes, yi = _labels(y_train, X.shape[0])
    if classes.size != 2:
        raise ArgumentError(f"logistic regression needs exactly 2 classes, got {classes.size}")
    if not learning_rate > 0:
        raise ArgumentError("learning_rate must be positive")
    y01 = yi.astype(np.float64)
    w = np.zeros(X.shape[1])
    b = 0.0
    prev = np.inf
    rising = 0
    for epoch in range(1, max_epochs + 1):
        loss, gw, gb = logistic_loss_grad(w, b, X, y01)
        if max(np.max(np.abs(gw), initial=0.0), abs(gb)) < tol:
            return LogisticModel(classes, w, b, epoch - 1, True)
        rising = rising + 1 if loss > prev else 0
        if rising >= patience or not np.isfinite(loss):
            raise TrainingError(f"gradient descent diverged at epoch {epoch} "
                                f"(loss {loss:.4g}); try a smaller learning rate")
        prev = loss
        w = w - learning_rate * gw
        b = b - learning_rate * gb
    return LogisticModel(classes, w, b, max_epochs, False)


# ---------------------------------------------------------------------- LDA

@dataclass(frozen=True)
class LDAModel:
    classes: np.ndarray
    center: np.ndarray
    scale: np.ndarray
    coef: np.ndarray         # p x K, acts on standardised centred x
    offsets: np.ndarray      # K
    kind: Kind = Kind.LDA

    def discriminants(self, X) -> np.ndarray:
        X = _check_query(X, self.center.shape[0])
        return ((X - self.center) / self.scale) @ self.coef + self.offsets

    def predict(self, X) -> np.ndarray:
        return self.classes[np.argmax(self.discriminants(X), axis=1)]


def lda_fit(X_train, y_train) -> LDAModel:
    """Shared-covariance Gaussian discriminants.

    The pooled covariance is formed on internally standardised features and
    ridge-jittered by ``1e-8 * trace / p`` before factorisation, which keeps
    the rule exactly equivariant under per-feature rescaling.
    """
    X = as_matrix(X_train, "X_train")
    classes, yi = _labels(y_train, X.shape[0])
    n, p = X.shape
    K = classes.size
    if n <= K:
        raise ArgumentError("LDA needs more rows than classes")
    center = X.mean(axis=0)
    scale = X.std(axis=0, ddof=1)
    scale[~(scale > 0)] = 1.0
    Z = (X - center) / scale
    means = np.array([Z[yi == c].mean(axis=0) for c in range(K)])
    R = Z - means[yi]
    S = R.T @ R / (n - K)
    S[np.diag_indices(p)] += LDA_JITTER * np.trace(S) / p
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise NumericalError("pooled covariance is not positive definite after jitter") from None
    coef = np.linalg.solve(L.T, np.linalg.solve(L, means.T))
    priors = np.bincount(yi, minlength=K) / n
    offsets = -0.5 * np.einsum("kp,pk->k", means, coef) + np.log(priors)
    return LDAModel(classes, center, scale, coef, offsets)


def classify(model, X) -> np.ndarray:
    return model.predict(X)
