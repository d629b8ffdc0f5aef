"""Compiled cyclic coordinate descent on the Gram form of a centred problem.

The objective, for centred ``X`` and ``y`` with ``G = X'X`` and ``c = X'y``, is

    1/2 ||y - X b||^2 + sum_j pen(|b_j|)
  = 1/2 y'y - c'b + 1/2 b'G b + sum_j pen(|b_j|)

Each coordinate step minimises the objective exactly in ``b_j``. Dividing by
the column curvature ``G_jj`` inside the univariate problem plays the role of
internal column standardisation without changing the objective.
"""
import numpy as np
from numba import njit

LASSO = 0
SCAD = 1
MCP = 2
NONNEG_LASSO = 3


@njit(cache=True)
def penalty(t, lam, fam, param):
    if fam == LASSO or fam == NONNEG_LASSO:
        return lam * t
    if fam == SCAD:
        a = param
        if t <= lam:
            return lam * t
        if t <= a * lam:
            return (2.0 * a * lam * t - t * t - lam * lam) / (2.0 * (a - 1.0))
        return 0.5 * lam * lam * (a + 1.0)
    # MCP
    g = param
    if t <= g * lam:
        return lam * t - t * t / (2.0 * g)
    return 0.5 * g * lam * lam


@njit(cache=True)
def _clip(x, lo, hi):
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


@njit(cache=True)
def univariate(u, a, lam, fam, param):
    """argmin_b 1/2 a (b - u)^2 + pen(|b|) for curvature a > 0."""
    if fam == LASSO:
        t = abs(u) - lam / a
        if t <= 0.0:
            return 0.0
        return t if u > 0 else -t
    if fam == NONNEG_LASSO:
        t = u - lam / a
        return t if t > 0.0 else 0.0

    s = 1.0 if u >= 0 else -1.0
    ua = abs(u)
    cand = np.empty(6)
    m = 0
    cand[m] = 0.0
    m += 1
    if fam == SCAD:
        A = param
        cand[m] = _clip(ua - lam / a, 0.0, lam)
        m += 1
        curv = a * (A - 1.0) - 1.0
        if curv > 0.0:
            cand[m] = _clip((a * ua * (A - 1.0) - A * lam) / curv, lam, A * lam)
            m += 1
        else:
            cand[m] = lam
            cand[m + 1] = A * lam
            m += 2
        cand[m] = max(ua, A * lam)
        m += 1
    else:
        g = param
        curv = a - 1.0 / g
        if curv > 0.0:
            cand[m] = _clip((a * ua - lam) / curv, 0.0, g * lam)
            m += 1
        else:
            cand[m] = g * lam
            m += 1
        cand[m] = max(ua, g * lam)
        m += 1

    best_t = 0.0
    best_f = 0.5 * a * ua * ua
    for i in range(1, m):
        t = cand[i]
        f = 0.5 * a * (t - ua) * (t - ua) + penalty(t, lam, fam, param)
        if f < best_f or (f == best_f and t < best_t):
            best_f = f
            best_t = t
    return s * best_t


@njit(cache=True)
def objective(G, c, yy, beta, lam, w, fam, param):
    p = beta.shape[0]
    q = 0.0
    for j in range(p):
        if beta[j] != 0.0:
            acc = 0.0
            for k in range(p):
                acc += G[j, k] * beta[k]
            q += beta[j] * (0.5 * acc - c[j])
    pen = 0.0
    for j in range(p):
        if beta[j] != 0.0:
            pen += penalty(abs(beta[j]), lam * w[j], fam, param)
    return 0.5 * yy + q + pen


@njit(cache=True)
def solve(G, c, yy, n, beta0, lam, w, fam, param, tol, max_sweeps, trace):
    """Run sweeps from ``beta0``; returns (beta, sweeps_used, converged).

    ``trace[0]`` receives the starting objective and ``trace[s]`` the value
    after sweep ``s`` (``trace`` must have ``max_sweeps + 1`` slots, or zero
    slots to skip recording).
    """
    p = beta0.shape[0]
    beta = beta0.copy()
    record = trace.shape[0] > 0
    if record:
        trace[0] = objective(G, c, yy, beta, lam, w, fam, param)
    # running gradient part: r_j = c_j - sum_k G_jk beta_k
    r = c.copy()
    for j in range(p):
        if beta[j] != 0.0:
            for k in range(p):
                r[k] -= G[k, j] * beta[j]
    for sweep in range(1, max_sweeps + 1):
        max_change = 0.0
        for j in range(p):
            a = G[j, j]
            if a <= 0.0 or not np.isfinite(w[j]):
                new = 0.0
            else:
                u = beta[j] + r[j] / a
                new = univariate(u, a, lam * w[j], fam, param)
            d = new - beta[j]
            if d != 0.0:
                for k in range(p):
                    r[k] -= G[k, j] * d
                beta[j] = new
                ch = abs(d) * np.sqrt(a / n)
                if ch > max_change:
                    max_change = ch
        if record:
            trace[sweep] = objective(G, c, yy, beta, lam, w, fam, param)
        if max_change < tol:
            return beta, sweep, True
    return beta, max_sweeps, False


@njit(cache=True)
def path(G, c, yy, n, lams, w, fam, param, tol, max_sweeps):
    """Warm-started solutions along ``lams`` (in the given order).

    Returns (betas, failed_index); ``failed_index`` is -1 when every point
    converged, otherwise the first index that hit the sweep cap.
    """
    p = G.shape[0]
    nl = lams.shape[0]
    betas = np.zeros((nl, p))
    beta = np.zeros(p)
    empty = np.empty(0)
    for i in range(nl):
        beta, _, ok = solve(G, c, yy, n, beta, lams[i], w, fam, param, tol, max_sweeps, empty)
        if not ok:
            return betas, i
        betas[i] = beta
    return betas, -1
