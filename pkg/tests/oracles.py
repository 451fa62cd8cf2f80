"""Independent brute-force oracles the tests check production code against.

Everything here is written for transparency, not speed: quadratic scans,
explicit loops, and the definitional forms of each quantity.
"""
from __future__ import annotations

import math

import numpy as np


def threshold_brute(z_tr, fi, q):
    """Definitional O(p^2) scan for the selection threshold.

    For every observed positive candidate t, count #{fi <= -t} and
    #{fi >= t} with explicit loops and return the smallest admissible t.
    """
    z_tr = np.asarray(z_tr, dtype=float)
    fi = np.asarray(fi, dtype=float)
    best = math.inf
    for t in z_tr:
        if t <= 0:
            continue
        num = sum(1 for v in fi if v <= -t)
        den = sum(1 for v in fi if v >= t)
        if num / max(den, 1) <= q and t < best:
            best = t
    return best


def bh_brute(pvalues, q):
    """Step-up rule by scanning every k explicitly."""
    pvalues = np.asarray(pvalues, dtype=float)
    p = pvalues.size
    order = np.argsort(pvalues, kind="stable")
    sorted_p = pvalues[order]
    k_star = 0
    for k in range(1, p + 1):
        if sorted_p[k - 1] <= k * q / p:
            k_star = k
    return frozenset(int(j) for j in order[:k_star])


def elbow_brute(z):
    """Exhaustive perpendicular-distance scan for the distribution knee.

    Uses the full point-to-line distance formula (with normalization) so it
    shares no code shape with the vectorized implementation.
    """
    zs = np.sort(np.asarray(z, dtype=float))
    p = zs.size
    x1, y1 = zs[0], 1.0 / p
    x2, y2 = zs[-1], 1.0
    denom = math.hypot(y2 - y1, x2 - x1)
    best_k, best_d = 0, -1.0
    for k in range(p):
        x0, y0 = zs[k], (k + 1) / p
        d = abs((y2 - y1) * x0 - (x2 - x1) * y0 + x2 * y1 - y2 * x1) / denom
        if d > best_d + 1e-15:
            best_d = d
            best_k = k
    tau = zs[best_k]
    if tau <= 0:
        tau = zs[zs > 0][0]
    return float(tau)


def ols_normal_equations(X, y):
    """Least-squares coefficients by directly solving the normal equations."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    return np.linalg.solve(Xc.T @ Xc, Xc.T @ yc)


def lasso_objective(X, y, w, penalty):
    """(1/2n)||yc - Xc w||^2 + penalty * ||w||_1 on the centered problem."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    r = (y - y.mean()) - (X - X.mean(axis=0)) @ w
    return float(r @ r) / (2 * n) + penalty * float(np.abs(w).sum())


def ks_uniform_distance(sample):
    """Kolmogorov-Smirnov distance of a sample against Uniform(0, 1)."""
    s = np.sort(np.asarray(sample, dtype=float))
    n = s.size
    upper = np.arange(1, n + 1) / n - s
    lower = s - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def streaming_mean(values):
    """Welford-style running mean, an independent route to the average."""
    mean = 0.0
    for i, v in enumerate(values, start=1):
        mean += (v - mean) / i
    return mean
