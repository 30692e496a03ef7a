"""Slow reference implementations used only by the tests.

Each one is written from the definition with plain loops so it shares no
code path with the vectorized implementations it checks.
"""

import math
import statistics

import numpy as np


def central_difference(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Numerical gradient of scalar f at x (x is perturbed in place and restored)."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + h
        up = f()
        x[i] = old - h
        down = f()
        x[i] = old
        grad[i] = (up - down) / (2 * h)
    return grad


def relative_close(analytic, numeric, rtol=1e-4, floor=1e-8) -> bool:
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    return bool(np.all(np.abs(analytic - numeric) <= rtol * scale + floor))


def mmd_brute(U, V) -> float:
    U = [list(map(float, r)) for r in U]
    V = [list(map(float, r)) for r in V]
    pooled = U + V
    sq = lambda a, b: sum((p - q) ** 2 for p, q in zip(a, b))
    dists = [sq(pooled[i], pooled[j]) for i in range(len(pooled)) for j in range(i + 1, len(pooled))]
    med = statistics.median(dists) if dists else 0.0
    gamma = 1.0 / (2.0 * med) if med > 0 else 1.0
    k = lambda a, b: math.exp(-gamma * sq(a, b))
    m, n = len(U), len(V)
    a = sum(k(U[i], U[j]) for i in range(m) for j in range(m)) / m**2
    b = sum(k(V[i], V[j]) for i in range(n) for j in range(n)) / n**2
    c = sum(k(U[i], V[j]) for i in range(m) for j in range(n)) * 2 / (m * n)
    return math.sqrt(max(a + b - c, 0.0))


def wasserstein_1d_brute(u, v) -> float:
    """Integral of |F_u - F_v| over the real line, piecewise on the merged support."""
    u = [float(a) for a in u]
    v = [float(b) for b in v]
    points = sorted(set(u) | set(v))
    total = 0.0
    for left, right in zip(points[:-1], points[1:]):
        fu = sum(1 for a in u if a <= left) / len(u)
        fv = sum(1 for b in v if b <= left) / len(v)
        total += abs(fu - fv) * (right - left)
    return total


def mean_nn_brute(U, V) -> float:
    total = 0.0
    for v in V:
        total += min(math.dist(list(v), list(u)) for u in U)
    return total / len(V)


def knn_brute(X, k):
    """k nearest other rows per row; ties broken by the lower index."""
    out = []
    for i in range(len(X)):
        cands = sorted((sum((a - b) ** 2 for a, b in zip(X[i], X[j])), j) for j in range(len(X)) if j != i)
        out.append([j for _, j in cands[:k]])
    return out
