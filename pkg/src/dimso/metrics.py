"""Distribution similarity measures between a real sample U and a synthetic sample V."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.spatial.distance import cdist, pdist


def _as_pair(U, V) -> tuple[np.ndarray, np.ndarray]:
    U = np.atleast_2d(np.asarray(U, dtype=np.float64))
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    if U.shape[0] == 0 or V.shape[0] == 0:
        raise ValueError("both samples must be nonempty")
    if U.shape[1] != V.shape[1]:
        raise ValueError(f"column mismatch: {U.shape[1]} vs {V.shape[1]}")
    return U, V


def wasserstein_distance(U, V) -> float:
    """Mean over features of the 1-D empirical Wasserstein-1 distance."""
    U, V = _as_pair(U, V)
    return float(np.mean([stats.wasserstein_distance(U[:, j], V[:, j]) for j in range(U.shape[1])]))


def rbf_gamma(U: np.ndarray, V: np.ndarray) -> float:
    """Kernel width from the median squared pairwise distance of the pooled sample."""
    pooled = np.vstack([U, V])
    if len(pooled) < 2:
        return 1.0
    median = float(np.median(pdist(pooled, "sqeuclidean")))
    return 1.0 / (2.0 * median) if median > 0 else 1.0


def mmd(U, V, gamma: float | None = None) -> float:
    """Biased (V-statistic) MMD with an RBF kernel, returned as sqrt(max(MMD^2, 0))."""
    U, V = _as_pair(U, V)
    if gamma is None:
        gamma = rbf_gamma(U, V)
    k_uu = np.exp(-gamma * cdist(U, U, "sqeuclidean")).mean()
    k_vv = np.exp(-gamma * cdist(V, V, "sqeuclidean")).mean()
    k_uv = np.exp(-gamma * cdist(U, V, "sqeuclidean")).mean()
    return float(np.sqrt(max(k_uu + k_vv - 2.0 * k_uv, 0.0)))


def mean_nn(U, V) -> float:
    """Average distance from each row of V to its nearest row of U."""
    U, V = _as_pair(U, V)
    # fsum keeps the average independent of summation order
    return math.fsum(cdist(V, U).min(axis=1)) / len(V)


@dataclass
class SimilarityReport:
    wd: float
    mmd: float
    mean_nn: float
    per_class: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "wd": self.wd,
            "mmd": self.mmd,
            "mean_nn": self.mean_nn,
            "per_class": {
                str(c): {"wd": v[0], "mmd": v[1], "mean_nn": v[2]} for c, v in self.per_class.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> SimilarityReport:
        per_class = {c: (v["wd"], v["mmd"], v["mean_nn"]) for c, v in d.get("per_class", {}).items()}
        return cls(d["wd"], d["mmd"], d["mean_nn"], per_class)


def per_class_similarity(X_real, y_real, X_syn, y_syn) -> SimilarityReport:
    """Each metric computed within every real class, then averaged over classes with equal weight."""
    X_real, X_syn = _as_pair(X_real, X_syn)
    y_real = np.asarray(y_real)
    y_syn = np.asarray(y_syn)
    real_classes = np.unique(y_real)
    extra = set(np.unique(y_syn).tolist()) - set(real_classes.tolist())
    if extra:
        raise ValueError(f"synthetic labels {sorted(extra)} do not occur in the real data")
    per_class = {}
    for c in real_classes:
        U = X_real[y_real == c]
        V = X_syn[y_syn == c]
        key = c.item() if hasattr(c, "item") else c
        if len(V) == 0:
            raise ValueError(f"class {key!r} has no synthetic samples")
        per_class[key] = (wasserstein_distance(U, V), mmd(U, V), mean_nn(U, V))
    values = np.array(list(per_class.values()))
    wd, mmd_, nn = values.mean(axis=0)
    return SimilarityReport(float(wd), float(mmd_), float(nn), per_class)
