"""SMOTE baseline that returns only interpolated samples, n_s per class."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import PreconditionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    samples_per_class: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        if self.samples_per_class < 1:
            raise ValueError(f"samples_per_class must be >= 1, got {self.samples_per_class}")


@dataclass
class Provenance:
    """Where each synthetic row came from, as row indices into the input X."""

    base: np.ndarray
    neighbor: np.ndarray
    u: np.ndarray


def nearest_neighbors(X: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest other rows of X; ties go to the lower index."""
    dist = cdist(X, X, "sqeuclidean")
    np.fill_diagonal(dist, np.inf)
    return np.argsort(dist, axis=1, kind="stable")[:, :k]


def smote_generate(X, y, cfg: SmoteConfig = SmoteConfig(), return_provenance: bool = False):
    """Interpolate between same-class neighbors; original samples are not included.

    Every class, majority ones included, receives exactly
    `cfg.samples_per_class` new rows. Returns ``(X_syn, y_syn)`` or
    ``(X_syn, y_syn, provenance)``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    labels, counts = np.unique(y, return_counts=True)
    if (counts < 2).any():
        raise PreconditionError(f"SMOTE needs at least 2 samples per class; offending classes {labels[counts < 2].tolist()}")
    rng = np.random.default_rng(cfg.seed)
    n_s = cfg.samples_per_class
    parts, bases, neighbors, us = [], [], [], []
    for label, count in zip(labels, counts):
        rows = np.flatnonzero(y == label)
        k = cfg.k_neighbors
        if k > count - 1:
            logger.warning("class %r has %d samples; using k=%d neighbors instead of %d", label, count, count - 1, k)
            k = count - 1
        nn = nearest_neighbors(X[rows], k)
        base = rng.integers(0, count, size=n_s)
        pick = nn[base, rng.integers(0, k, size=n_s)]
        u = rng.random(n_s)
        parts.append(X[rows[base]] + u[:, None] * (X[rows[pick]] - X[rows[base]]))
        bases.append(rows[base])
        neighbors.append(rows[pick])
        us.append(u)
    X_syn = np.vstack(parts)
    y_syn = np.repeat(labels, n_s)
    if return_provenance:
        return X_syn, y_syn, Provenance(np.concatenate(bases), np.concatenate(neighbors), np.concatenate(us))
    return X_syn, y_syn
