"""Principal component analysis with variance-threshold component selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# cumulative ratios within this of the threshold count as reaching it
_RATIO_TOL = 1e-12


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray  # (d,)
    components: np.ndarray  # (k, d), orthonormal rows, descending variance
    explained_variance: np.ndarray  # (k,)
    explained_variance_ratio: np.ndarray  # (k,)
    all_explained_variance_ratio: np.ndarray  # (d,), sums to 1

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def n_features(self) -> int:
        return self.components.shape[1]


def pca_fit(X, variance_threshold: float = 0.70) -> PcaModel:
    """Keep the fewest leading components whose cumulative explained variance reaches the threshold."""
    X = np.asarray(X, dtype=np.float64)
    if not 0 < variance_threshold <= 1:
        raise ValueError(f"variance_threshold must be in (0, 1], got {variance_threshold}")
    if X.ndim != 2 or len(X) < 2:
        raise ValueError("PCA needs a 2-D matrix with at least two rows")
    if not np.isfinite(X).all():
        raise ValueError("X contains non-finite values")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (len(X) - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals, kind="stable")[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order].T
    total = eigvals.sum()
    if total <= 0:
        raise ValueError("X has zero variance in every direction")

    # deterministic orientation: largest-magnitude entry of each component is positive
    pivots = np.argmax(np.abs(eigvecs), axis=1)
    signs = np.sign(eigvecs[np.arange(len(eigvecs)), pivots])
    eigvecs = eigvecs * signs[:, None]

    ratio = eigvals / total
    k = int(np.searchsorted(np.cumsum(ratio), variance_threshold - _RATIO_TOL) + 1)
    k = min(k, int((ratio > 0).sum()))
    return PcaModel(mean, eigvecs[:k].copy(), eigvals[:k].copy(), ratio[:k].copy(), ratio)


def pca_transform(model: PcaModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} columns, got shape {X.shape}")
    return (X - model.mean) @ model.components.T


def pca_inverse(model: PcaModel, Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] != model.n_components:
        raise ValueError(f"expected {model.n_components} columns, got shape {Z.shape}")
    return Z @ model.components + model.mean


def model_arrays(model: PcaModel, prefix: str = "pca_") -> dict:
    return {
        f"{prefix}mean": model.mean,
        f"{prefix}components": model.components,
        f"{prefix}explained_variance": model.explained_variance,
        f"{prefix}explained_variance_ratio": model.explained_variance_ratio,
        f"{prefix}all_explained_variance_ratio": model.all_explained_variance_ratio,
    }


def model_from_arrays(arrays, prefix: str = "pca_") -> PcaModel:
    return PcaModel(
        np.asarray(arrays[f"{prefix}mean"]),
        np.asarray(arrays[f"{prefix}components"]),
        np.asarray(arrays[f"{prefix}explained_variance"]),
        np.asarray(arrays[f"{prefix}explained_variance_ratio"]),
        np.asarray(arrays[f"{prefix}all_explained_variance_ratio"]),
    )
