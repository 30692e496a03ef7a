"""Datasets: CSV I/O, standardization, stratified folds and toy generators."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn import datasets as skdatasets
from sklearn.model_selection import StratifiedKFold

from .errors import DataError


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray  # dense integer codes 0..C-1
    feature_names: list[str] | None = None
    label_names: list[str] | None = None  # original label of each integer code
    label_column: str = "label"

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y)
        if self.X.ndim != 2 or len(self.X) == 0:
            raise DataError(f"X must be a nonempty 2-D matrix, got shape {self.X.shape}")
        if len(self.y) != len(self.X):
            raise DataError(f"{len(self.y)} labels for {len(self.X)} rows")
        if not np.isfinite(self.X).all():
            raise DataError("X contains missing or non-finite values")

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def decode_labels(self, codes) -> list:
        codes = np.asarray(codes)
        if self.label_names is None:
            return codes.tolist()
        return [self.label_names[int(c)] for c in codes]


def load_csv(path, label_column: str | int = -1, header: bool = True) -> Dataset:
    """Read a comma-separated file of numeric features plus one label column.

    `label_column` is a header name or a (possibly negative) position.
    Labels may be arbitrary strings; they are mapped to dense integer
    codes in sorted order and the original names are kept on the dataset.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh)) if r and any(c.strip() for c in r)]
    if header:
        if not rows:
            raise DataError(f"{path} is empty")
        names = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path} has no data rows")
    width = len(rows[0][1])
    if not header:
        names = [f"x{j}" for j in range(width)]
    elif len(names) != width:
        raise DataError(f"header has {len(names)} columns but line {rows[0][0]} has {width}")

    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if label_column not in names:
            raise DataError(f"label column {label_column!r} not found in header {names}")
        label_pos = names.index(label_column)
    else:
        label_pos = int(label_column)
        if not -width <= label_pos < width:
            raise DataError(f"label column index {label_pos} out of range for {width} columns")
        label_pos %= width
    feature_pos = [j for j in range(width) if j != label_pos]

    X = np.empty((len(rows), len(feature_pos)))
    raw_labels = []
    for r, (line, cells) in enumerate(rows):
        if len(cells) != width:
            raise DataError(f"line {line}: expected {width} fields, found {len(cells)}")
        for c, j in enumerate(feature_pos):
            try:
                X[r, c] = float(cells[j])
            except ValueError:
                raise DataError(f"line {line}, column {names[j]!r}: non-numeric value {cells[j]!r}") from None
        raw_labels.append(cells[label_pos].strip())
    if not np.isfinite(X).all():
        bad_r, bad_c = np.argwhere(~np.isfinite(X))[0]
        raise DataError(f"line {rows[bad_r][0]}, column {names[feature_pos[bad_c]]!r}: non-finite value")

    label_names, y = _encode_labels(raw_labels)
    return Dataset(X, y, [names[j] for j in feature_pos], label_names, names[label_pos])


def _encode_labels(raw: Sequence[str]) -> tuple[list[str], np.ndarray]:
    def key(s):
        # numeric labels sort numerically, everything else lexically after them
        try:
            return (0, float(s), s)
        except ValueError:
            return (1, 0.0, s)

    names = sorted(set(raw), key=key)
    index = {name: i for i, name in enumerate(names)}
    return names, np.array([index[s] for s in raw], dtype=np.int64)


def write_csv(path, X, labels, feature_names=None, label_column: str = "label") -> None:
    """Write features plus a final label column; floats use repr so they round-trip exactly."""
    X = np.asarray(X, dtype=np.float64)
    if feature_names is None:
        feature_names = [f"x{j}" for j in range(X.shape[1])]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*feature_names, label_column])
        for row, label in zip(X, labels):
            writer.writerow([repr(float(v)) for v in row] + [label])


def file_digest(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class Standardizer:
    mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    scale: np.ndarray = field(default_factory=lambda: np.ones(0))

    @classmethod
    def fit(cls, X) -> Standardizer:
        X = np.asarray(X, dtype=np.float64)
        std = X.std(axis=0)
        # constant columns keep divisor 1 so they map to zero instead of nan
        return cls(X.mean(axis=0), np.where(std > 0, std, 1.0))

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale

    def inverse_transform(self, Z) -> np.ndarray:
        return np.asarray(Z, dtype=np.float64) * self.scale + self.mean


def stratified_kfold(y, k: int = 5, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Shuffled stratified k-fold split as (train_indices, test_indices) pairs."""
    y = np.asarray(y)
    if k < 2:
        raise DataError(f"need at least 2 folds, got {k}")
    labels, counts = np.unique(y, return_counts=True)
    if (counts < k).any():
        small = {l.item(): int(c) for l, c in zip(labels, counts) if c < k}
        raise DataError(f"classes with fewer than {k} samples cannot be split into {k} folds: {small}")
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    return [(train, test) for train, test in splitter.split(np.zeros(len(y)), y)]


def _counts_from_priors(n: int, priors: Sequence[float]) -> list[int]:
    p = np.asarray(priors, dtype=np.float64)
    if (p <= 0).any():
        raise DataError("class priors must be positive")
    p = p / p.sum()
    raw = n * p
    counts = np.floor(raw).astype(int)
    # largest remainder rounding, earlier classes win ties
    for i in np.argsort(-(raw - counts), kind="stable")[: n - counts.sum()]:
        counts[i] += 1
    return counts.tolist()


def make_toy(kind: str, n: int, seed: int = 0, **params) -> Dataset:
    """Small synthetic classification problems.

    kind="moons": two interleaving half circles (params: noise=0.1).
    kind="blobs": isotropic Gaussian clusters (params: priors=(0.5, 0.5),
    n_features=2, cluster_std=1.0, center_box=(-5, 5)).
    kind="clustered_cube": `clusters` Gaussian clusters with unit spread
    centred on distinct random vertices of the hypercube [-sep, sep]^d
    (params: clusters=4, n_features=20, sep=1.0); labels are the cluster ids.
    """
    if n < 4:
        raise DataError(f"n must be at least 4, got {n}")
    if kind == "moons":
        X, y = skdatasets.make_moons(n_samples=n, noise=params.pop("noise", 0.1), random_state=seed)
    elif kind == "blobs":
        counts = _counts_from_priors(n, params.pop("priors", (0.5, 0.5)))
        X, y = skdatasets.make_blobs(
            n_samples=counts,
            n_features=params.pop("n_features", 2),
            cluster_std=params.pop("cluster_std", 1.0),
            center_box=params.pop("center_box", (-5.0, 5.0)),
            random_state=seed,
        )
    elif kind == "clustered_cube":
        clusters = params.pop("clusters", 4)
        d = params.pop("n_features", 20)
        sep = params.pop("sep", 1.0)
        if clusters < 1 or d < 1 or clusters > 2**min(d, 62):
            raise DataError(f"cannot place {clusters} clusters on a {d}-dimensional cube")
        rng = np.random.default_rng(seed)
        vertices: set[tuple] = set()
        while len(vertices) < clusters:
            vertices.add(tuple(rng.integers(0, 2, size=d).tolist()))
        centers = (2.0 * np.array(sorted(vertices)) - 1.0) * sep
        y = np.arange(n) % clusters
        X = centers[y] + rng.standard_normal((n, d))
    else:
        raise DataError(f"unknown toy dataset {kind!r}")
    if params:
        raise DataError(f"unused parameters for {kind}: {sorted(params)}")
    return Dataset(X, y.astype(np.int64), label_names=[str(c) for c in range(int(y.max()) + 1)])
