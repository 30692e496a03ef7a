"""Classification-benefit protocol: twin classifiers on real vs synthetic training data."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import generator as dimso
from .data import Dataset, Standardizer, stratified_kfold
from .losses import LossKind
from .metrics import SimilarityReport, per_class_similarity
from .nn import AdamConfig, MlpNetwork, build_network
from .pca import PcaModel, pca_fit, pca_inverse, pca_transform
from .smote import SmoteConfig, smote_generate

REPORT_SCHEMA_VERSION = 1


def balanced_accuracy(y_true, y_pred) -> float:
    """Mean per-class recall over the classes present in `y_true`."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted labels")
    if len(y_true) == 0:
        raise ValueError("empty input")
    recalls = [np.mean(y_pred[y_true == c] == c) for c in np.unique(y_true)]
    return float(np.mean(recalls))


# --- classifiers ---------------------------------------------------------------

class GaussianNB:
    """Gaussian naive Bayes with variance smoothing relative to the largest feature variance."""

    def __init__(self, var_smoothing: float = 1e-9):
        self.var_smoothing = var_smoothing

    def fit(self, X, y) -> GaussianNB:
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        self.classes_ = np.unique(y)
        eps = self.var_smoothing * X.var(axis=0).max()
        self.theta_ = np.array([X[y == c].mean(axis=0) for c in self.classes_])
        self.var_ = np.array([X[y == c].var(axis=0) for c in self.classes_]) + eps
        if (self.var_ <= 0).any():
            # every feature constant: fall back to unit variance instead of dividing by zero
            self.var_ = np.where(self.var_ > 0, self.var_, 1.0)
        self.log_prior_ = np.log(np.array([np.mean(y == c) for c in self.classes_]))
        return self

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        norm = -0.5 * np.log(2.0 * np.pi * self.var_).sum(axis=1)
        sq = ((X[:, None, :] - self.theta_[None]) ** 2 / self.var_[None]).sum(axis=2)
        return self.log_prior_ + norm - 0.5 * sq

    def predict(self, X) -> np.ndarray:
        # argmax returns the first maximum, i.e. the lowest label on ties
        return self.classes_[np.argmax(self.joint_log_likelihood(X), axis=1)]


class MLPClassifier:
    """One hidden ReLU layer, softmax cross-entropy, full-batch Adam."""

    def __init__(self, hidden: int = 100, epochs: int = 200, learning_rate: float = 1e-3, seed: int = 0):
        self.hidden = hidden
        self.epochs = epochs
        self.adam = AdamConfig(learning_rate=learning_rate)
        self.seed = seed

    def fit(self, X, y) -> MLPClassifier:
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        self.classes_, codes = np.unique(y, return_inverse=True)
        onehot = np.eye(len(self.classes_))[codes]
        self.net_: MlpNetwork = build_network([X.shape[1], self.hidden, len(self.classes_)], self.seed)
        self.loss_curve_ = []
        for _ in range(self.epochs):
            logits, tape = self.net_.forward(X)
            logits = logits - logits.max(axis=1, keepdims=True)
            log_p = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
            self.loss_curve_.append(float(-(onehot * log_p).sum(axis=1).mean()))
            self.net_.backward_and_step(tape, (np.exp(log_p) - onehot) / len(X), self.adam)
        return self

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.net_.predict(X), axis=1)]


def train_gnb(X, y) -> GaussianNB:
    return GaussianNB().fit(X, y)


def train_mlp_classifier(X, y, seed: int = 0) -> MLPClassifier:
    return MLPClassifier(seed=seed).fit(X, y)


def predict(classifier, X) -> np.ndarray:
    return classifier.predict(X)


CLASSIFIERS: dict[str, Callable] = {
    "gnb": lambda X, y, seed: train_gnb(X, y),
    "mlp": lambda X, y, seed: train_mlp_classifier(X, y, seed=seed),
}


# --- generators ----------------------------------------------------------------

@dataclass
class GeneratorOutput:
    X: np.ndarray
    y: np.ndarray
    model: object = None  # fitted generator state, if any
    loss_log: np.ndarray | None = None  # (epochs, classes) for DiMSO


def _dimso_generator(loss: LossKind):
    def run(X, y, seed, dimso_config=None, **_):
        cfg = replace(dimso_config or dimso.DimsoConfig(), loss=loss, seed=seed)
        model = dimso.fit(X, y, cfg)
        X_syn, y_syn = dimso.generate(model)
        return GeneratorOutput(X_syn, y_syn, model, model.training_log)

    return run


def _smote_generator(X, y, seed, smote_config=None, **_):
    cfg = replace(smote_config or SmoteConfig(), seed=seed)
    X_syn, y_syn = smote_generate(X, y, cfg)
    return GeneratorOutput(X_syn, y_syn)


def _identity_generator(X, y, seed, **_):
    return GeneratorOutput(np.array(X, dtype=np.float64), np.array(y))


GENERATORS: dict[str, Callable] = {
    "dimso-rae": _dimso_generator(LossKind.RAE),
    "dimso-w": _dimso_generator(LossKind.W),
    "dimso-wc": _dimso_generator(LossKind.WC),
    "smote": _smote_generator,
    "identity": _identity_generator,
}


# --- protocol ------------------------------------------------------------------

@dataclass
class FoldResult:
    fold: int
    bac_real: float
    bac_syn: float
    similarity: SimilarityReport
    loss_log: np.ndarray | None = None
    standardizer: Standardizer | None = None
    pca: PcaModel | None = None
    generator_model: object = None

    @property
    def delta_q(self) -> float:
        return self.bac_syn - self.bac_real


@dataclass
class EvalReport:
    pipeline: str
    generator: str
    classifier: str
    seed: int
    folds: list[FoldResult] = field(default_factory=list)

    def _stat(self, values) -> dict:
        values = np.asarray(values, dtype=np.float64)
        return {"mean": float(values.mean()), "std": float(values.std())}

    def aggregates(self) -> dict:
        return {
            "bac_real": self._stat([f.bac_real for f in self.folds]),
            "bac_syn": self._stat([f.bac_syn for f in self.folds]),
            "delta_q": self._stat([f.delta_q for f in self.folds]),
            "wd": self._stat([f.similarity.wd for f in self.folds]),
            "mmd": self._stat([f.similarity.mmd for f in self.folds]),
            "mean_nn": self._stat([f.similarity.mean_nn for f in self.folds]),
        }

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "pipeline": self.pipeline,
            "generator": self.generator,
            "classifier": self.classifier,
            "seed": self.seed,
            "k": len(self.folds),
            "folds": [
                {
                    "fold": f.fold,
                    "bac_real": f.bac_real,
                    "bac_syn": f.bac_syn,
                    "delta_q": f.delta_q,
                    "similarity": f.similarity.to_dict(),
                }
                for f in self.folds
            ],
            "aggregates": self.aggregates(),
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    def write_fold_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["fold", "bac_real", "bac_syn", "delta_q", "wd", "mmd", "mean_nn"])
            for f in self.folds:
                s = f.similarity
                w.writerow([f.fold, repr(f.bac_real), repr(f.bac_syn), repr(f.delta_q), repr(s.wd), repr(s.mmd), repr(s.mean_nn)])

    def write_loss_log(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["fold", "class_index", "epoch", "loss"])
            for f in self.folds:
                if f.loss_log is None:
                    continue
                for epoch, row in enumerate(f.loss_log, start=1):
                    for c, value in enumerate(row):
                        w.writerow([f.fold, c, epoch, repr(float(value))])


def _resolve(spec, registry: dict, kind: str) -> Callable:
    if callable(spec):
        return spec
    try:
        return registry[spec]
    except KeyError:
        raise ValueError(f"unknown {kind} {spec!r}; choose from {sorted(registry)}") from None


def run_protocol(
    dataset: Dataset,
    generator_spec="dimso-rae",
    classifier_spec="gnb",
    k: int = 5,
    pipeline: str = "raw",
    pca_threshold: float = 0.70,
    seed: int = 0,
    dimso_config: dimso.DimsoConfig | None = None,
    smote_config: SmoteConfig | None = None,
    folds=None,
) -> EvalReport:
    """Stratified k-fold comparison of classifiers trained on real and on synthetic data.

    In each fold the standardizer (and PCA, for ``pipeline="pca"``) is
    fitted on the training part only. The generator sees the processed
    training data; both classifiers are scored with balanced accuracy on
    the processed test part. Similarity is measured per class between
    the synthetic and real training data in standardized feature space,
    after inverse PCA when applicable.

    `generator_spec` is a registry name or a callable
    ``(X, y, seed, **configs) -> GeneratorOutput``; `classifier_spec` is a
    name or ``(X, y, seed) -> classifier``. `folds` overrides the split.
    """
    if pipeline not in ("raw", "pca"):
        raise ValueError(f"pipeline must be 'raw' or 'pca', got {pipeline!r}")
    make_syn = _resolve(generator_spec, GENERATORS, "generator")
    train_clf = _resolve(classifier_spec, CLASSIFIERS, "classifier")
    if folds is None:
        folds = stratified_kfold(dataset.y, k=k, seed=seed)
    report = EvalReport(
        pipeline,
        generator_spec if isinstance(generator_spec, str) else getattr(generator_spec, "__name__", "custom"),
        classifier_spec if isinstance(classifier_spec, str) else getattr(classifier_spec, "__name__", "custom"),
        seed,
    )
    for i, (train, test) in enumerate(folds):
        fold_seed = seed * 1000 + i
        scaler = Standardizer.fit(dataset.X[train])
        X_train = scaler.transform(dataset.X[train])
        X_test = scaler.transform(dataset.X[test])
        y_train, y_test = dataset.y[train], dataset.y[test]
        pca_model = None
        if pipeline == "pca":
            pca_model = pca_fit(X_train, pca_threshold)
            X_train_p = pca_transform(pca_model, X_train)
            X_test_p = pca_transform(pca_model, X_test)
        else:
            X_train_p, X_test_p = X_train, X_test

        syn = make_syn(X_train_p, y_train, fold_seed, dimso_config=dimso_config, smote_config=smote_config)
        real_clf = train_clf(X_train_p, y_train, fold_seed)
        syn_clf = train_clf(syn.X, syn.y, fold_seed)
        bac_real = balanced_accuracy(y_test, predict(real_clf, X_test_p))
        bac_syn = balanced_accuracy(y_test, predict(syn_clf, X_test_p))

        syn_space = pca_inverse(pca_model, syn.X) if pca_model is not None else syn.X
        similarity = per_class_similarity(X_train, y_train, syn_space, syn.y)
        report.folds.append(
            FoldResult(i, bac_real, bac_syn, similarity, syn.loss_log, scaler, pca_model, syn.model)
        )
    return report
