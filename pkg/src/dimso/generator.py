"""Noise-to-data distribution mapping: one small network per class, trained on shared Gaussian noise."""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import metrics
from .errors import PreconditionError
from .losses import LossKind, PairingSchedule, evaluate_loss
from .nn import AdamConfig, MlpNetwork, init_network

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class DimsoConfig:
    features_factor: float = 3.5
    epochs: int = 2000
    learning_rate: float = 1e-3
    samples_per_class: int = 300
    loss: LossKind = LossKind.RAE
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "loss", LossKind.parse(self.loss))
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.samples_per_class < 2:
            raise ValueError(f"samples_per_class must be >= 2, got {self.samples_per_class}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not self.features_factor > 0:
            raise ValueError(f"features_factor must be positive, got {self.features_factor}")

    def noise_dim(self, n_features: int) -> int:
        return math.floor(self.features_factor * n_features)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["loss"] = self.loss.value
        return d


@dataclass
class DimsoModel:
    noise: np.ndarray
    class_labels: np.ndarray
    networks: list[MlpNetwork]
    config: DimsoConfig
    training_log: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))  # (epochs, classes)

    @property
    def n_features(self) -> int:
        return self.networks[0].output_dim


def _check_inputs(X, y, cfg: DimsoConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise PreconditionError(f"X must be 2-D with one label per row, got X{X.shape}, y{y.shape}")
    if not np.isfinite(X).all():
        raise PreconditionError("X contains non-finite values")
    labels, counts = np.unique(y, return_counts=True)
    if len(labels) == 0:
        raise PreconditionError("no samples")
    small = labels[counts < 2]
    if len(small):
        raise PreconditionError(f"classes with fewer than 2 samples: {small.tolist()}")
    d = cfg.noise_dim(X.shape[1])
    if d <= X.shape[1]:
        raise PreconditionError(
            f"noise dimensionality floor({cfg.features_factor} * {X.shape[1]}) = {d} "
            f"must exceed the number of features {X.shape[1]}"
        )
    return X, y, labels


class _ClassTrainer:
    """Training state for one class network; owns its own random stream."""

    def __init__(self, target: np.ndarray, noise: np.ndarray, cfg: DimsoConfig, class_index: int):
        self.target = target
        self.noise = noise
        self.loss = cfg.loss
        self.adam = AdamConfig(learning_rate=cfg.learning_rate)
        self.net = init_network(noise.shape[1], target.shape[1], seed=[cfg.seed, 1, class_index])
        self.rng = np.random.default_rng([cfg.seed, 2, class_index])
        self.schedule = PairingSchedule(len(noise), len(target), self.rng)

    def step(self) -> float:
        out, tape = self.net.forward(self.noise)
        plan = self.schedule.draw(self.rng)
        value, grad = evaluate_loss(self.loss, out, self.target, plan)
        self.net.backward_and_step(tape, grad, self.adam)
        return value


def _setup(X, y, cfg: DimsoConfig):
    X, y, labels = _check_inputs(X, y, cfg)
    noise = np.random.default_rng([cfg.seed, 0]).standard_normal((cfg.samples_per_class, cfg.noise_dim(X.shape[1])))
    trainers = [_ClassTrainer(X[y == c], noise, cfg, i) for i, c in enumerate(labels)]
    return noise, labels, trainers


def fit(X, y, cfg: DimsoConfig = DimsoConfig()) -> DimsoModel:
    """Train one network per class for `cfg.epochs` epochs (classes visited in sorted label order)."""
    noise, labels, trainers = _setup(X, y, cfg)
    log = np.empty((cfg.epochs, len(trainers)))
    for epoch in range(cfg.epochs):
        for i, trainer in enumerate(trainers):
            log[epoch, i] = trainer.step()
    return DimsoModel(noise, labels, [t.net for t in trainers], cfg, log)


def generate(model: DimsoModel) -> tuple[np.ndarray, np.ndarray]:
    """Map the stored noise through every class network; returns n_s rows per class."""
    if not model.networks:
        raise ValueError("model has no trained networks")
    n_s = len(model.noise)
    X_syn = np.vstack([net.predict(model.noise) for net in model.networks])
    y_syn = np.repeat(model.class_labels, n_s)
    return X_syn, y_syn


def fit_until_similarity(
    X,
    y,
    cfg: DimsoConfig,
    target_mmd: float,
    check_every: int = 10,
    max_epochs: int = 1000,
    trace: list | None = None,
) -> tuple[DimsoModel, int, float]:
    """Train until the unlabeled MMD between generated and real data drops to `target_mmd`.

    MMD is checked every `check_every` epochs on the pooled samples,
    ignoring labels. Returns the model, the number of epochs run and the
    elapsed wall time (training plus checkpoint evaluation). If `trace` is
    given, ``(epoch, mmd)`` pairs are appended at each checkpoint.
    """
    if not target_mmd >= 0:
        raise ValueError(f"target_mmd must be >= 0, got {target_mmd}")
    if check_every < 1 or max_epochs < 1:
        raise ValueError("check_every and max_epochs must be positive")
    start = time.perf_counter()
    noise, labels, trainers = _setup(X, y, cfg)
    X = np.asarray(X, dtype=np.float64)
    losses = []
    epochs_used = 0
    while epochs_used < max_epochs:
        losses.append([t.step() for t in trainers])
        epochs_used += 1
        if epochs_used % check_every == 0 or epochs_used == max_epochs:
            X_syn = np.vstack([t.net.predict(noise) for t in trainers])
            value = metrics.mmd(X, X_syn)
            if trace is not None:
                trace.append((epochs_used, value))
            if value <= target_mmd:
                break
    elapsed = time.perf_counter() - start
    model = DimsoModel(noise, labels, [t.net for t in trainers], cfg, np.asarray(losses))
    return model, epochs_used, elapsed


# --- serialization -------------------------------------------------------------

def model_arrays(model: DimsoModel, prefix: str = "") -> tuple[dict, dict]:
    """Flatten a model into (arrays, json-able metadata) for storage in an .npz bundle."""
    arrays = {f"{prefix}noise": model.noise, f"{prefix}training_log": model.training_log}
    for i, net in enumerate(model.networks):
        for k, (w, b) in enumerate(zip(net.weights, net.biases)):
            arrays[f"{prefix}net{i}_w{k}"] = w
            arrays[f"{prefix}net{i}_b{k}"] = b
    meta = {
        "config": model.config.to_dict(),
        "class_labels": model.class_labels.tolist(),
        "n_layers": len(model.networks[0].weights),
        "adam_t": [net.t for net in model.networks],
    }
    return arrays, meta


def model_from_arrays(arrays, meta: dict, prefix: str = "") -> DimsoModel:
    networks = []
    for i, t in enumerate(meta["adam_t"]):
        ws = [np.asarray(arrays[f"{prefix}net{i}_w{k}"]) for k in range(meta["n_layers"])]
        bs = [np.asarray(arrays[f"{prefix}net{i}_b{k}"]) for k in range(meta["n_layers"])]
        net = MlpNetwork(ws, bs)
        net.t = t
        networks.append(net)
    return DimsoModel(
        noise=np.asarray(arrays[f"{prefix}noise"]),
        class_labels=np.asarray(meta["class_labels"]),
        networks=networks,
        config=DimsoConfig(**meta["config"]),
        training_log=np.asarray(arrays[f"{prefix}training_log"]),
    )


def save_model(model: DimsoModel, path) -> None:
    """Write the model as an .npz archive; metadata is JSON under the ``__meta__`` key.

    Adam moments are not stored: a loaded model can generate but
    restarting training from it begins with fresh optimizer state.
    """
    arrays, meta = model_arrays(model)
    meta["format"] = "dimso-model"
    meta["version"] = MODEL_FORMAT_VERSION
    with open(path, "wb") as fh:
        np.savez(fh, __meta__=np.array(json.dumps(meta)), **arrays)


def load_model(path) -> DimsoModel:
    with np.load(Path(path), allow_pickle=False) as data:
        meta = json.loads(str(data["__meta__"]))
        if meta.get("format") != "dimso-model":
            raise ValueError(f"{path} is not a DiMSO model file")
        if meta.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {meta.get('version')}")
        return model_from_arrays(data, meta)
