"""Synthetic tabular data by mapping Gaussian noise onto per-class target distributions."""

__version__ = "0.1.0"

from .data import Dataset, Standardizer, load_csv, make_toy, stratified_kfold, write_csv
from .errors import DataError, PreconditionError
from .evaluation import EvalReport, balanced_accuracy, run_protocol
from .generator import DimsoConfig, DimsoModel, fit, fit_until_similarity, generate, load_model, save_model
from .losses import LossKind
from .metrics import SimilarityReport, mean_nn, mmd, per_class_similarity, wasserstein_distance
from .pca import PcaModel, pca_fit, pca_inverse, pca_transform
from .smote import SmoteConfig, smote_generate

__all__ = [
    "DataError", "Dataset", "DimsoConfig", "DimsoModel", "EvalReport", "LossKind", "PcaModel",
    "PreconditionError", "SimilarityReport", "SmoteConfig", "Standardizer", "balanced_accuracy",
    "fit", "fit_until_similarity", "generate", "load_csv", "load_model", "make_toy", "mean_nn", "mmd",
    "pca_fit", "pca_inverse", "pca_transform", "per_class_similarity", "run_protocol", "save_model",
    "smote_generate", "stratified_kfold", "wasserstein_distance", "write_csv",
]
