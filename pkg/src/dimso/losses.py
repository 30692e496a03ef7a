"""Randomized distribution-matching losses and their gradients w.r.t. the synthetic batch."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class LossKind(str, enum.Enum):
    RAE = "rae"
    W = "w"
    WC = "wc"

    @classmethod
    def parse(cls, value) -> LossKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown loss {value!r}; expected one of rae, w, wc") from None


@dataclass(frozen=True)
class PairingPlan:
    """Row pairing between a synthetic and a target batch.

    ``synthetic_idx[k]`` is matched with ``target_idx[k]``. Both index
    arrays have length ``min(n_synthetic, n_target)``.
    """

    synthetic_idx: np.ndarray
    target_idx: np.ndarray

    def __len__(self) -> int:
        return len(self.synthetic_idx)

    def check(self, n_synthetic: int, n_target: int) -> None:
        if len(self.synthetic_idx) != len(self.target_idx):
            raise ValueError("pairing sequences differ in length")
        if len(self.synthetic_idx) == 0:
            raise ValueError("empty pairing")
        for idx, bound, name in ((self.synthetic_idx, n_synthetic, "synthetic"), (self.target_idx, n_target, "target")):
            if idx.min() < 0 or idx.max() >= bound:
                raise ValueError(f"{name} index out of range [0, {bound})")

    @classmethod
    def identity(cls, n: int) -> PairingPlan:
        idx = np.arange(n)
        return cls(idx, idx.copy())


def draw_plan(n_synthetic: int, n_target: int, rng: np.random.Generator) -> PairingPlan:
    """Random pairing of m = min(n_synthetic, n_target) rows, sampled without replacement."""
    m = min(n_synthetic, n_target)
    return PairingPlan(
        rng.permutation(n_synthetic)[:m],
        rng.permutation(n_target)[:m],
    )


class PairingSchedule:
    """Source of per-step pairings over a fixed random row assignment.

    Every synthetic row is assigned a target row once, as evenly as
    possible (targets are reused only when there are more synthetic rows).
    Each call to `draw` picks a fresh random subset of assigned pairs in
    which neither side repeats, in shuffled order. Re-pairing rows
    independently at every step instead drives each output toward the
    coordinate-wise median of the target under the absolute-error loss.
    """

    def __init__(self, n_synthetic: int, n_target: int, rng: np.random.Generator):
        if n_synthetic < 1 or n_target < 1:
            raise ValueError("both batches need at least one row")
        self.n_synthetic = n_synthetic
        self.n_target = n_target
        reps = -(-n_synthetic // n_target)
        self.assignment = np.concatenate([rng.permutation(n_target) for _ in range(reps)])[:n_synthetic]

    def draw(self, rng: np.random.Generator) -> PairingPlan:
        if self.n_synthetic <= self.n_target:
            syn = rng.permutation(self.n_synthetic)
            return PairingPlan(syn, self.assignment[syn])
        # one synthetic row per target, chosen uniformly within each target's group
        keys = rng.random(self.n_synthetic)
        order = np.lexsort((keys, self.assignment))
        first = np.ones(len(order), dtype=bool)
        first[1:] = self.assignment[order][1:] != self.assignment[order][:-1]
        syn = order[first]
        shuffle = rng.permutation(len(syn))
        return PairingPlan(syn[shuffle], self.assignment[syn][shuffle])


def _validate(S: np.ndarray, T: np.ndarray, plan: PairingPlan) -> None:
    if S.ndim != 2 or T.ndim != 2 or S.shape[1] != T.shape[1]:
        raise ValueError(f"column mismatch between synthetic {S.shape} and target {T.shape}")
    plan.check(len(S), len(T))


def rae_loss(S: np.ndarray, T: np.ndarray, plan: PairingPlan) -> tuple[float, np.ndarray]:
    """Sum of absolute errors between randomly paired rows."""
    _validate(S, T, plan)
    diff = S[plan.synthetic_idx] - T[plan.target_idx]
    grad = np.zeros_like(S, dtype=np.float64)
    # plan indices are unique, so plain fancy assignment is safe
    grad[plan.synthetic_idx] = np.sign(diff)
    return float(np.abs(diff).sum()), grad


def wasserstein_loss(S: np.ndarray, T: np.ndarray, plan: PairingPlan) -> tuple[float, np.ndarray]:
    """Per-feature 1-D Wasserstein distance between the planned subsamples, summed over features."""
    _validate(S, T, plan)
    s_sub = S[plan.synthetic_idx]
    t_sub = T[plan.target_idx]
    m = len(plan)
    s_order = np.argsort(s_sub, axis=0, kind="stable")
    s_sorted = np.take_along_axis(s_sub, s_order, axis=0)
    t_sorted = np.sort(t_sub, axis=0, kind="stable")
    diff = s_sorted - t_sorted
    sub_grad = np.empty_like(s_sub)
    np.put_along_axis(sub_grad, s_order, np.sign(diff) / m, axis=0)
    grad = np.zeros_like(S, dtype=np.float64)
    grad[plan.synthetic_idx] = sub_grad
    return float(np.abs(diff).sum() / m), grad


def covariance_gap(S_sub: np.ndarray, T_sub: np.ndarray) -> tuple[float, np.ndarray]:
    """Elementwise L1 distance between the sample covariance matrices of two batches."""
    m = len(S_sub)
    if m < 2 or len(T_sub) < 2:
        raise ValueError("covariance needs at least two rows")
    if S_sub.shape[1] != T_sub.shape[1]:
        raise ValueError(f"column mismatch between {S_sub.shape} and {T_sub.shape}")
    s_c = S_sub - S_sub.mean(axis=0)
    t_c = T_sub - T_sub.mean(axis=0)
    gap = s_c.T @ s_c / (m - 1) - t_c.T @ t_c / (len(T_sub) - 1)
    # sign(gap) is symmetric, so both halves of d(s_c^T s_c) collapse into one term;
    # the centering term drops out because the columns of s_c sum to zero
    grad = (2.0 / (m - 1)) * s_c @ np.sign(gap)
    return float(np.abs(gap).sum()), grad


def wc_loss(S: np.ndarray, T: np.ndarray, plan: PairingPlan) -> tuple[float, np.ndarray]:
    """Average of the Wasserstein loss and the covariance gap on the planned subsamples."""
    w_value, w_grad = wasserstein_loss(S, T, plan)
    c_value, c_sub_grad = covariance_gap(S[plan.synthetic_idx], T[plan.target_idx])
    grad = 0.5 * w_grad
    grad[plan.synthetic_idx] += 0.5 * c_sub_grad
    return 0.5 * (w_value + c_value), grad


LOSSES = {
    LossKind.RAE: rae_loss,
    LossKind.W: wasserstein_loss,
    LossKind.WC: wc_loss,
}


def evaluate_loss(kind, S: np.ndarray, T: np.ndarray, plan: PairingPlan) -> tuple[float, np.ndarray]:
    return LOSSES[LossKind.parse(kind)](S, T, plan)
