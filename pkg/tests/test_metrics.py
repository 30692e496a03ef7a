import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dimso.metrics import SimilarityReport, mean_nn, mmd, per_class_similarity, wasserstein_distance
from oracles import mean_nn_brute, mmd_brute, wasserstein_1d_brute

coords = st.floats(-5, 5, allow_nan=False, width=64)


def sample(rows, d=2):
    return arrays(np.float64, (rows, d), elements=coords)


def test_wd_identical_is_zero():
    U = np.random.default_rng(0).normal(size=(10, 3))
    assert wasserstein_distance(U, U) == 0.0


def test_wd_hand_example():
    assert wasserstein_distance([[0.0], [1.0]], [[1.0], [2.0]]) == pytest.approx(1.0)


@pytest.mark.parametrize("shift", [-2.5, 0.3, 7.0])
def test_wd_translation(shift):
    u = np.random.default_rng(1).normal(size=(15, 1))
    assert wasserstein_distance(u, u + shift) == pytest.approx(abs(shift), abs=1e-12)
    assert wasserstein_1d_brute(u[:, 0], u[:, 0] + shift) == pytest.approx(abs(shift), abs=1e-12)


def test_wd_is_mean_over_features():
    rng = np.random.default_rng(2)
    U, V = rng.normal(size=(8, 3)), rng.normal(size=(11, 3))
    per_col = [wasserstein_1d_brute(U[:, j], V[:, j]) for j in range(3)]
    assert wasserstein_distance(U, V) == pytest.approx(np.mean(per_col), abs=1e-12)


def test_mmd_identical_is_zero():
    U = np.random.default_rng(3).normal(size=(12, 2))
    assert mmd(U, U) == 0.0


def test_mmd_small_case_matches_brute_force():
    U = np.array([[0.0, 1.0], [2.0, -1.0]])
    V = np.array([[1.0, 1.0], [0.5, 3.0]])
    assert mmd(U, V) == pytest.approx(mmd_brute(U, V), abs=1e-12)


def test_mmd_degenerate_pool_uses_unit_gamma():
    U = np.zeros((3, 2))
    assert mmd(U, U) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.data())
def test_mmd_symmetric(m, n, data):
    U = data.draw(sample(m))
    V = data.draw(sample(n))
    assert mmd(U, V) == pytest.approx(mmd(V, U), abs=1e-12)


def test_mean_nn_subset_is_zero():
    U = np.random.default_rng(4).normal(size=(9, 3))
    assert mean_nn(U, U[[1, 5, 7]]) == 0.0


def test_mean_nn_345():
    assert mean_nn([[0.0, 0.0]], [[3.0, 4.0]]) == 5.0


def test_mean_nn_asymmetry_witness():
    # exhaustive search over 3-point sets on a small 1-D grid
    grid = [0.0, 1.0, 3.0]
    for U in itertools.product(grid, repeat=3):
        for V in itertools.product(grid, repeat=3):
            u, v = np.array(U)[:, None], np.array(V)[:, None]
            if mean_nn(u, v) != mean_nn(v, u):
                assert mean_nn_brute(u, v) != mean_nn_brute(v, u)
                return
    pytest.fail("no asymmetric pair found")


@settings(max_examples=40, deadline=None)
@given(sample(6, 3), sample(4, 3), st.permutations(range(6)), st.permutations(range(4)))
def test_mean_nn_permutation_consistent(U, V, pu, pv):
    assert mean_nn(U, V) == pytest.approx(mean_nn(U[list(pu)], V[list(pv)]), abs=1e-12)
    assert mean_nn(U, V) == pytest.approx(mean_nn_brute(U, V), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(sample(7, 2), sample(5, 2), arrays(np.float64, (2,), elements=coords))
def test_translation_invariance(U, V, shift):
    assert mmd(U + shift, V + shift) == pytest.approx(mmd(U, V), abs=1e-9)
    assert mean_nn(U + shift, V + shift) == pytest.approx(mean_nn(U, V), abs=1e-9)
    assert wasserstein_distance(U + shift, V + shift) == pytest.approx(wasserstein_distance(U, V), abs=1e-9)


@pytest.mark.parametrize("fn", [wasserstein_distance, mmd, mean_nn])
def test_metrics_reject_empty_and_mismatch(fn):
    with pytest.raises(ValueError):
        fn(np.zeros((0, 2)), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        fn(np.zeros((3, 2)), np.zeros((3, 3)))


def test_per_class_identical_is_zero():
    rng = np.random.default_rng(5)
    X, y = rng.normal(size=(20, 2)), np.repeat([0, 1], 10)
    report = per_class_similarity(X, y, X, y)
    assert report.wd == report.mmd == report.mean_nn == 0.0


def test_per_class_is_unweighted_mean():
    rng = np.random.default_rng(6)
    X, y = rng.normal(size=(30, 2)), np.repeat([0, 1], [20, 10])
    Xs, ys = rng.normal(size=(8, 2)), np.repeat([0, 1], 4)
    report = per_class_similarity(X, y, Xs, ys)
    a = wasserstein_distance(X[y == 0], Xs[ys == 0])
    b = wasserstein_distance(X[y == 1], Xs[ys == 1])
    assert report.wd == pytest.approx((a + b) / 2)
    assert report.per_class[1][0] == pytest.approx(b)


def test_per_class_single_class_matches_plain_metrics():
    rng = np.random.default_rng(7)
    X, Xs = rng.normal(size=(12, 3)), rng.normal(size=(9, 3))
    report = per_class_similarity(X, np.zeros(12), Xs, np.zeros(9))
    assert (report.wd, report.mmd, report.mean_nn) == (wasserstein_distance(X, Xs), mmd(X, Xs), mean_nn(X, Xs))


def test_per_class_missing_synthetic_class():
    X, y = np.zeros((4, 1)), np.array([0, 0, 1, 1])
    with pytest.raises(ValueError, match="class 1"):
        per_class_similarity(X, y, X[:2], y[:2])


def test_report_round_trip():
    r = SimilarityReport(0.1, 0.2, 0.3, {0: (0.1, 0.2, 0.3)})
    d = r.to_dict()
    assert set(d) == {"wd", "mmd", "mean_nn", "per_class"}
    back = SimilarityReport.from_dict(d)
    assert back.mmd == 0.2 and back.per_class["0"] == (0.1, 0.2, 0.3)
