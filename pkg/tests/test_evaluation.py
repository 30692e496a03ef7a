import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from dimso.data import Dataset, make_toy, stratified_kfold
from dimso.evaluation import (
    GaussianNB, GeneratorOutput, balanced_accuracy, predict, run_protocol, train_gnb, train_mlp_classifier,
)
from dimso.generator import DimsoConfig

FAST = DimsoConfig(epochs=40, samples_per_class=40)


def test_bac_perfect():
    assert balanced_accuracy([0, 1, 2, 1], [0, 1, 2, 1]) == 1.0


def test_bac_hand_confusion():
    # class 0 recall 4/4, class 1 recall 1/2
    assert balanced_accuracy([0, 0, 0, 0, 1, 1], [0, 0, 0, 0, 1, 0]) == 0.75


def test_bac_constant_predictor():
    y = np.repeat([0, 1], [95, 5])
    assert balanced_accuracy(y, np.zeros(100)) == 0.5


def test_bac_errors():
    with pytest.raises(ValueError):
        balanced_accuracy([0, 1], [0])
    with pytest.raises(ValueError):
        balanced_accuracy([], [])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=30).flatmap(
    lambda t: st.tuples(st.just(t), st.lists(st.integers(0, 3), min_size=len(t), max_size=len(t)), st.permutations(range(4)))))
def test_bac_relabel_invariant(case):
    y_true, y_pred, perm = case
    perm = np.array(perm)
    assert balanced_accuracy(y_true, y_pred) == pytest.approx(balanced_accuracy(perm[y_true], perm[y_pred]))


def test_gnb_separated_classes():
    rng = np.random.default_rng(0)
    X = np.r_[rng.normal(0, 1, 50), rng.normal(10, 1, 50)][:, None]
    y = np.repeat([0, 1], 50)
    X_test = np.r_[rng.normal(0, 1, 20), rng.normal(10, 1, 20)][:, None]
    clf = train_gnb(X, y)
    assert balanced_accuracy(np.repeat([0, 1], 20), predict(clf, X_test)) == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_gnb_matches_density_oracle(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(10, 2))
    y = np.array([0, 0, 0, 1, 1, 1, 1, 2, 2, 2])
    clf = GaussianNB().fit(X, y)
    eps = 1e-9 * X.var(axis=0).max()
    queries = rng.normal(size=(5, 2))
    for q, got in zip(queries, clf.predict(queries)):
        scores = []
        for c in (0, 1, 2):
            Xc = X[y == c]
            logp = np.log(len(Xc) / len(X))
            for j in range(2):
                logp += stats.norm.logpdf(q[j], Xc[:, j].mean(), np.sqrt(Xc[:, j].var() + eps))
            scores.append(logp)
        assert got == int(np.argmax(scores))


def test_gnb_tie_goes_to_lowest_label():
    X = np.array([[-1.0], [1.0], [-1.0], [1.0]])
    clf = GaussianNB().fit(X, np.array([3, 3, 7, 7]))
    assert clf.predict(np.array([[0.0]]))[0] == 3


def test_mlp_on_separable_blobs():
    scores = []
    for seed in range(5):
        ds = make_toy("blobs", 200, seed=seed, priors=(0.5, 0.5), center_box=(-6, 6))
        folds = stratified_kfold(ds.y, 5, seed)
        train, test = folds[0]
        mu, sd = ds.X[train].mean(0), ds.X[train].std(0)
        clf = train_mlp_classifier((ds.X[train] - mu) / sd, ds.y[train], seed=seed)
        scores.append(balanced_accuracy(ds.y[test], predict(clf, (ds.X[test] - mu) / sd)))
    assert np.median(scores) >= 0.95


def test_mlp_is_deterministic():
    ds = make_toy("moons", 60, seed=0)
    a = train_mlp_classifier(ds.X, ds.y, seed=2)
    b = train_mlp_classifier(ds.X, ds.y, seed=2)
    assert np.array_equal(a.predict(ds.X), b.predict(ds.X))
    assert a.loss_curve_[-1] < a.loss_curve_[0]


@pytest.fixture(scope="module")
def blobs():
    return make_toy("blobs", 150, seed=1, priors=(0.8, 0.2))


@pytest.mark.parametrize("clf", ["gnb", "mlp"])
def test_identity_generator_gives_zero_delta(blobs, clf):
    report = run_protocol(blobs, "identity", clf, seed=0)
    assert [f.delta_q for f in report.folds] == [0.0] * 5
    assert all(f.similarity.mean_nn == 0.0 for f in report.folds)


def test_report_structure_and_aggregates(blobs):
    report = run_protocol(blobs, "smote", "gnb", k=4, seed=2)
    assert len(report.folds) == 4
    d = report.to_dict()
    assert d["k"] == 4 and [f["fold"] for f in d["folds"]] == [0, 1, 2, 3]
    deltas = [f.delta_q for f in report.folds]
    assert d["aggregates"]["delta_q"]["mean"] == pytest.approx(np.mean(deltas))
    assert d["aggregates"]["delta_q"]["std"] == pytest.approx(np.std(deltas))
    for f in report.folds:
        assert 0 <= f.bac_real <= 1 and 0 <= f.bac_syn <= 1 and -1 <= f.delta_q <= 1
    json.dumps(d)


def test_pca_pipeline(blobs):
    ds = make_toy("blobs", 150, seed=3, priors=(0.6, 0.4), n_features=5)
    report = run_protocol(ds, "dimso-rae", "gnb", pipeline="pca", seed=0, dimso_config=FAST)
    for f in report.folds:
        assert f.pca is not None and f.pca.n_features == 5
        assert f.generator_model.n_features == f.pca.n_components
        assert f.loss_log.shape == (FAST.epochs, 2)


def test_protocol_is_deterministic(blobs):
    a = run_protocol(blobs, "dimso-wc", "gnb", seed=5, dimso_config=FAST).to_dict()
    b = run_protocol(blobs, "dimso-wc", "gnb", seed=5, dimso_config=FAST).to_dict()
    assert a == b


def _fitted_params(fold):
    parts = [fold.standardizer.mean, fold.standardizer.scale]
    if fold.pca is not None:
        parts += [fold.pca.mean, fold.pca.components]
    parts += [p for net in fold.generator_model.networks for p in net.parameters()]
    return parts


@pytest.mark.parametrize("pipeline", ["raw", "pca"])
def test_no_test_fold_leakage(pipeline):
    ds = make_toy("blobs", 100, seed=4, priors=(0.7, 0.3), n_features=3)
    folds = stratified_kfold(ds.y, 5, seed=0)
    base = run_protocol(ds, "dimso-rae", "gnb", pipeline=pipeline, dimso_config=FAST, folds=folds)
    train, test = folds[2]
    X = ds.X.copy()
    X[test] = np.random.default_rng(9).normal(50, 20, size=X[test].shape)
    mutated = run_protocol(Dataset(X, ds.y), "dimso-rae", "gnb", pipeline=pipeline, dimso_config=FAST, folds=folds)
    for a, b in zip(_fitted_params(base.folds[2]), _fitted_params(mutated.folds[2])):
        assert np.array_equal(a, b)


def test_custom_generator_and_classifier(blobs):
    calls = []

    def flip(X, y, seed, **_):
        calls.append(seed)
        return GeneratorOutput(X, 1 - y)

    report = run_protocol(blobs, flip, lambda X, y, seed: GaussianNB().fit(X, y), seed=1)
    assert len(calls) == 5
    assert all(f.bac_syn < 0.5 for f in report.folds)


def test_unknown_specs(blobs):
    with pytest.raises(ValueError, match="unknown generator"):
        run_protocol(blobs, "ctgan", "gnb")
    with pytest.raises(ValueError, match="unknown classifier"):
        run_protocol(blobs, "identity", "svc")
    with pytest.raises(ValueError):
        run_protocol(blobs, "identity", "gnb", pipeline="umap")


def test_writers(tmp_path, blobs):
    report = run_protocol(blobs, "dimso-rae", "gnb", k=3, dimso_config=FAST)
    report.write_json(tmp_path / "r.json")
    report.write_fold_csv(tmp_path / "f.csv")
    report.write_loss_log(tmp_path / "l.csv")
    assert json.loads((tmp_path / "r.json").read_text())["generator"] == "dimso-rae"
    assert len((tmp_path / "f.csv").read_text().splitlines()) == 4
    assert len((tmp_path / "l.csv").read_text().splitlines()) == 1 + 3 * FAST.epochs * 2
