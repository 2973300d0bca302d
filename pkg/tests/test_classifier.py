import numpy as np
import pytest

from cctsne import classifier
from cctsne.errors import DimensionMismatch, EmptySet, SingleClassTrainingSet
from cctsne.types import ClassProbabilityMatrix


def two_blobs(seed, n_per=40, gap=6.0):
    rng = np.random.default_rng(seed)
    X = np.vstack([
        rng.normal(loc=(0.0, 0.0), size=(n_per, 2)),
        rng.normal(loc=(gap, gap), size=(n_per, 2)),
    ])
    y = np.array([0] * n_per + [1] * n_per)
    return X, y


def test_separable_blobs_high_training_accuracy():
    X, y = two_blobs(0)
    model = classifier.train(X, y, classifier.TrainConfig(seed=0, epochs=100))
    assert classifier.accuracy(model, X, y) >= 0.95


def test_training_deterministic():
    X, y = two_blobs(1)
    cfg = classifier.TrainConfig(seed=3, epochs=30)
    a = classifier.train(X, y, cfg)
    b = classifier.train(X, y, cfg)
    assert np.array_equal(a.w_hidden, b.w_hidden)
    assert np.array_equal(a.w_out, b.w_out)
    assert np.array_equal(a.b_hidden, b.b_hidden)
    assert np.array_equal(a.b_out, b.b_out)


def test_incremental_beats_cold_half():
    # updating with the second half should not lose what the first half taught
    accuracies = {"cold": [], "incremental": []}
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        X, y = two_blobs(seed, n_per=60, gap=2.5)
        order = rng.permutation(len(y))
        X, y = X[order], y[order]
        X_test, y_test = two_blobs(1000 + seed, n_per=40, gap=2.5)
        half = len(y) // 2
        cfg = classifier.TrainConfig(seed=seed, epochs=60)
        cold = classifier.train(X[:half], y[:half], cfg)
        updated = classifier.train(X[half:], y[half:], cfg, init=cold)
        accuracies["cold"].append(classifier.accuracy(cold, X_test, y_test))
        accuracies["incremental"].append(classifier.accuracy(updated, X_test, y_test))
    assert np.median(accuracies["incremental"]) >= np.median(accuracies["cold"])


def test_single_class_training_rejected():
    X = np.random.default_rng(0).normal(size=(10, 2))
    with pytest.raises(SingleClassTrainingSet):
        classifier.train(X, np.zeros(10, dtype=int))


def test_zero_weight_model_uniform_probabilities():
    model = classifier.MlpModel(
        w_hidden=np.zeros((3, 4)), b_hidden=np.zeros(4),
        w_out=np.zeros((4, 5)), b_out=np.zeros(5),
    )
    probs = classifier.predict_proba(model, np.random.default_rng(0).normal(size=(6, 3)))
    assert np.allclose(probs.values, 0.2)


def test_probability_rows_sum_to_one():
    X, y = two_blobs(2)
    model = classifier.train(X, y, classifier.TrainConfig(seed=0, epochs=20))
    probs = classifier.predict_proba(model, X)
    assert isinstance(probs, ClassProbabilityMatrix)
    assert np.allclose(probs.values.sum(axis=1), 1.0, atol=1e-9)


def test_predict_matches_argmax_and_self_consistency():
    X, y = two_blobs(3)
    model = classifier.train(X, y, classifier.TrainConfig(seed=1, epochs=40))
    probs = classifier.predict_proba(model, X)
    predicted = classifier.predict(model, X)
    assert np.array_equal(predicted, np.argmax(probs.values, axis=1))
    assert classifier.accuracy(model, X, predicted) == 1.0


def test_dimension_mismatch_rejected():
    X, y = two_blobs(4)
    model = classifier.train(X, y, classifier.TrainConfig(seed=0, epochs=5))
    with pytest.raises(DimensionMismatch):
        classifier.predict_proba(model, np.zeros((3, 5)))


def test_constant_model_on_balanced_data_scores_one_over_m():
    rng = np.random.default_rng(5)
    m = 4
    model = classifier.MlpModel(
        w_hidden=np.zeros((2, 4)), b_hidden=np.zeros(4),
        w_out=np.zeros((4, m)), b_out=np.array([10.0, 0.0, 0.0, 0.0]),
    )
    X = rng.normal(size=(400, 2))
    y = np.repeat(np.arange(m), 100)
    assert classifier.accuracy(model, X, y) == pytest.approx(1.0 / m, abs=0.01)


def test_empty_test_set_rejected():
    X, y = two_blobs(6)
    model = classifier.train(X, y, classifier.TrainConfig(seed=0, epochs=5))
    with pytest.raises(EmptySet):
        classifier.accuracy(model, X[:0], y[:0])


def test_alpha_schedule():
    assert classifier.alpha_for(0.0) == 0.0
    assert classifier.alpha_for(1.0) == 1.0
    values = [classifier.alpha_for(a) for a in np.linspace(0, 1, 11)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert classifier.alpha_for(0.74) == pytest.approx(0.74 ** 2)


def test_model_save_load_round_trip(tmp_path):
    X, y = two_blobs(7)
    model = classifier.train(X, y, classifier.TrainConfig(seed=0, epochs=10))
    path = tmp_path / "model.npz"
    classifier.save_model(model, path)
    back = classifier.load_model(path)
    assert np.array_equal(back.w_hidden, model.w_hidden)
    assert np.array_equal(back.b_out, model.b_out)


def test_stratified_split_covers_all_and_respects_fraction():
    labels = np.array([0] * 70 + [1] * 30)
    train, test = classifier.stratified_split(labels, 0.3, seed=1)
    assert sorted(np.concatenate([train, test]).tolist()) == list(range(100))
    assert len(test) == 30
    assert np.bincount(labels[test]).tolist() == [21, 9]
