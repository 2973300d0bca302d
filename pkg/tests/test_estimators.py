import numpy as np
import pytest
from sklearn.base import clone

from cctsne import ClassConstrainedTSNE, CombinedKLBaseline
from cctsne.errors import DimensionMismatch


@pytest.fixture(scope="module")
def small_data():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(loc=(0, 0), size=(15, 2)), rng.normal(loc=(8, 8), size=(15, 2))])
    T = np.zeros((30, 2))
    T[:15] = (0.85, 0.15)
    T[15:] = (0.1, 0.9)
    # jitter so probability rows are distinct (duplicate rows cannot be
    # perplexity-calibrated in the probability space the baseline uses)
    T = np.abs(T + rng.normal(scale=0.02, size=T.shape))
    T /= T.sum(axis=1, keepdims=True)
    return X, T


def test_get_params_round_trip():
    est = ClassConstrainedTSNE(alpha=0.7, penalty_weight=0.4, n_iter=50)
    params = est.get_params()
    assert params["alpha"] == 0.7
    assert params["penalty_weight"] == 0.4
    rebuilt = ClassConstrainedTSNE(**params)
    assert rebuilt.get_params() == params
    cloned = clone(est)
    assert cloned.get_params() == params


def test_fit_transform_shapes(small_data):
    X, T = small_data
    est = ClassConstrainedTSNE(alpha=0.5, n_iter=60, perplexity=8.0, random_state=1)
    Y = est.fit_transform(X, T)
    assert Y.shape == (30, 2)
    assert est.landmarks_.shape == (2, 2)
    assert len(est.cost_trace_) == 60
    assert est.class_names_ == ("c0", "c1")
    assert np.all(np.isfinite(Y))


def test_fit_deterministic_per_random_state(small_data):
    X, T = small_data
    a = ClassConstrainedTSNE(n_iter=40, perplexity=8.0, random_state=3).fit_transform(X, T)
    b = ClassConstrainedTSNE(n_iter=40, perplexity=8.0, random_state=3).fit_transform(X, T)
    assert np.array_equal(a, b)


def test_warm_start_via_fit_init(small_data):
    X, T = small_data
    est = ClassConstrainedTSNE(alpha=0.0, n_iter=40, perplexity=8.0, random_state=5)
    est.fit(X, T)
    first = est.state_
    warm = ClassConstrainedTSNE(alpha=0.5, n_iter=40, perplexity=8.0, random_state=5)
    warm.fit(X, T, init=first)
    assert warm.embedding_.shape == (30, 2)
    assert not np.array_equal(warm.embedding_, first.points)


def test_baseline_estimator(small_data):
    X, T = small_data
    est = CombinedKLBaseline(alpha=0.5, n_iter=50, perplexity=8.0, random_state=2)
    Y = est.fit_transform(X, T)
    assert Y.shape == (30, 2)
    assert not hasattr(est, "landmarks_")
    assert len(est.cost_trace_) == 50


def test_dimension_mismatch_rejected(small_data):
    X, T = small_data
    with pytest.raises(DimensionMismatch):
        ClassConstrainedTSNE(n_iter=5, perplexity=8.0).fit(X, T[:-1])
