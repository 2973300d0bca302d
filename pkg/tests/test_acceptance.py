"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
"""

import time

import numpy as np
import pytest

from cctsne import affinities, baseline, classifier, metrics, optimizer, synthetic
from cctsne import io_formats
from cctsne.types import ClassProbabilityMatrix, FeatureMatrix, Hyperparams

# wall-clock bookkeeping for the synthetic-reproduction family (budget: 2 min)
SYNTH_BUDGET_SECONDS = 120.0
_synth_elapsed: dict[str, float] = {}


def report(name: str, ok: bool, detail: str = ""):
    line = f"{'PASS' if ok else 'FAIL'}  {name}"
    if detail:
        line += f"  [{detail}]"
    print(line)
    assert ok, line


def timed(key):
    class _Timer:
        def __enter__(self):
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, *exc):
            _synth_elapsed[key] = _synth_elapsed.get(key, 0.0) + time.perf_counter() - self.t0

    return _Timer()


# ---------------------------------------------------------------- criterion 1


def test_gradient_fidelity():
    """Analytic gradients match central finite differences on random instances."""
    rng = np.random.default_rng(2024)
    eps = 1e-5
    worst = 0.0
    t0 = time.perf_counter()
    combos = [(a, lam) for a in (0.0, 0.3, 1.0) for lam in (0.1, 0.5)]
    for trial in range(25):
        n = int(rng.integers(3, 9))
        m = int(rng.integers(2, 5))
        alpha, lam = combos[trial % len(combos)]
        Y = rng.normal(scale=2.0, size=(n, 2))
        V = rng.normal(scale=2.0, size=(m, 2))
        cond = rng.random((n, n))
        np.fill_diagonal(cond, 0.0)
        cond /= cond.sum(axis=1, keepdims=True)
        Pd = (cond + cond.T) / (2 * n)
        Pc = rng.dirichlet(np.ones(m), size=n)

        g_pts = optimizer.grad_data_points(Pd, Pc, Y, V, alpha, lam)
        fd_pts = np.zeros_like(Y)
        for i in range(n):
            for c in range(2):
                up, dn = Y.copy(), Y.copy()
                up[i, c] += eps
                dn[i, c] -= eps
                fd_pts[i, c] = (
                    optimizer.cost(Pd, Pc, up, V, alpha, lam).point_cost
                    - optimizer.cost(Pd, Pc, dn, V, alpha, lam).point_cost
                ) / (2 * eps)
        worst = max(worst, float(np.max(np.abs(g_pts - fd_pts) / np.maximum(np.abs(fd_pts), 1e-8))))

        g_lm = optimizer.grad_landmarks(Pc, Y, V, lam)
        fd_lm = np.zeros_like(V)
        for u in range(m):
            for c in range(2):
                up, dn = V.copy(), V.copy()
                up[u, c] += eps
                dn[u, c] -= eps
                fd_lm[u, c] = (
                    optimizer.cost(Pd, Pc, Y, up, alpha, lam).landmark_cost
                    - optimizer.cost(Pd, Pc, Y, dn, alpha, lam).landmark_cost
                ) / (2 * eps)
        worst = max(worst, float(np.max(np.abs(g_lm - fd_lm) / np.maximum(np.abs(fd_lm), 1e-8))))
    elapsed = time.perf_counter() - t0
    report(
        "gradient fidelity (25 random instances, fd step 1e-5)",
        worst <= 1e-4 and elapsed < 10.0,
        f"max rel err {worst:.2e}, {elapsed:.1f}s",
    )


# ---------------------------------------------------------------- criterion 2


def test_vanilla_equivalence():
    """At alpha=0 the point trajectory equals plain t-SNE bit for bit."""
    rng = np.random.default_rng(7)
    X = FeatureMatrix.validate(
        np.vstack([rng.normal(loc=(0, 0, 0), size=(40, 3)), rng.normal(loc=(5, 5, 5), size=(40, 3))])
    )
    T = ClassProbabilityMatrix.validate(rng.dirichlet(np.ones(3), size=80))
    p_pair, _ = affinities.joint_affinities(X, 15.0)
    p_class = affinities.class_affinities(T)
    h = Hyperparams(alpha=0.0, n_iter=200, seed=99)

    ours = []
    optimizer.run(p_pair.values, p_class, h, callback=lambda s: ours.append(s.points.copy()))
    vanilla = []
    baseline.run_vanilla(p_pair.values, h, callback=lambda k, y: vanilla.append(y.copy()))

    same = len(ours) == len(vanilla) == 200 and all(
        np.array_equal(a, b) for a, b in zip(ours, vanilla)
    )
    report("vanilla equivalence (alpha=0, 200 iterations, bit-for-bit)", same)


# ---------------------------------------------------------------- criterion 3


def test_analytic_lambda_limit():
    """alpha=1, lambda=50, fixed landmarks: point converges to the mass midpoint."""
    V = np.array([[0.0, 0.0], [4.0, 0.0], [2.0, 3.0]])  # triangle vertices
    Pc = np.array([[0.5, 0.5, 0.0]])
    lam = 50.0
    y = np.array([[2.5, 2.0]])
    # small-step descent keeps the stiff quadratic pull stable (curvature ~ 2*lam/m)
    for _ in range(5000):
        g = optimizer.grad_data_points(np.zeros((1, 1)), Pc, y, V, 1.0, lam)
        y = y - 0.01 * g
    midpoint = 0.5 * (V[0] + V[1])
    err = float(np.linalg.norm(y[0] - midpoint))
    report("analytic lambda-limit (midpoint of the two class landmarks)", err <= 1e-2, f"|y - midpoint| = {err:.2e}")


# ------------------------------------------------- criterion 4 (synthetic)


@pytest.fixture(scope="module")
def synth_pipeline():
    with timed("pipeline"):
        features, labels = synthetic.generate(0)
        train_idx, test_idx = classifier.stratified_split(labels, 0.3, seed=0)
        model = classifier.train(
            features.values[train_idx], labels[train_idx], classifier.TrainConfig(seed=0)
        )
        test_accuracy = classifier.accuracy(model, features.values[test_idx], labels[test_idx])
        probs = classifier.predict_proba(model, features.values)
        p_pair, _ = affinities.joint_affinities(features, 30.0)
        p_class = affinities.class_affinities(probs)
    return {
        "features": features,
        "labels": labels,
        "probs": probs,
        "test_accuracy": test_accuracy,
        "p_pair": p_pair.values,
        "p_class": p_class,
        "predicted": np.argmax(probs.values, axis=1),
    }


def test_synthetic_a_classifier_accuracy(synth_pipeline):
    acc = synth_pipeline["test_accuracy"]
    report("synthetic (a): classifier test accuracy in [0.76, 0.92]", 0.76 <= acc <= 0.92, f"{acc:.4f}")


def test_synthetic_b_landmark_geometry(synth_pipeline):
    with timed("b"):
        h = Hyperparams(alpha=1.0, penalty_weight=0.5, n_iter=1000, seed=0)
        state, _ = optimizer.run(synth_pipeline["p_pair"], synth_pipeline["p_class"], h)
    predicted = synth_pipeline["predicted"]
    d2 = ((state.points[:, None, :] - state.landmarks[None, :, :]) ** 2).sum(axis=2)
    frac_nearest = float((d2.argmin(axis=1) == predicted).mean())
    V = state.landmarks
    d01 = float(np.linalg.norm(V[0] - V[1]))
    d13 = float(np.linalg.norm(V[1] - V[3]))
    report(
        "synthetic (b): alpha=1 geometry (nearest landmark, confused 0/1)",
        frac_nearest >= 0.90 and d01 < d13,
        f"nearest-match {frac_nearest:.3f}, d(0,1)={d01:.2f} < d(1,3)={d13:.2f}",
    )


def test_synthetic_c_ccm_non_increasing(synth_pipeline):
    alphas = [0.0, 0.25, 0.5, 0.75, 1.0]
    with timed("c"):
        rows = []
        for seed in range(5):
            h = Hyperparams(penalty_weight=0.5, n_iter=1000, seed=seed)
            states = optimizer.sweep_alpha(synth_pipeline["p_pair"], synth_pipeline["p_class"], h, alphas)
            rows.append([metrics.ccm(s.points, synth_pipeline["predicted"]) for s in states])
    med = np.median(np.array(rows), axis=0)
    ok = all(med[k + 1] <= med[k] + 0.02 for k in range(len(alphas) - 1))
    report(
        "synthetic (c): median CCM non-increasing along the alpha sweep (5 seeds)",
        ok,
        "medians " + ", ".join(f"{v:.4f}" for v in med),
    )


def test_synthetic_d_lambda_sweep(synth_pipeline):
    with timed("d"):
        spreads = {}
        for lam, lr in ((0.05, 200.0), (0.5, 200.0), (50.0, 20.0)):
            # lambda=50 needs a smaller step: momentum GD is unstable once
            # lr * 2*lambda/(n*m) nears 2*(1+mu)
            h = Hyperparams(alpha=1.0, penalty_weight=lam, n_iter=1000, learning_rate=lr, seed=0)
            state, _ = optimizer.run(synth_pipeline["p_pair"], synth_pipeline["p_class"], h)
            spreads[lam] = state
    center_005 = spreads[0.05].landmarks.mean(axis=0)
    center_05 = spreads[0.5].landmarks.mean(axis=0)
    far_005 = float(np.linalg.norm(spreads[0.05].points - center_005, axis=1).max())
    far_05 = float(np.linalg.norm(spreads[0.5].points - center_05, axis=1).max())

    state50 = spreads[50.0]
    V = state50.landmarks
    spread = max(
        float(np.linalg.norm(V[i] - V[j])) for i in range(len(V)) for j in range(len(V))
    )
    barycenters = synth_pipeline["probs"].values @ V
    max_dev = float(np.linalg.norm(state50.points - barycenters, axis=1).max())
    report(
        "synthetic (d): lambda sweep (drift at 0.05, barycenter collapse at 50)",
        far_005 > far_05 and max_dev <= 0.1 * spread,
        f"max dist {far_005:.2f} > {far_05:.2f}; dev {max_dev:.3f} <= {0.1 * spread:.3f}",
    )


def test_synthetic_runtime_budget():
    total = sum(_synth_elapsed.values())
    report(
        "synthetic family runtime < 2 min (n=408, K=1000)",
        total < SYNTH_BUDGET_SECONDS,
        f"{total:.1f}s across {sorted(_synth_elapsed)}",
    )


# ---------------------------------------------------------------- criterion 5


def test_method_vs_baseline(synth_pipeline, tmp_path):
    features = synth_pipeline["features"]
    probs = synth_pipeline["probs"]
    p_prob = baseline.class_space_affinities(probs, 30.0)
    reports = []
    for seed in range(5):
        h = Hyperparams(alpha=0.5, penalty_weight=0.5, n_iter=1000, seed=seed)
        state, _ = optimizer.run(synth_pipeline["p_pair"], synth_pipeline["p_class"], h)
        reports.append(
            metrics.MetricsReport(
                "cctsne", 0.5, seed,
                metrics.trustworthiness(features.values, state.points, 7),
                metrics.continuity(features.values, state.points, 7),
                metrics.ccm(state.points, synth_pipeline["predicted"]), 7,
            )
        )
        pts, _ = baseline.run_baseline(synth_pipeline["p_pair"], p_prob.values, h)
        reports.append(
            metrics.MetricsReport(
                "baseline", 0.5, seed,
                metrics.trustworthiness(features.values, pts, 7),
                metrics.continuity(features.values, pts, 7),
                metrics.ccm(pts, synth_pipeline["predicted"]), 7,
            )
        )
    table = tmp_path / "comparison.csv"
    metrics.write_metrics_csv(reports, table)
    rows = metrics.read_metrics_csv(table)
    mt = {m: np.median([r.trustworthiness for r in rows if r.method == m]) for m in ("cctsne", "baseline")}
    mc = {m: np.median([r.continuity for r in rows if r.method == m]) for m in ("cctsne", "baseline")}
    report(
        "method-vs-baseline: median M_t and M_c at alpha=0.5 (5 seeds)",
        mt["cctsne"] >= mt["baseline"] and mc["cctsne"] >= mc["baseline"],
        f"M_t {mt['cctsne']:.4f} vs {mt['baseline']:.4f}; M_c {mc['cctsne']:.4f} vs {mc['baseline']:.4f}",
    )


# ---------------------------------------------------------------- criterion 6


def test_metric_oracles():
    from tests_oracles import oracle_ccm, oracle_trustworthiness  # local helper module

    rng = np.random.default_rng(11)
    exact = True
    for _ in range(20):
        X = rng.normal(size=(50, 4))
        Y = rng.normal(size=(50, 2))
        labels = rng.integers(0, 4, size=50)
        if metrics.trustworthiness(X, Y, 7) != oracle_trustworthiness(X, Y, 7):
            exact = False
        if metrics.continuity(X, Y, 7) != oracle_trustworthiness(Y, X, 7):
            exact = False
        if metrics.ccm(Y, labels) != oracle_ccm(Y, labels):
            exact = False
    identity = rng.normal(size=(40, 2))
    ident_ok = metrics.trustworthiness(identity, identity, 7) == 1.0
    ident_ok &= metrics.continuity(identity, identity, 7) == 1.0
    report(
        "metric oracles: exact match on 20 random instances; identity scores 1.0",
        exact and ident_ok,
    )


# ---------------------------------------------------------------- criterion 7


def test_complexity_scaling():
    def per_iter_seconds(n, iters=30, repeats=3):
        rng = np.random.default_rng(0)
        cond = rng.random((n, n))
        np.fill_diagonal(cond, 0.0)
        cond /= cond.sum(axis=1, keepdims=True)
        P = (cond + cond.T) / (2 * n)
        Pc = rng.dirichlet(np.ones(4), size=n)
        h = Hyperparams(alpha=0.5, n_iter=iters, seed=0)
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            optimizer.run(P, Pc, h)
            best = min(best, (time.perf_counter() - t0) / iters)
        return best

    t500 = per_iter_seconds(500)
    t1000 = per_iter_seconds(1000)
    ratio = t1000 / t500
    report(
        "complexity: doubling n (500 -> 1000) scales per-iteration time by [3, 8]",
        3.0 <= ratio <= 8.0,
        f"{t500 * 1e3:.2f} ms -> {t1000 * 1e3:.2f} ms, ratio {ratio:.2f}",
    )


# ---------------------------------------------------------------- criterion 8


@pytest.mark.slow
def test_large_ingestion_smoke(tmp_path):
    """4000x784 features + 4000x10 probabilities ingest and run at alpha=0.5."""
    rng = np.random.default_rng(0)
    n, d, m = 4000, 784, 10
    centers = rng.normal(scale=2.0, size=(m, d))
    X = centers[np.arange(n) % m] + rng.normal(size=(n, d))
    T = rng.dirichlet(np.ones(m), size=n)

    feat_path = tmp_path / "features.csv"
    io_formats.save_features_csv(FeatureMatrix.validate(X), feat_path)
    probs_path = tmp_path / "probs.csv"
    io_formats.save_probabilities_csv(ClassProbabilityMatrix.validate(T), probs_path)

    features = io_formats.load_features(feat_path)
    probs = io_formats.load_probabilities(probs_path)
    assert features.values.shape == (n, d)
    assert probs.values.shape == (n, m)

    p_pair, _ = affinities.joint_affinities(features, 30.0)
    p_class = affinities.class_affinities(probs)
    h = Hyperparams(alpha=0.5, penalty_weight=0.25, n_iter=50, seed=0)
    state, trace = optimizer.run(p_pair.values, p_class, h)
    finite = bool(np.all(np.isfinite(state.points)) and np.all(np.isfinite(state.landmarks)))
    report(
        "ingestion smoke: 4000x784 + 4000x10 CSV run at alpha=0.5 without divergence",
        finite and len(trace) == 50,
    )
