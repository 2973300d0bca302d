"""Command-line entry point for batch experiments and the labeling service.

Exit codes are stable: 0 success, 2 validation/input error, 3 diverged
optimization, 4 port already in use. Logs go to stderr; data only to files.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import socket
import sys

import numpy as np

from . import affinities, baseline, classifier, io_formats, metrics, optimizer, synthetic
from .errors import CCTSNEError, NonFiniteUpdate
from .types import ClassProbabilityMatrix, EmbeddingState, FeatureMatrix, Hyperparams, validate_inputs

log = logging.getLogger("cctsne")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DIVERGED = 3
EXIT_PORT_IN_USE = 4


def _add_common_run_flags(p: argparse.ArgumentParser, with_alpha: bool = True) -> None:
    p.add_argument("--features", required=True, help="features CSV (rows = instances)")
    p.add_argument("--probs", required=True, help="class probability CSV with class-name header")
    if with_alpha:
        p.add_argument("--alpha", type=float, default=0.5, help="structure balance in [0, 1]")
    p.add_argument("--lambda", dest="penalty_weight", type=float, default=0.25,
                   help="distance penalty weight (> 0)")
    p.add_argument("--perplexity", type=float, default=30.0)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--lr", type=float, default=200.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--standardize", action="store_true", help="z-score feature columns")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cctsne", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_embed = sub.add_parser("embed", help="run one class-constrained embedding")
    _add_common_run_flags(p_embed)
    p_embed.add_argument("--init", help="warm-start from a previous embedding JSON")
    p_embed.add_argument("--out", required=True, help="output embedding JSON")
    p_embed.add_argument("--svg", help="optional scatter SVG")
    p_embed.set_defaults(func=cmd_embed)

    p_sweep = sub.add_parser("sweep", help="chained warm-started runs over an alpha schedule")
    _add_common_run_flags(p_sweep, with_alpha=False)
    p_sweep.add_argument("--alphas", default="0,0.25,0.5,0.75,1",
                         help="comma-separated alpha values, optimized in order")
    p_sweep.add_argument("--method", choices=["cctsne", "baseline"], default="cctsne")
    p_sweep.add_argument("--out-dir", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_metrics = sub.add_parser("metrics", help="score embedding files against the original data")
    p_metrics.add_argument("--features", required=True)
    p_metrics.add_argument("--probs", required=True)
    p_metrics.add_argument("--embeddings", nargs="+", required=True, help="embedding JSON files")
    p_metrics.add_argument("--k", type=int, default=metrics.DEFAULT_K)
    p_metrics.add_argument("--standardize", action="store_true")
    p_metrics.add_argument("--out", required=True, help="output metrics CSV")
    p_metrics.set_defaults(func=cmd_metrics)

    p_synth = sub.add_parser("synth", help="generate the synthetic dataset and classifier outputs")
    p_synth.add_argument("--out-dir", required=True)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(func=cmd_synth)

    p_serve = sub.add_parser("serve", help="start the interactive labeling service")
    p_serve.add_argument("--features", required=True)
    p_serve.add_argument("--probs")
    p_serve.add_argument("--labels", help="ground-truth labels CSV used as retrain test set")
    p_serve.add_argument("--standardize", action="store_true")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--iters", type=int, default=1000)
    p_serve.add_argument("--lr", type=float, default=200.0)
    p_serve.add_argument("--frame-every", type=int, default=10)
    p_serve.add_argument("--state-dir", default="cctsne_sessions")
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def _check_range(name: str, value: float, lo: float | None = None, hi: float | None = None,
                 strict_lo: bool = False) -> None:
    bad = (
        (lo is not None and (value <= lo if strict_lo else value < lo))
        or (hi is not None and value > hi)
    )
    if bad:
        raise CCTSNEError(f"{name} value {value} out of range")


def _hyperparams(args, alpha: float) -> Hyperparams:
    _check_range("--alpha", alpha, 0.0, 1.0)
    _check_range("--lambda", args.penalty_weight, 0.0, strict_lo=True)
    _check_range("--perplexity", args.perplexity, 2.0)
    _check_range("--iters", args.iters, 1)
    _check_range("--lr", args.lr, 0.0, strict_lo=True)
    return Hyperparams(
        alpha=alpha,
        penalty_weight=args.penalty_weight,
        perplexity=args.perplexity,
        n_iter=args.iters,
        learning_rate=args.lr,
        seed=args.seed,
    ).validated()


def _load_pair(args) -> tuple[FeatureMatrix, ClassProbabilityMatrix]:
    features = io_formats.load_features(args.features, standardize=args.standardize)
    probs = io_formats.load_probabilities(args.probs)
    return validate_inputs(features, probs)


def cmd_embed(args) -> int:
    features, probs = _load_pair(args)
    h = _hyperparams(args, args.alpha)
    init = None
    if args.init:
        init, _, _ = io_formats.load_embedding(args.init)
        log.info("warm start: early exaggeration disabled")
    log.info("computing affinities for %d instances (perplexity %s)", features.n, h.perplexity)
    p_pair, _ = affinities.joint_affinities(features, h.perplexity)
    p_class = affinities.class_affinities(probs)
    state, _ = optimizer.run(p_pair.values, p_class, h, init=init)
    meta = {
        "method": "cctsne",
        "alpha": h.alpha,
        "lambda": h.penalty_weight,
        "seed": h.seed,
        "iteration": state.iteration,
    }
    io_formats.save_embedding(state, meta, args.out, class_names=probs.class_names)
    log.info("wrote %s", args.out)
    if args.svg:
        labels = metrics.labels_from_probabilities(probs)
        io_formats.emit_scatter_svg(state, labels, args.svg, class_names=probs.class_names)
        log.info("wrote %s", args.svg)
    return EXIT_OK


def _parse_alphas(text: str) -> list[float]:
    try:
        alphas = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise CCTSNEError(f"--alphas could not be parsed: {text!r}") from None
    if not alphas:
        raise CCTSNEError("--alphas is empty")
    for a in alphas:
        _check_range("--alphas", a, 0.0, 1.0)
    return alphas


def cmd_sweep(args) -> int:
    features, probs = _load_pair(args)
    alphas = _parse_alphas(args.alphas)
    h = _hyperparams(args, alphas[0])
    os.makedirs(args.out_dir, exist_ok=True)
    log.info("computing affinities for %d instances", features.n)
    p_pair, _ = affinities.joint_affinities(features, h.perplexity)

    chain = []
    if args.method == "cctsne":
        p_class = affinities.class_affinities(probs)
        states = optimizer.sweep_alpha(p_pair.values, p_class, h, alphas)
    else:
        p_prob = baseline.class_space_affinities(probs, h.perplexity)
        points_list = baseline.sweep_alpha_baseline(p_pair.values, p_prob.values, h, alphas)
        states = [EmbeddingState(pts, np.zeros((0, 2)), iteration=h.n_iter) for pts in points_list]

    prev_file = None
    for k, (a, state) in enumerate(zip(alphas, states)):
        fname = f"embedding_{k:02d}.json"
        meta = {
            "method": args.method,
            "alpha": a,
            "lambda": h.penalty_weight,
            "seed": h.seed,
            "iteration": state.iteration,
        }
        io_formats.save_embedding(
            state, meta, os.path.join(args.out_dir, fname),
            class_names=probs.class_names if args.method == "cctsne" else [],
        )
        chain.append({"alpha": a, "file": fname, "init": prev_file})
        prev_file = fname
    manifest = {"method": args.method, "seed": h.seed, "lambda": h.penalty_weight, "chain": chain}
    with open(os.path.join(args.out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1)
    log.info("wrote %d embeddings + manifest to %s", len(chain), args.out_dir)
    return EXIT_OK


def cmd_metrics(args) -> int:
    features = io_formats.load_features(args.features, standardize=args.standardize)
    probs = io_formats.load_probabilities(args.probs)
    validate_inputs(features, probs)
    labels = metrics.labels_from_probabilities(probs)
    reports = []
    for path in args.embeddings:
        state, meta, _ = io_formats.load_embedding(path)
        if state.points.shape[0] != features.n:
            raise CCTSNEError(
                f"{path}: embedding has {state.points.shape[0]} points, features have {features.n}"
            )
        reports.append(
            metrics.MetricsReport(
                method=str(meta.get("method", "cctsne")),
                alpha=float(meta.get("alpha", float("nan"))),
                seed=int(meta.get("seed", -1)),
                trustworthiness=metrics.trustworthiness(features.values, state.points, args.k),
                continuity=metrics.continuity(features.values, state.points, args.k),
                ccm=metrics.ccm(state.points, labels),
                k=args.k,
            )
        )
    metrics.write_metrics_csv(reports, args.out)
    log.info("wrote %d rows to %s", len(reports), args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    features, labels = synthetic.generate(args.seed)
    train_idx, test_idx = classifier.stratified_split(labels, 0.3, seed=args.seed)
    model = classifier.train(
        features.values[train_idx], labels[train_idx], classifier.TrainConfig(seed=args.seed)
    )
    test_accuracy = classifier.accuracy(model, features.values[test_idx], labels[test_idx])
    probs = classifier.predict_proba(model, features.values)
    io_formats.save_features_csv(features, os.path.join(args.out_dir, "features.csv"))
    io_formats.save_probabilities_csv(probs, os.path.join(args.out_dir, "probs.csv"))
    io_formats.save_labels_csv(labels, os.path.join(args.out_dir, "labels_true.csv"))
    io_formats.save_labels_csv(
        metrics.labels_from_probabilities(probs), os.path.join(args.out_dir, "labels_pred.csv")
    )
    log.info("synthetic dataset written to %s", args.out_dir)
    print(f"test_accuracy={test_accuracy!r}")
    return EXIT_OK


def _port_available(host: str, port: int) -> bool:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((host, port))
        except OSError:
            return False
    return True


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceSettings, build_app

    features = io_formats.load_features(args.features, standardize=args.standardize)
    probs = io_formats.load_probabilities(args.probs) if args.probs else None
    true_labels = io_formats.load_labels(args.labels) if args.labels else None
    if probs is not None:
        validate_inputs(features, probs)
    if true_labels is not None and true_labels.shape[0] != features.n:
        raise CCTSNEError(
            f"--labels has {true_labels.shape[0]} rows, features have {features.n}"
        )
    if not _port_available(args.host, args.port):
        log.error("port %d on %s is already in use", args.port, args.host)
        return EXIT_PORT_IN_USE
    settings = ServiceSettings(
        features=features,
        probabilities=probs,
        true_labels=true_labels,
        n_iter=args.iters,
        frame_every=args.frame_every,
        state_dir=args.state_dir,
        seed=args.seed,
        learning_rate=args.lr,
    )
    app = build_app(settings)
    log.info("serving on %s:%d (state dir: %s)", args.host, args.port, args.state_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = os.environ.get("CCTSNE_THREADS")
    try:
        if threads:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=int(threads)):
                return args.func(args)
        return args.func(args)
    except NonFiniteUpdate as exc:
        log.error("%s", exc)
        return EXIT_DIVERGED
    except (CCTSNEError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
