"""Command-line entry point: ``rejfilter <subcommand> ...``.

Every results file ``X`` is written next to a manifest ``X.manifest.json``
recording the resolved parameters, seed, library version and wall time.
Exit status is 0 on success, 2 on bad arguments, 1 on runtime failure.
"""

import argparse
import csv
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__

DEFAULT_KAPPAS = "1,0.67,0.4,0.1,0.04,0.01"


def _kappa(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"kappa must lie in (0, 1], got {value}")
    return value


def _kappa_list(text):
    return [_kappa(part) for part in text.split(",") if part.strip()]


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _nonneg_float(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {value}")
    return value


def _probability(text):
    value = float(text)
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"expected a probability in [0, 1], got {value}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return value


def _int_list(text):
    return [_positive_int(part) for part in text.split(",") if part.strip()]


def _idx_pair(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected IMAGES,LABELS")
    return tuple(parts)


def _stop(text):
    value = float(text)
    if not 0 < value < 0.5:
        raise argparse.ArgumentTypeError("stop threshold must lie in (0, 0.5)")
    return value


def _percentile(text):
    value = float(text)
    if not 0 <= value < 100:
        raise argparse.ArgumentTypeError("percentile must lie in [0, 100)")
    return value


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_plain(v) for v in row])


def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def write_manifest(results_path, args, started, outputs):
    params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(args).items() if k != "func"}
    manifest = {
        "subcommand": args.command,
        "parameters": params,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "outputs": [str(p) for p in outputs],
        "duration_seconds": round(time.perf_counter() - started, 6),
        "created": datetime.now(timezone.utc).isoformat(),
    }
    path = Path(str(results_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# subcommands


def cmd_freq_track(args, started):
    from .frequency import CSV_COLUMNS, median_loss_curve, record_row, run_trials

    records, _ = run_trials(args.trials, args.updates, seed=args.seed, attempts=args.attempts,
                            recovery=args.recovery, kappa=args.kappa, eta=args.eta)
    write_csv(args.out, CSV_COLUMNS, (record_row(r) for r in records))
    write_manifest(args.out, args, started, [args.out])
    print(f"terminal median loss {median_loss_curve(records)[-1]:.6g} over {args.trials} trial(s)")


def cmd_kappa_sweep(args, started):
    from .frequency import kappa_sweep

    rows = kappa_sweep(args.kappas, n_measurements=args.measurements, attempts=args.attempts,
                       recovery=args.recovery, trials=args.trials, seed=args.seed, eta=args.eta)
    for kappa, ratio in rows:
        print(f"kappa={kappa:<6g} normalized median loss {ratio:.4g}")
    if args.out:
        write_csv(args.out, ("kappa", "normalized_median_loss"), rows)
        write_manifest(args.out, args, started, [args.out])


def _classify_chunk(job, train, stop, restarts, budget, capacity):
    from .classification import classify

    rows, hist = [], np.zeros(train.n_features, dtype=np.int64)
    for index, vector, label, seed in job:
        res = classify(vector, train, stop, restarts, budget, capacity, rng=seed)
        hist += res.histogram
        rows.append((index, label, res.label, res.queries))
    return rows, hist


def cmd_classify(args, started):
    from functools import partial

    from .classification import knn_predict, load_mnist, task_corpus
    from .parallel import pmap, worker_count

    train = task_corpus(*load_mnist(*args.train), args.task)
    test = task_corpus(*load_mnist(*args.test), args.task)
    n_features = train.n_features
    features = np.arange(n_features)
    if args.features:
        with open(args.features, newline="") as f:
            features = np.array(sorted(int(r["feature"]) for r in csv.DictReader(f)), dtype=int)
        train, test = train.restrict(features), test.restrict(features)
    n_test = len(test) if args.limit is None else min(args.limit, len(test))
    seeds = np.random.SeedSequence(args.seed).spawn(n_test)
    items = [(j, test.vectors[j], int(test.labels[j]), seeds[j]) for j in range(n_test)]
    n_chunks = max(1, worker_count())
    chunks = [items[c::n_chunks] for c in range(n_chunks) if items[c::n_chunks]]
    run = partial(_classify_chunk, train=train, stop=args.stop, restarts=args.restarts,
                  budget=args.budget, capacity=args.capacity)
    results = pmap(run, chunks)
    rows = sorted(r for rows, _ in results for r in rows)
    hist_local = sum(h for _, h in results)
    histogram = np.zeros(n_features, dtype=np.int64)
    histogram[features] = hist_local

    header = ["index", "label", "predicted", "queries"]
    if args.knn:
        knn = knn_predict(test.vectors[:n_test], train, args.knn)
        header.append("knn_predicted")
        rows = [row + (int(knn[row[0]]),) for row in rows]
    write_csv(args.out, header, rows)
    outputs = [args.out]
    if args.histogram:
        write_csv(args.histogram, ("feature", "count"), enumerate(histogram.tolist()))
        outputs.append(args.histogram)
    if args.heatmap:
        side = int(round(n_features ** 0.5))
        if side * side != n_features:
            raise ValueError(f"{n_features} features do not form a square image")
        write_csv(args.heatmap, [f"c{c}" for c in range(side)], histogram.reshape(side, side).tolist())
        outputs.append(args.heatmap)
    write_manifest(args.out, args, started, outputs)
    accuracy = np.mean([r[1] == r[2] for r in rows])
    print(f"accuracy {accuracy:.4f} on {n_test} test vectors, "
          f"mean queries {np.mean([r[3] for r in rows]):.1f}")
    if args.knn:
        print(f"kNN (k={args.knn}) accuracy {np.mean([r[1] == r[4] for r in rows]):.4f}")


def read_histogram(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    hist = np.zeros(len(rows), dtype=np.int64)
    for r in rows:
        hist[int(r["feature"])] = int(r["count"])
    return hist


def cmd_feature_select(args, started):
    from .classification import feature_select, percentile_table

    hist = read_histogram(args.histogram)
    for p, count in percentile_table(hist):
        print(f"percentile {p:>5g}: {count} features")
    retained = feature_select(hist, args.percentile)
    print(f"percentile {args.percentile:g} retains {retained.size} of {hist.size} features")
    if args.out:
        write_csv(args.out, ("feature",), ((int(i),) for i in retained))
        write_manifest(args.out, args, started, [args.out])


def cmd_model_select(args, started):
    from .model_selection import track_two_models

    rows = list(track_two_models(args.updates, args.attempts, args.beta, args.truth_bias, args.seed,
                                 args.recovery))
    write_csv(args.out, ("k", "ell_a", "ell_b", "bayes_factor"), rows)
    write_manifest(args.out, args, started, [args.out])
    print(f"after {args.updates} updates: K_hat = {rows[-1][3]:.6g} (A over B)")


def bench_instance(dim):
    from .gaussian import GaussianModel
    from .inference import FunctionLikelihood

    centre = np.full(dim, 0.5)

    def bump(evidence, xs):
        return np.exp(-0.5 * np.sum((xs - centre) ** 2, axis=1))

    return GaussianModel(np.zeros(dim), np.eye(dim)), FunctionLikelihood(bump)


def batch_bench(attempts, n_batch_values, seed, dim=2):
    """Time one logical update per ``N_batch`` and compare to the single-node replay."""
    from .batched import batched_update, single_node_replay
    from .moments import MomentAccumulator

    prior, likelihood = bench_instance(dim)
    rows = []
    for n_batch in n_batch_values:
        t0 = time.perf_counter()
        model, n_a, _ = batched_update([None], prior, likelihood, attempts, n_batch, seed)
        elapsed = time.perf_counter() - t0
        ref, ref_n = single_node_replay([None], prior, likelihood, attempts, n_batch, seed)
        if ref_n != n_a:
            raise RuntimeError("batched and single-node runs accepted different sample counts")
        delta = max(np.max(np.abs(model.mean - ref.mean)), np.max(np.abs(model.covariance - ref.covariance)))
        rows.append((n_batch, elapsed, n_batch * MomentAccumulator(dim).nbytes, float(delta), n_a))
    return rows


def cmd_batch_bench(args, started):
    rows = batch_bench(args.attempts, args.batches, args.seed, args.dim)
    for n_batch, elapsed, nbytes, delta, n_a in rows:
        print(f"N_batch={n_batch:<3d} {elapsed * 1e3:8.2f} ms  {nbytes:6d} accumulator bytes  "
              f"max moment delta {delta:.3g}  N_a={n_a}")
    if args.out:
        # wall time is left out of the CSV so that reruns are byte-identical
        write_csv(args.out, ("n_batch", "accumulator_bytes", "moment_delta", "n_accepted"),
                  [(r[0], r[2], r[3], r[4]) for r in rows])
        write_manifest(args.out, args, started, [args.out])


def build_parser():
    from .frequency import WALK_VARIANCE

    parser = argparse.ArgumentParser(prog="rejfilter", description="Rejection filtering experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("freq-track", help="track a drifting frequency")
    p.add_argument("--updates", type=_positive_int, default=200)
    p.add_argument("--attempts", type=_positive_int, default=100)
    p.add_argument("--recovery", type=_nonneg_float, default=0.02)
    p.add_argument("--kappa", type=_kappa, default=1.0)
    p.add_argument("--eta", type=_nonneg_float, default=WALK_VARIANCE)
    p.add_argument("--trials", type=_positive_int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_freq_track)

    p = sub.add_parser("kappa-sweep", help="normalized loss as a function of kappa")
    p.add_argument("--kappas", type=_kappa_list, default=_kappa_list(DEFAULT_KAPPAS))
    p.add_argument("--measurements", type=_positive_int, default=100)
    p.add_argument("--attempts", type=_positive_int, default=100)
    p.add_argument("--recovery", type=_nonneg_float, default=0.02)
    p.add_argument("--eta", type=_nonneg_float, default=WALK_VARIANCE)
    p.add_argument("--trials", type=_positive_int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kappa_sweep)

    p = sub.add_parser("classify", help="active classification of MNIST digits")
    p.add_argument("--train", type=_idx_pair, required=True, metavar="IMAGES,LABELS")
    p.add_argument("--test", type=_idx_pair, required=True, metavar="IMAGES,LABELS")
    p.add_argument("--task", choices=("zero-one", "even-odd"), default="zero-one")
    p.add_argument("--stop", type=_stop, default=0.01)
    p.add_argument("--restarts", type=_positive_int, default=3)
    p.add_argument("--budget", type=_positive_int, default=784)
    p.add_argument("--capacity", type=_positive_int, default=1000)
    p.add_argument("--features", help="CSV of retained feature indices (from feature-select)")
    p.add_argument("--limit", type=_positive_int, help="classify only the first N test vectors")
    p.add_argument("--knn", type=_positive_int, metavar="K", help="also report a kNN baseline")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--histogram", help="per-feature query counts CSV")
    p.add_argument("--heatmap", help="query counts as a square grid CSV")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("feature-select", help="cull rarely queried features")
    p.add_argument("--histogram", required=True)
    p.add_argument("--percentile", type=_percentile, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_feature_select)

    p = sub.add_parser("model-select", help="two-model Bayes factor demo")
    p.add_argument("--updates", type=_positive_int, default=200)
    p.add_argument("--attempts", type=_positive_int, default=100)
    p.add_argument("--beta", type=_positive_float, default=0.5)
    p.add_argument("--truth-bias", type=_probability, default=0.8)
    p.add_argument("--recovery", type=_nonneg_float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_model_select)

    p = sub.add_parser("batch-bench", help="batched vs single-node update")
    p.add_argument("--attempts", type=_positive_int, default=100_000)
    p.add_argument("--batches", type=_int_list, default=[1, 2, 8])
    p.add_argument("--dim", type=_positive_int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_batch_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        args.func(args, started)
    except Exception as exc:  # runtime failures map to exit status 1
        print(f"rejfilter: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
