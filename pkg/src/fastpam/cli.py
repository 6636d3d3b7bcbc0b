"""Command-line interface: ``cluster``, ``bench``, ``generate``, ``convert-matrix``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .bench import ALGORITHMS, AlgorithmSpec, ExperimentSpec, run_algorithm, run_to_directory
from .core import DataError, ParseError, rebuild_cache
from .datasets import MixtureSpec, gaussian_mixture, read_csv, write_csv
from .dissimilarity import Metric, VectorDistances, build_matrix, load_matrix, save_matrix
from .initializers import INIT_METHODS
from .rng import RNG_ID
from .sampling import nearest_slots
from .swap import write_trace

log = logging.getLogger("fastpam")


def _open_out(path):
    if path is None or str(path) == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _read_input(path, metric):
    with open(path) as fh:
        if metric is Metric.PRECOMPUTED:
            return None, load_matrix(fh)
        return read_csv(fh), None


def cmd_cluster(args):
    metric = Metric.parse("precomputed" if args.precomputed else args.metric)
    data, matrix = _read_input(args.input, metric)
    if matrix is None and not args.matrix_free:
        matrix = build_matrix(data, metric)
    n = matrix.n if matrix is not None else len(data)
    if args.k > n or args.k < 1:
        raise ValueError(f"need 1 <= k <= n, got k={args.k}, n={n}")
    spec = AlgorithmSpec(
        engine=args.engine, init=args.init, tau=args.tau, max_iter=args.max_iter,
        sample_size=args.sample_size, restarts=args.restarts, x2=args.x2,
        attempts=args.attempts, numlocal=args.numlocal, matrix_free=args.matrix_free,
    )
    result = {
        "config": {
            "input": str(args.input), "metric": metric.value, "k": args.k, "n": n,
            "init": spec.init, "engine": spec.engine, "seed": args.seed, "tau": args.tau,
            "max_iter": args.max_iter, "sample_size": args.sample_size,
            "restarts": args.restarts, "x2": args.x2, "attempts": args.attempts,
            "numlocal": args.numlocal, "matrix_free": args.matrix_free,
            "rng": RNG_ID, "backend": kernels.BACKEND,
        }
    }
    if args.k == n:
        # every object is its own medoid
        medoids = np.arange(n)
        assignment = np.arange(n)
        result.update(medoids=medoids.tolist(), assignment=assignment.tolist(), td=0.0,
                      stats={"iterations": 0, "swaps_executed": 0}, wall_time_ms=0.0)
    else:
        run = run_algorithm(spec, args.k, args.seed, matrix=matrix, data=data,
                            metric=metric if data is not None else "euclidean",
                            trace=bool(args.trace))
        medoids = run.state.medoids
        if matrix is not None:
            nearest = rebuild_cache(matrix, medoids).nearest
        else:
            nearest = nearest_slots(VectorDistances(data, metric), medoids)
        stats = run.stats.as_dict()
        if not args.count_lookups:
            stats.pop("lookups")
        result.update(
            medoids=[int(m) for m in medoids],
            assignment=[int(medoids[s]) for s in nearest],
            labels=[int(s) for s in nearest],
            td=float(run.state.td),
            initial_td=float(run.initial_td),
            stats=stats,
            wall_time_ms=run.wall_time_ms,
        )
        if args.trace:
            with open(args.trace, "w", newline="") as fh:
                write_trace(run.stats.trace, fh)
    out, close = _open_out(args.output)
    try:
        json.dump(result, out, indent=2)
        out.write("\n")
    finally:
        if close:
            out.close()
    return 0


def cmd_bench(args):
    spec = ExperimentSpec.load(args.spec)
    if args.repeats is not None:
        spec.repeats = args.repeats

    def progress(row):
        log.info("%s k=%s repeat=%s: %s", row["combo"], row["k"], row["repeat"], row["status"])

    records, failures = run_to_directory(spec, args.output_dir, Path(args.spec).parent, progress)
    log.info("%d records, %d failed", len(records), failures)
    return 1 if failures else 0


def cmd_generate(args):
    spec = MixtureSpec(n=args.n, clusters=args.clusters, d=args.d, spread=args.spread,
                       box=args.box, seed=args.seed)
    data, labels = gaussian_mixture(spec)
    out, close = _open_out(args.output)
    try:
        write_csv(data, out, comment=spec.describe())
    finally:
        if close:
            out.close()
    if args.labels_output:
        np.savetxt(args.labels_output, labels, fmt="%d")
    return 0


def cmd_convert(args):
    metric = Metric.parse(args.metric)
    with open(args.input) as fh:
        matrix = build_matrix(read_csv(fh), metric)
    out, close = _open_out(args.output)
    try:
        save_matrix(matrix, out)
    finally:
        if close:
            out.close()
    return 0


def make_parser():
    parser = argparse.ArgumentParser(prog="fastpam", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster one dataset and write JSON")
    p.add_argument("input", help="CSV of n rows x d columns, or a triangular matrix file")
    p.add_argument("--metric", default="euclidean",
                   choices=[m.value for m in Metric])
    p.add_argument("--precomputed", action="store_true",
                   help="input is a triangular matrix file (same as --metric precomputed)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--init", choices=INIT_METHODS, default=None)
    p.add_argument("--engine", choices=ALGORITHMS, default="fastpam2")
    p.add_argument("--tau", type=float, choices=[0.0, 1.0], default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=0)
    p.add_argument("--sample-size", type=int, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--x2", action="store_true", help="CLARA x2 preset (80+4k, 10 restarts)")
    p.add_argument("--attempts", type=int, default=None)
    p.add_argument("--numlocal", type=int, default=2)
    p.add_argument("--matrix-free", action="store_true",
                   help="CLARA/CLARANS: compute distances on demand")
    p.add_argument("--count-lookups", action="store_true",
                   help="include the matrix lookup counter in the output")
    p.add_argument("--trace", default=None, help="write the swap trace CSV here")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("bench", help="run a JSON experiment spec")
    p.add_argument("spec")
    p.add_argument("output_dir")
    p.add_argument("--repeats", type=int, default=None, help="override the spec's repeats")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("generate", help="write a Gaussian-mixture CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--clusters", type=int, default=10)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--box", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labels-output", default=None)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("convert-matrix", help="CSV vectors to triangular matrix file")
    p.add_argument("input")
    p.add_argument("--metric", default="euclidean",
                   choices=[m.value for m in Metric if m is not Metric.PRECOMPUTED])
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ParseError, DataError) as exc:
        print(f"fastpam: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, IndexError) as exc:
        print(f"fastpam: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"fastpam: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
