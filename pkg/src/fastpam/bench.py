"""Algorithm registry and seeded experiment runner behind the ``bench`` command."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .core import MedoidState, check_k
from .datasets import MixtureSpec, gaussian_mixture, read_csv
from .dissimilarity import Metric, VectorDistances, build_matrix, load_matrix
from .initializers import INIT_METHODS, InitConfig, initialize, parkjun_init
from .rng import RNG_ID
from .sampling import ClaransConfig, ClaraConfig, clara, clarans, fastclarans
from .swap import ENGINES, RunStats, SwapConfig, parkjun_refine, refine

ALGORITHMS = ENGINES + ("parkjun", "clara", "fastclara", "clarans", "fastclarans")

RECORD_FIELDS = [
    "combo", "algorithm", "init", "k", "n", "repeat", "seed", "status",
    "initial_td", "final_td", "iterations", "swaps_executed", "candidate_evaluations",
    "inner_updates", "lookups", "distance_evals", "edges_considered", "wall_time_ms",
]
METRIC_COLUMNS = {
    "td": ["initial_td", "final_td"],
    "iterations": ["iterations"],
    "swaps": ["swaps_executed"],
    "candidate_evaluations": ["candidate_evaluations", "inner_updates", "edges_considered"],
    "lookups": ["lookups"],
    "distance_evals": ["distance_evals"],
    "wall_time": ["wall_time_ms"],
}
SUMMARY_METRICS = [
    "final_td", "initial_td", "iterations", "swaps_executed", "candidate_evaluations",
    "inner_updates", "lookups", "distance_evals", "wall_time_ms",
]


@dataclass
class AlgorithmSpec:
    """One (initialization, engine or meta-algorithm, settings) combination."""

    engine: str = "fastpam2"
    init: str | None = None
    id: str | None = None
    tau: float = 0.0
    max_iter: int = 0
    sample_size: int | None = None
    restarts: int | None = None
    x2: bool = False
    attempts: int | None = None
    min_attempts: int = 250
    numlocal: int = 2
    matrix_free: bool = False
    lab_sample_size: int | None = None

    def __post_init__(self):
        if self.engine not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.engine!r}")
        if self.init is None:
            self.init = {"parkjun": "parkjun", "fastclara": "lab", "clarans": "random",
                         "fastclarans": "random"}.get(self.engine, "build")
        if self.init not in INIT_METHODS:
            raise ValueError(f"unknown init method {self.init!r}")
        if self.id is None:
            self.id = f"{self.init}+{self.engine}"

    @property
    def meta(self):
        return self.engine in ("clara", "fastclara", "clarans", "fastclarans")


@dataclass
class RunResult:
    state: MedoidState
    stats: RunStats
    wall_time_ms: float
    initial_td: float = math.nan


def _elapsed_ms(t0):
    return max((time.perf_counter_ns() - t0) / 1e6, 1e-6)


def run_algorithm(spec, k, seed, matrix=None, data=None, metric="euclidean", trace=False):
    """Run one combination; ``matrix`` and/or ``data`` supply the dissimilarities.

    Wall time covers the refinement only for SWAP engines and the whole
    pipeline for the sampling meta-algorithms.
    """
    n = matrix.n if matrix is not None else len(data)
    check_k(n, k)
    if spec.meta:
        if spec.matrix_free:
            if data is None:
                raise ValueError("matrix-free mode needs vector data")
            source = VectorDistances(data, metric)
        else:
            source = matrix if matrix is not None else build_matrix(data, metric)
        t0 = time.perf_counter_ns()
        if spec.engine in ("clara", "fastclara"):
            if spec.engine == "fastclara":
                cfg = ClaraConfig.fast(x2=spec.x2, tau=spec.tau, seed=seed)
                cfg.init = InitConfig(spec.init, seed, spec.lab_sample_size)
            else:
                factory = ClaraConfig.x2 if spec.x2 else ClaraConfig
                cfg = factory(
                    engine=SwapConfig("pam", tau=spec.tau, max_iter=spec.max_iter),
                    init=InitConfig(spec.init, seed, spec.lab_sample_size),
                    seed=seed,
                )
            if spec.sample_size is not None:
                cfg.sample_size = spec.sample_size
            if spec.restarts is not None:
                cfg.restarts = spec.restarts
            state, stats = clara(source, k, cfg)
        else:
            cfg = ClaransConfig(
                attempts=spec.attempts, min_attempts=spec.min_attempts,
                numlocal=spec.numlocal, seed=seed,
            )
            run = fastclarans if spec.engine == "fastclarans" else clarans
            state, stats = run(source, k, cfg)
        return RunResult(state, stats, _elapsed_ms(t0), stats.initial_td)

    if matrix is None:
        matrix = build_matrix(data, metric)
    start = initialize(matrix, k, InitConfig(spec.init, seed, spec.lab_sample_size))
    t0 = time.perf_counter_ns()
    if spec.engine == "parkjun":
        state, _, stats = parkjun_refine(matrix, start, max_iter=spec.max_iter, trace=trace)
    else:
        cfg = SwapConfig(spec.engine, tau=spec.tau, max_iter=spec.max_iter, trace=trace)
        state, _, stats = refine(matrix, start, cfg)
    return RunResult(state, stats, _elapsed_ms(t0), start.td)


# ------------------------------------------------------------- experiments


@dataclass
class ExperimentSpec:
    dataset: dict
    algorithms: list
    k_values: list
    repeats: int = 25
    seed: int = 0
    metric: str = "euclidean"
    metrics: list = field(default_factory=lambda: list(METRIC_COLUMNS))
    resample_dataset: bool = False
    baseline: str | None = None

    @classmethod
    def from_dict(cls, raw):
        raw = dict(raw)
        unknown = set(raw) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown experiment keys: {sorted(unknown)}")
        raw["algorithms"] = [
            a if isinstance(a, AlgorithmSpec) else AlgorithmSpec(**a) for a in raw["algorithms"]
        ]
        spec = cls(**raw)
        if spec.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not spec.k_values:
            raise ValueError("k_values must be nonempty")
        bad = set(spec.metrics) - set(METRIC_COLUMNS)
        if bad:
            raise ValueError(f"unknown metrics: {sorted(bad)}")
        ids = [a.id for a in spec.algorithms]
        if len(set(ids)) != len(ids):
            raise ValueError("algorithm ids must be unique")
        return spec

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def columns(self):
        cols = RECORD_FIELDS[:8]
        for m in METRIC_COLUMNS:
            if m in self.metrics:
                cols += METRIC_COLUMNS[m]
        return cols


def load_dataset(dataset, metric, repeat=0, resample=False, base_dir="."):
    """Return ``(data or None, matrix or None)`` for a dataset description."""
    dataset = dict(dataset)
    if "generator" in dataset:
        gen = dataset.pop("generator")
        if gen.replace("_", "-") != "gaussian-mixture":
            raise ValueError(f"unknown generator {gen!r}")
        mix = MixtureSpec(**dataset)
        if resample:
            mix.seed += repeat
        data, _ = gaussian_mixture(mix)
        return data, None
    if "matrix" in dataset:
        with open(Path(base_dir) / dataset["matrix"]) as fh:
            return None, load_matrix(fh)
    if "path" in dataset:
        with open(Path(base_dir) / dataset["path"]) as fh:
            return read_csv(fh), None
    raise ValueError("dataset needs 'generator', 'path' or 'matrix'")


def run_experiment(spec, base_dir=".", progress=None):
    """Execute every (combo, k, repeat); returns ``(records, failures)``.

    Records are ordered by combo, then k, then repeat. The run seed is
    ``spec.seed + repeat``.
    """
    metric = Metric.parse(spec.metric)
    needs_matrix = any(not (a.meta and a.matrix_free) for a in spec.algorithms)
    cache = {}

    def dataset_for(repeat):
        key = repeat if spec.resample_dataset else 0
        if key not in cache:
            data, matrix = load_dataset(spec.dataset, metric, repeat, spec.resample_dataset, base_dir)
            if matrix is None and needs_matrix and metric is not Metric.PRECOMPUTED:
                matrix = build_matrix(data, metric)
            cache[key] = (data, matrix)
        return cache[key]

    records = []
    failures = 0
    for algo in spec.algorithms:
        for k in spec.k_values:
            for repeat in range(spec.repeats):
                seed = spec.seed + repeat
                row = {"combo": algo.id, "algorithm": algo.engine, "init": algo.init,
                       "k": k, "repeat": repeat, "seed": seed}
                try:
                    data, matrix = dataset_for(repeat)
                    row["n"] = matrix.n if matrix is not None else len(data)
                    res = run_algorithm(algo, k, seed, matrix=matrix, data=data,
                                        metric=metric if data is not None else "euclidean")
                except Exception as exc:  # one failed combo must not stop the sweep
                    failures += 1
                    row.setdefault("n", "")
                    row["status"] = f"failed: {type(exc).__name__}: {exc}"
                else:
                    row["status"] = "ok"
                    row.update(res.stats.as_dict())
                    row["initial_td"] = res.initial_td
                    row["final_td"] = res.state.td
                    row["wall_time_ms"] = res.wall_time_ms
                records.append(row)
                if progress:
                    progress(row)
    return records, failures


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


def write_records(records, stream, columns=RECORD_FIELDS):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for r in records:
        writer.writerow([_fmt(r.get(c, "")) for c in columns])


def summarize(records, baseline=None):
    """Mean/min/max per (combo, k) plus inner-work speedup over the baseline combo.

    The baseline defaults to the first combo whose engine is ``pam``.
    """
    groups = {}
    for r in records:
        groups.setdefault((r["combo"], r["k"]), []).append(r)
    if baseline is None:
        baseline = next((r["combo"] for r in records if r["algorithm"] == "pam"), None)
    rows = []
    means = {}
    for (combo, k), rs in groups.items():
        ok = [r for r in rs if r["status"] == "ok"]
        row = {"combo": combo, "algorithm": rs[0]["algorithm"], "init": rs[0]["init"],
               "k": k, "n": rs[0]["n"], "runs": len(rs), "ok": len(ok)}
        for m in SUMMARY_METRICS:
            vals = np.array([float(r[m]) for r in ok if r.get(m) not in (None, "")])
            vals = vals[~np.isnan(vals)] if len(vals) else vals
            row[f"{m}_mean"] = float(vals.mean()) if len(vals) else math.nan
            row[f"{m}_min"] = float(vals.min()) if len(vals) else math.nan
            row[f"{m}_max"] = float(vals.max()) if len(vals) else math.nan
        means[(combo, k)] = row["inner_updates_mean"]
        rows.append(row)
    for row in rows:
        base = means.get((baseline, row["k"]), math.nan)
        own = row["inner_updates_mean"]
        row["speedup_vs_baseline"] = base / own if own and not math.isnan(base) else math.nan
        row["baseline"] = baseline or ""
    return rows


def write_summary(rows, stream):
    if not rows:
        stream.write("")
        return
    columns = list(rows[0])
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in columns])


def run_to_directory(spec, output_dir, base_dir=".", progress=None):
    """Run ``spec`` and write ``records.csv``, ``summary.csv`` and ``meta.json``."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    records, failures = run_experiment(spec, base_dir, progress)
    with open(out / "records.csv", "w", newline="") as fh:
        write_records(records, fh, spec.columns())
    with open(out / "summary.csv", "w", newline="") as fh:
        write_summary(summarize(records, spec.baseline), fh)
    meta = {
        "rng": RNG_ID,
        "backend": kernels.BACKEND,
        "records": len(records),
        "failures": failures,
        "algorithms": [asdict(a) for a in spec.algorithms],
        "k_values": spec.k_values,
        "repeats": spec.repeats,
        "seed": spec.seed,
        "dataset": spec.dataset,
    }
    with open(out / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    return records, failures
