"""Benchmark harness: particle-count sweeps with trimmed-mean aggregation.

Protocol: one shared observation path is simulated from the configured seed,
then every (algorithm, particle count) cell is run ``trials`` times on that
same path with the same filter seed, so the numerical output of each trial is
identical and only the timings vary.  Each timing field is aggregated as the
mean of its middle order statistics (the middle five when trials=10), field
by field, never through the total alone.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .backend import Backend
from .core import is_power_of_two
from .errors import BenchConfigError, InsufficientPointsError
from .filtering import run_particle_filter, run_particle_learning
from .models import Priors, TrendNoiseModel, simulate
from .rng import AUX_STREAM_BASE, RngStream

#: benchmark algorithm name -> (resampler, backend mode)
ALGORITHMS = {
    "cpu_naive": ("naive", "sequential"),
    "cpu_sorted": ("sorted", "sequential"),
    "cpu_stratified": ("stratified", "sequential"),
    "cpu_systematic": ("systematic", "sequential"),
    "par_cutpoint": ("cutpoint", "parallel"),
}

_DATA_STREAM_ID = AUX_STREAM_BASE + 1


@dataclass
class BenchConfig:
    n_list: tuple = (1024, 4096)
    t_len: int = 100
    trials: int = 10
    algorithms: tuple = tuple(ALGORITHMS)
    precision: str = "double"
    seed: int = 0
    store_particles: bool = False
    output_path: str | None = None
    lanes: int = 4
    task: str = "learn"  # "learn": unknown variances; "filter": known parameters

    def validate(self):
        if not self.n_list:
            raise BenchConfigError("n_list must not be empty")
        for n in self.n_list:
            if n < 1:
                raise BenchConfigError(f"particle count must be >= 1, got {n}")
        if self.trials < 1:
            raise BenchConfigError("trials must be >= 1")
        if self.t_len < 1:
            raise BenchConfigError("t_len must be >= 1")
        if self.lanes < 1:
            raise BenchConfigError("lanes must be >= 1")
        if self.precision not in ("single", "double"):
            raise BenchConfigError(f"unknown precision {self.precision!r}")
        if self.task not in ("learn", "filter"):
            raise BenchConfigError(f"unknown task {self.task!r}")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise BenchConfigError(
                f"unknown algorithms {unknown}; choose from {sorted(ALGORITHMS)}")
        if "par_cutpoint" in self.algorithms:
            bad = [n for n in self.n_list if not is_power_of_two(n)]
            if bad:
                raise BenchConfigError(
                    f"par_cutpoint needs power-of-two particle counts, got {bad}")
        return self


@dataclass
class BenchRecord:
    algorithm: str
    n: int
    precision: str
    trial: int
    initialize_ns: int
    cdf_ns: int
    resample_ns: int
    resample_sort_only_ns: int
    propagate_ns: int
    store_ns: int
    other_ns: int
    total_ns: int
    posterior_sigma2_mean: float
    posterior_tau2_mean: float


CSV_COLUMNS = [f.name for f in fields(BenchRecord)]
_TIMING_FIELDS = [c for c in CSV_COLUMNS if c.endswith("_ns")]


@dataclass
class AggregateRecord:
    """Per-cell trimmed means; each timing field aggregated independently."""

    algorithm: str
    n: int
    precision: str
    trials: int
    initialize_ns: float
    cdf_ns: float
    resample_ns: float
    resample_sort_only_ns: float
    propagate_ns: float
    store_ns: float
    other_ns: float
    total_ns: float
    posterior_sigma2_mean: float
    posterior_tau2_mean: float


def trimmed_mean(values):
    """Mean of the middle ``len//2`` order statistics (middle 5 of 10)."""
    v = sorted(values)
    keep = max(1, len(v) // 2)
    lo = (len(v) - keep) // 2
    return float(np.mean(v[lo:lo + keep]))


def _run_once(algorithm, n, config, y):
    resampler, mode = ALGORITHMS[algorithm]
    with Backend(mode=mode, lanes=config.lanes) as backend:
        if config.task == "learn":
            out = run_particle_learning(
                Priors(), y, n, seed=config.seed, backend=backend,
                resampler=resampler, precision=config.precision,
                store_particles=config.store_particles, track_quantiles=False)
        else:
            out = run_particle_filter(
                TrendNoiseModel(), y, n, seed=config.seed, backend=backend,
                resampler=resampler, precision=config.precision,
                store_particles=config.store_particles, track_quantiles=False)
    return out


def _posterior_means(out):
    post = out.param_posterior or {}
    sig = float(post["sigma2"].mean[-1]) if "sigma2" in post else math.nan
    tau = float(post["tau2"].mean[-1]) if "tau2" in post else math.nan
    return sig, tau


def _warm_kernels(config):
    # First use of the compiled kernels pays JIT/load cost; keep that out of
    # the timed records.
    warm = BenchConfig(n_list=(64,), t_len=1, trials=1, algorithms=config.algorithms,
                       precision=config.precision, seed=config.seed, lanes=1,
                       task=config.task)
    _, y = simulate(TrendNoiseModel(), 1, RngStream(0, _DATA_STREAM_ID))
    for algorithm in warm.algorithms:
        _run_once(algorithm, 64, warm, y)


def run_benchmark(config, progress=None):
    """Run the sweep; returns (records, aggregates)."""
    config.validate()
    data_stream = RngStream(config.seed, _DATA_STREAM_ID)
    _, y = simulate(TrendNoiseModel(), config.t_len, data_stream)
    _warm_kernels(config)

    records = []
    for algorithm in config.algorithms:
        for n in config.n_list:
            for trial in range(1, config.trials + 1):
                out = _run_once(algorithm, n, config, y)
                sig, tau = _posterior_means(out)
                t = out.timings
                records.append(BenchRecord(
                    algorithm=algorithm, n=n, precision=config.precision,
                    trial=trial, total_ns=t.total,
                    posterior_sigma2_mean=sig, posterior_tau2_mean=tau,
                    **t.as_dict()))
                if progress is not None:
                    progress(records[-1])
    return records, aggregate_records(records)


def aggregate_records(records):
    cells = {}
    for r in records:
        cells.setdefault((r.algorithm, r.n, r.precision), []).append(r)
    aggregates = []
    for (algorithm, n, precision), rs in cells.items():
        agg = {f: trimmed_mean([getattr(r, f) for r in rs]) for f in _TIMING_FIELDS}
        aggregates.append(AggregateRecord(
            algorithm=algorithm, n=n, precision=precision, trials=len(rs),
            posterior_sigma2_mean=rs[0].posterior_sigma2_mean,
            posterior_tau2_mean=rs[0].posterior_tau2_mean, **agg))
    return aggregates


def emit_csv(records, path):
    """Header plus one row per record; stable column order (CSV_COLUMNS)."""
    if not records:
        raise ValueError("no records to write")
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for r in records:
                writer.writerow([getattr(r, c) for c in CSV_COLUMNS])
    except OSError as exc:
        raise OSError(f"cannot write benchmark CSV to {path}: {exc}") from exc
    return path


def load_csv(path):
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            records.append(BenchRecord(
                algorithm=row["algorithm"], n=int(row["n"]),
                precision=row["precision"], trial=int(row["trial"]),
                posterior_sigma2_mean=float(row["posterior_sigma2_mean"]),
                posterior_tau2_mean=float(row["posterior_tau2_mean"]),
                **{f: int(row[f]) for f in _TIMING_FIELDS}))
    return records


def emit_json(records, path):
    with open(path, "w") as fh:
        json.dump([asdict(r) for r in records], fh, indent=2)
    return path


def ratio_table(aggregates):
    """Speedup ratios numerator/denominator of trimmed total time, for every
    ordered algorithm pair at every particle count."""
    by_n = {}
    for a in aggregates:
        by_n.setdefault(a.n, {})[a.algorithm] = a.total_ns
    rows = []
    for n in sorted(by_n):
        algos = by_n[n]
        for num in sorted(algos):
            for den in sorted(algos):
                if num != den and algos[den] > 0:
                    rows.append({"numerator": num, "denominator": den, "n": n,
                                 "ratio": algos[num] / algos[den]})
    return rows


def fit_loglog_slope(ns, values):
    ns = np.asarray(ns, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if len(ns) < 3:
        raise InsufficientPointsError(
            f"need >= 3 particle counts for a slope, got {len(ns)}")
    slope, _ = np.polyfit(np.log(ns), np.log(values), 1)
    return float(slope)


def scaling_report(records, min_points=3):
    """Log-log slopes per algorithm (total and per phase) plus the pairwise
    ratio block; raises InsufficientPoints when an algorithm spans fewer than
    ``min_points`` particle counts."""
    aggregates = aggregate_records(records)
    per_algo = {}
    for a in aggregates:
        per_algo.setdefault(a.algorithm, []).append(a)
    report = {"algorithms": {}, "ratios": ratio_table(aggregates)}
    for algorithm, aggs in per_algo.items():
        aggs.sort(key=lambda a: a.n)
        ns = [a.n for a in aggs]
        if len(set(ns)) < min_points:
            raise InsufficientPointsError(
                f"{algorithm}: need >= {min_points} particle counts, got {len(set(ns))}")
        slopes = {}
        for fname in ("total_ns", "cdf_ns", "resample_ns", "propagate_ns"):
            vals = [getattr(a, fname) for a in aggs]
            if all(v > 0 for v in vals):
                slopes[fname.removesuffix("_ns")] = fit_loglog_slope(ns, vals)
        report["algorithms"][algorithm] = {
            "slopes": slopes,
            "points": {a.n: a.total_ns for a in aggs},
        }
    return report
