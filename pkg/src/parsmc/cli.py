"""Command-line harness.

Subcommands
-----------
bench    full sweep over particle counts and algorithms, CSV/JSON output
filter   single run, prints posterior summaries and the phase breakdown
ratio    speedup-ratio block computed from a benchmark CSV
scaling  log-log scaling report computed from a benchmark CSV

Exit codes: 0 success, 2 configuration error, 3 runtime degeneracy error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import bench as bench_mod
from .backend import Backend
from .bench import (
    ALGORITHMS,
    BenchConfig,
    aggregate_records,
    emit_csv,
    emit_json,
    load_csv,
    ratio_table,
    run_benchmark,
    scaling_report,
)
from .errors import AllWeightsZeroError, BenchConfigError, NonFiniteWeightError, ParsmcError
from .filtering import run_particle_filter, run_particle_learning
from .models import Priors, TrendNoiseModel, simulate
from .rng import RngStream

EXIT_CONFIG = 2
EXIT_DEGENERATE = 3


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from exc


def _algo_list(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def build_parser():
    parser = argparse.ArgumentParser(
        prog="parsmc",
        description="Particle filtering benchmarks with exact parallel resampling")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run the full benchmark sweep")
    b.add_argument("--n", type=_int_list, default=(1024, 4096),
                   help="comma-separated particle counts, e.g. 1024,4096,16384")
    b.add_argument("--t", type=int, default=100, help="number of time steps")
    b.add_argument("--trials", type=int, default=10)
    b.add_argument("--algo", type=_algo_list, default=tuple(ALGORITHMS),
                   help="comma-separated subset of " + ",".join(ALGORITHMS))
    b.add_argument("--precision", choices=["single", "double"], default="double")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--lanes", type=int, default=4)
    b.add_argument("--task", choices=["learn", "filter"], default="learn",
                   help="learn: treat both variances as unknown; filter: known variances")
    b.add_argument("--store-particles", action="store_true")
    b.add_argument("--out", default=None, help="output file path")
    b.add_argument("--format", choices=["csv", "json"], default="csv")

    f = sub.add_parser("filter", help="single run, print posterior summaries")
    f.add_argument("--n", type=int, default=16384)
    f.add_argument("--t", type=int, default=100)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--algo", choices=list(ALGORITHMS), default="par_cutpoint")
    f.add_argument("--precision", choices=["single", "double"], default="double")
    f.add_argument("--lanes", type=int, default=4)
    f.add_argument("--no-learn", action="store_true",
                   help="treat sigma2=1, tau2=0.1 as known instead of learning them")
    f.add_argument("--store-particles", action="store_true")

    r = sub.add_parser("ratio", help="Table-style ratio block from a benchmark CSV")
    r.add_argument("--in", dest="input", required=True, help="benchmark CSV path")
    r.add_argument("--format", choices=["text", "json"], default="text")

    s = sub.add_parser("scaling", help="log-log scaling report from a benchmark CSV")
    s.add_argument("--in", dest="input", required=True, help="benchmark CSV path")
    s.add_argument("--format", choices=["text", "json"], default="text")
    return parser


def _cmd_bench(args):
    config = BenchConfig(
        n_list=args.n, t_len=args.t, trials=args.trials, algorithms=args.algo,
        precision=args.precision, seed=args.seed, lanes=args.lanes,
        task=args.task, store_particles=args.store_particles,
        output_path=args.out)

    def progress(record):
        print(f"{record.algorithm:16s} n={record.n:<9d} trial={record.trial:<3d} "
              f"total={record.total_ns / 1e6:10.2f} ms", file=sys.stderr)

    records, aggregates = run_benchmark(config, progress=progress)
    if args.out:
        if args.format == "csv":
            emit_csv(records, args.out)
        else:
            emit_json(records, args.out)
        print(f"wrote {len(records)} records to {args.out}")
    _print_aggregates(aggregates)
    return 0


def _print_aggregates(aggregates):
    print(f"{'algorithm':16s} {'n':>9s} {'trials':>6s} {'total_ms':>12s} "
          f"{'cdf_ms':>10s} {'resample_ms':>12s} {'propagate_ms':>12s}")
    for a in sorted(aggregates, key=lambda a: (a.algorithm, a.n)):
        print(f"{a.algorithm:16s} {a.n:9d} {a.trials:6d} {a.total_ns / 1e6:12.3f} "
              f"{a.cdf_ns / 1e6:10.3f} {a.resample_ns / 1e6:12.3f} "
              f"{a.propagate_ns / 1e6:12.3f}")


def _cmd_filter(args):
    resampler, mode = ALGORITHMS[args.algo]
    data_stream = RngStream(args.seed, bench_mod._DATA_STREAM_ID)
    _, y = simulate(TrendNoiseModel(), args.t, data_stream)
    with Backend(mode=mode, lanes=args.lanes) as backend:
        if args.no_learn:
            out = run_particle_filter(
                TrendNoiseModel(), y, args.n, seed=args.seed, backend=backend,
                resampler=resampler, precision=args.precision,
                store_particles=args.store_particles)
        else:
            out = run_particle_learning(
                Priors(), y, args.n, seed=args.seed, backend=backend,
                resampler=resampler, precision=args.precision,
                store_particles=args.store_particles)

    t = args.t
    print(f"filtered state at t={t}: mean={out.filtered_mean[-1]:.6f}  "
          f"q05={out.filtered_quantiles[-1][0]:.6f}  "
          f"q50={out.filtered_quantiles[-1][1]:.6f}  "
          f"q95={out.filtered_quantiles[-1][2]:.6f}")
    for name, summary in (out.param_posterior or {}).items():
        print(f"posterior {name} at t={t}: mean={summary.mean[-1]:.6f}  "
              f"sd={summary.sd[-1]:.6f}  "
              f"99% interval=[{summary.quantile(0.005)[-1]:.6f}, "
              f"{summary.quantile(0.995)[-1]:.6f}]")
    timings = out.timings
    print("phase breakdown (ms): "
          f"initialize={timings.initialize / 1e6:.3f} cdf={timings.cdf / 1e6:.3f} "
          f"resample={timings.resample / 1e6:.3f} "
          f"(excl. sort={(timings.resample - timings.resample_sort_only) / 1e6:.3f}) "
          f"propagate={timings.propagate / 1e6:.3f} store={timings.store / 1e6:.3f} "
          f"other={timings.other / 1e6:.3f} total={timings.total / 1e6:.3f}")
    return 0


def _cmd_ratio(args):
    rows = ratio_table(aggregate_records(load_csv(args.input)))
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'numerator':16s} {'denominator':16s} {'n':>9s} {'ratio':>10s}")
        for row in rows:
            print(f"{row['numerator']:16s} {row['denominator']:16s} "
                  f"{row['n']:9d} {row['ratio']:10.2f}")
    return 0


def _cmd_scaling(args):
    report = scaling_report(load_csv(args.input))
    if args.format == "json":
        print(json.dumps(report, indent=2))
        return 0
    for algorithm, entry in report["algorithms"].items():
        slopes = "  ".join(f"{k}={v:.3f}" for k, v in entry["slopes"].items())
        print(f"{algorithm:16s} slopes: {slopes}")
        pts = "  ".join(f"{n}:{ms / 1e6:.2f}ms" for n, ms in entry["points"].items())
        print(f"{'':16s} points: {pts}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"bench": _cmd_bench, "filter": _cmd_filter,
               "ratio": _cmd_ratio, "scaling": _cmd_scaling}[args.command]
    try:
        return handler(args)
    except (AllWeightsZeroError, NonFiniteWeightError) as exc:
        print(f"degeneracy error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (BenchConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParsmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
