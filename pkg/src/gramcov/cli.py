"""``gramcov`` command line.

Exit codes: 0 success, 1 usage or parse error, 2 domain violation
(too few observations, mismatched weights), 3 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import bench
from .errors import CovarianceError
from .estimators import cov_bariance, cov_centered, cov_pairwise_bruteforce
from .fileio import (
    FileFormatError,
    format_real,
    read_matrix,
    read_results,
    read_weights,
    write_csv_matrix,
    write_matrix,
    write_results,
)
from .streaming import stream_new
from .weighted import cov_weighted

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3
DEFAULT_SEED = 20251017
SEED_ENV = "GRAMCOV_SEED"
VERIFY_TOL = 1e-12

log = logging.getLogger("gramcov")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return _seed(raw)
    except (ValueError, argparse.ArgumentTypeError):
        raise SystemExit(f"gramcov: invalid {SEED_ENV}={raw!r}")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _methods(text: str) -> tuple:
    names = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = [m for m in names if m not in bench.METHODS]
    if not names or unknown:
        raise argparse.ArgumentTypeError(
            f"choose from {', '.join(bench.METHODS)} (comma separated)"
        )
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gramcov", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cov", help="covariance of a matrix file")
    p.add_argument("input")
    p.add_argument("--method", choices=("bariance", "centered", "bruteforce"), default="bariance")
    p.add_argument("--weights", help="one-column CSV of integer multiplicities")
    p.add_argument("-o", "--output", help="output CSV (default: stdout)")
    p.add_argument("--kernel", choices=("serial", "blas"), default="serial")

    p = sub.add_parser("verify", help="check bariance vs centered agreement on N(0,1) data")
    p.add_argument("--n", type=int, action="append", dest="n_values")
    p.add_argument("--p", type=_positive, action="append", dest="p_values")
    p.add_argument("--draws", type=_positive, default=5)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--kernel", choices=("serial", "blas"), default="serial")

    p = sub.add_parser("bench", help="time estimators with trimming and bootstrap bands")
    p.add_argument("--n", type=int, action="append", dest="n_values")
    p.add_argument("--p", type=int, action="append", dest="p_values")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--boot", type=int, default=1000)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--methods", type=_methods, default=bench.DEFAULT_METHODS)
    p.add_argument("--kernel", choices=("serial", "blas"), default="serial")
    p.add_argument("--out", help="results CSV (default: stdout)")

    p = sub.add_parser("stream", help="feed a matrix file row by row through the online estimator")
    p.add_argument("input")
    p.add_argument("--shift", choices=("none", "first-row"), default="none")
    p.add_argument("--emit-every", type=_positive, metavar="K")
    p.add_argument("-o", "--output", help="also write the final covariance CSV here")
    p.add_argument("--snapshot", help="write the final accumulator state (binary matrix file)")

    p = sub.add_parser("plotdata", help="tidy per-figure CSV from a results file")
    p.add_argument("results")
    p.add_argument("--kind", required=True)
    p.add_argument("--draws", type=_positive, default=5, help="draws per size for --kind error")
    p.add_argument("-o", "--out", help="output CSV (default: stdout)")

    p = sub.add_parser("convert", help="convert a matrix file between CSV and binary")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--to", choices=("csv", "binary"), required=True)
    return parser


def _emit(args, X, attr: str = "output") -> None:
    dest = getattr(args, attr, None)
    if dest:
        write_csv_matrix(dest, X)
    else:
        write_csv_matrix(sys.stdout, X)


def cmd_cov(args) -> int:
    X = read_matrix(args.input)
    if args.weights:
        w = read_weights(args.weights)
        if args.method == "bariance":
            cov = cov_weighted(X, w)
        else:
            if w.size != X.shape[0]:
                raise CovarianceError(f"{w.size} weights for {X.shape[0]} observations")
            expanded = np.repeat(X, w, axis=0)
            cov = _estimator(args.method, args.kernel)(expanded)
    else:
        cov = _estimator(args.method, args.kernel)(X)
    _emit(args, cov)
    return EXIT_OK


def _estimator(method: str, kernel: str):
    if method == "bariance":
        return lambda X: cov_bariance(X, kernel=kernel)
    if method == "centered":
        return lambda X: cov_centered(X, kernel=kernel)
    return cov_pairwise_bruteforce


def cmd_verify(args) -> int:
    n_values = args.n_values or [100, 1000, 4000]
    p_values = args.p_values or [10, 50]
    if any(n < 2 for n in n_values):
        print("gramcov verify: every --n must be at least 2", file=sys.stderr)
        return EXIT_DOMAIN
    seed = args.seed if args.seed is not None else _default_seed()
    reports = bench.equivalence_sweep(n_values, p_values, args.draws, seed, args.kernel)
    print(f"{'n':>8} {'p':>5} {'draws':>6} {'max_delta':>24}  status")
    ok = True
    for r in reports:
        passed = r.delta_max < VERIFY_TOL
        ok &= passed
        print(f"{r.n:>8} {r.p:>5} {args.draws:>6} {format_real(r.delta_max):>24}  "
              f"{'ok' if passed else 'FAIL'}")
    print(f"seed={seed} tolerance={VERIFY_TOL:g} -> {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_bench(args) -> int:
    cfg = bench.BenchConfig(
        n_values=args.n_values or [1000, 4000],
        p_values=args.p_values or [10, 50],
        repetitions=args.reps,
        warmup_calls=args.warmup,
        bootstrap_reps=args.boot,
        seed=args.seed if args.seed is not None else _default_seed(),
        methods=args.methods,
        kernel=args.kernel,
    )
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"gramcov bench: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = sys.stdout if args.out else sys.stderr
    summaries = bench.run_benchmark(cfg)
    if args.out:
        write_results(args.out, summaries)
    else:
        write_results(sys.stdout, summaries)

    print(f"{'method':<18} {'n':>7} {'p':>5} {'kept':>5} {'mean_s':>12} "
          f"{'band_lo_s':>12} {'band_hi_s':>12}", file=report)
    for s in summaries:
        if s.skipped:
            print(f"{s.method:<18} {s.n:>7} {s.p:>5}  skipped (unavailable)", file=report)
            continue
        print(f"{s.method:<18} {s.n:>7} {s.p:>5} {s.kept_count:>5} {s.trimmed_mean_s:>12.4e} "
              f"{s.band_lo_s:>12.4e} {s.band_hi_s:>12.4e}", file=report)
    ratios = bench.speedup_ratios(summaries)
    if ratios:
        print("speedup ratios (>1 favours bariance):", file=report)
        for (method, n, p), ratio in ratios.items():
            print(f"  {method}/bariance n={n} p={p}: {ratio:.3f}", file=report)
    return EXIT_OK


def cmd_stream(args) -> int:
    X = read_matrix(args.input)
    n, p = X.shape
    if n < 2:
        print(f"gramcov stream: need at least two observations, got {n}", file=sys.stderr)
        return EXIT_DOMAIN
    state = stream_new(p, shift=X[0] if args.shift == "first-row" else None)
    k = args.emit_every
    for row in X:
        state.update(row)
        if k and state.t >= 2 and state.t % k == 0:
            print(f"# t={state.t}")
            write_csv_matrix(sys.stdout, state.covariance())
    final = state.covariance()
    if k is None:
        write_csv_matrix(sys.stdout, final)
    elif n % k != 0:
        print(f"# t={n}")
        write_csv_matrix(sys.stdout, final)
    if args.output:
        write_csv_matrix(args.output, final)
    if args.snapshot:
        write_matrix(args.snapshot, state.to_matrix(), fmt="binary")
    return EXIT_OK


PLOT_KINDS = ("runtime-vs-n", "runtime-vs-p", "ratio", "error")


def plot_rows(summaries, kind: str, draws: int = 5) -> List[tuple]:
    """Tidy ``(x, series, y, y_lo, y_hi)`` rows for one figure kind."""
    rows = []
    if kind == "runtime-vs-n":
        for s in summaries:
            rows.append((s.n, f"{s.method} p={s.p}", s.trimmed_mean_s, s.band_lo_s, s.band_hi_s))
    elif kind == "runtime-vs-p":
        for s in summaries:
            rows.append((s.p, f"{s.method} n={s.n}", s.trimmed_mean_s, s.band_lo_s, s.band_hi_s))
    elif kind == "ratio":
        ref = {(s.n, s.p): s for s in summaries if s.method == "bariance"}
        several_p = len({s.p for s in summaries}) > 1
        for s in summaries:
            base = ref.get((s.n, s.p))
            if s.method == "bariance" or base is None:
                continue
            label = f"{s.method}/bariance" + (f" p={s.p}" if several_p else "")
            rows.append((
                s.n, label, s.trimmed_mean_s / base.trimmed_mean_s,
                s.band_lo_s / base.band_hi_s, s.band_hi_s / base.band_lo_s,
            ))
    elif kind == "error":
        sizes = sorted({(s.n, s.p, s.seed) for s in summaries})
        for n, p, seed in sizes:
            deltas = bench.equivalence_draws(n, p, draws, seed)
            rows.append((n, f"p={p}", max(deltas), min(deltas), max(deltas)))
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    rows.sort(key=lambda r: (r[1], r[0]))
    return rows


def cmd_plotdata(args) -> int:
    if args.kind not in PLOT_KINDS:
        print(f"gramcov plotdata: unknown kind {args.kind!r}; choose from {', '.join(PLOT_KINDS)}",
              file=sys.stderr)
        return EXIT_USAGE
    summaries = read_results(args.results)
    if not summaries:
        print(f"gramcov plotdata: {args.results} has no result rows", file=sys.stderr)
        return EXIT_USAGE
    rows = plot_rows(summaries, args.kind, args.draws)
    lines = ["x,series,y,y_lo,y_hi"]
    lines += [f"{x},{series},{format_real(y)},{format_real(lo)},{format_real(hi)}"
              for x, series, y, lo, hi in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_convert(args) -> int:
    write_matrix(args.output, read_matrix(args.input), fmt=args.to)
    return EXIT_OK


COMMANDS = {
    "cov": cmd_cov,
    "verify": cmd_verify,
    "bench": cmd_bench,
    "stream": cmd_stream,
    "plotdata": cmd_plotdata,
    "convert": cmd_convert,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FileFormatError as exc:
        print(f"gramcov {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CovarianceError as exc:
        print(f"gramcov {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except SystemExit as exc:  # bad GRAMCOV_SEED
        print(exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
