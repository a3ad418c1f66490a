"""Timing protocol for comparing covariance estimators.

For every ``(n, p)`` the harness generates one standard-normal matrix,
then for each method: warm-up calls (discarded), ``repetitions`` timed
calls, 1.5 x IQR trimming, and a percentile bootstrap band for the mean of
the kept runtimes. Timing covers the estimator call only.

Quantiles everywhere use linear interpolation at position ``q * (m - 1)``
of the sorted sample (numpy's default ``"linear"`` method).
"""

from __future__ import annotations

import importlib
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._rng import make_rng
from .estimators import EquivalenceReport, cov_bariance, cov_centered, delta_max
from .matrix import Kernel

log = logging.getLogger(__name__)

METHODS = ("bariance", "centered", "external-baseline")
DEFAULT_METHODS = ("bariance", "centered")
# "module:function" timed as the external baseline; called as f(X, rowvar=False, ddof=1)
EXTERNAL_BASELINE = "numpy:cov"


@dataclass
class BenchConfig:
    n_values: List[int]
    p_values: List[int]
    repetitions: int = 50
    warmup_calls: int = 1
    bootstrap_reps: int = 1000
    seed: int = 0
    methods: Tuple[str, ...] = DEFAULT_METHODS
    kernel: Kernel = "serial"
    level: float = 0.95

    def validate(self) -> "BenchConfig":
        if self.repetitions < 3:
            raise ValueError("repetitions must be at least 3")
        if self.bootstrap_reps < 100:
            raise ValueError("bootstrap_reps must be at least 100")
        if self.warmup_calls < 0:
            raise ValueError("warmup_calls must be nonnegative")
        if not self.n_values or any(n < 2 for n in self.n_values):
            raise ValueError("every n must be at least 2")
        if not self.p_values or any(p < 1 for p in self.p_values):
            raise ValueError("every p must be at least 1")
        if not self.methods:
            raise ValueError("no methods selected")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods: {', '.join(unknown)}")
        if self.kernel not in ("serial", "blas"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return self


@dataclass
class BenchSample:
    method: str
    n: int
    p: int
    runtimes: List[float]


@dataclass
class BenchSummary:
    method: str
    n: int
    p: int
    repetitions: int
    kept_count: int
    removed_count: int
    trimmed_mean_s: float
    band_lo_s: float
    band_hi_s: float
    seed: int
    skipped: bool = False
    runtimes: List[float] = field(default_factory=list, repr=False)


def generate_data(n: int, p: int, seed) -> np.ndarray:
    """``n x p`` i.i.d. N(0, 1) matrix; identical for identical ``(n, p, seed)``."""
    if n < 1 or p < 1:
        raise ValueError(f"data dimensions must be positive, got {n} x {p}")
    return make_rng(seed).standard_normal((n, p))


def _quantiles(values: np.ndarray, qs) -> np.ndarray:
    return np.quantile(values, qs, method="linear")


def iqr_trim(samples: Sequence[float]) -> Tuple[List[float], List[float]]:
    """Split ``samples`` by Tukey's fences ``[Q1 - 1.5 IQR, Q3 + 1.5 IQR]``.

    Fences are inclusive and both lists keep the input order.
    """
    values = np.asarray(samples, dtype=np.float64)
    if values.size < 3:
        raise ValueError("need at least three samples to trim")
    q1, q3 = _quantiles(values, [0.25, 0.75])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    kept = [float(v) for v in values if lo <= v <= hi]
    removed = [float(v) for v in values if not lo <= v <= hi]
    return kept, removed


def bootstrap_band(
    samples: Sequence[float], reps: int = 1000, level: float = 0.95, seed=0
) -> Tuple[float, float]:
    """Percentile bootstrap interval for the mean of ``samples``."""
    values = np.asarray(samples, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot bootstrap an empty sample")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    if reps < 1:
        raise ValueError("reps must be positive")
    rng = make_rng(seed)
    idx = rng.integers(0, values.size, size=(reps, values.size))
    means = values[idx].mean(axis=1)
    tail = (1.0 - level) / 2.0
    lo, hi = _quantiles(means, [tail, 1.0 - tail])
    return float(lo), float(hi)


def _external_baseline() -> Optional[Callable[[np.ndarray], np.ndarray]]:
    module, _, attr = EXTERNAL_BASELINE.partition(":")
    try:
        cov = getattr(importlib.import_module(module), attr)
    except (ImportError, AttributeError):
        return None
    return lambda X: cov(X, rowvar=False, ddof=1)


def resolve_method(method: str, kernel: Kernel = "serial") -> Optional[Callable]:
    """Estimator callable for ``method``, or None when it is unavailable here."""
    if method == "bariance":
        return lambda X: cov_bariance(X, kernel=kernel)
    if method == "centered":
        return lambda X: cov_centered(X, kernel=kernel)
    if method == "external-baseline":
        return _external_baseline()
    raise ValueError(f"unknown method {method!r}")


def time_calls(fn: Callable, X: np.ndarray, repetitions: int, warmup: int = 1) -> List[float]:
    for _ in range(warmup):
        fn(X)
    runtimes = []
    for _ in range(repetitions):
        start = time.perf_counter_ns()
        fn(X)
        elapsed = time.perf_counter_ns() - start
        # clock granularity can report 0 for trivial calls; keep samples positive
        runtimes.append(max(elapsed, 1) * 1e-9)
    return runtimes


def summarize(sample: BenchSample, cfg: BenchConfig) -> BenchSummary:
    kept, removed = iqr_trim(sample.runtimes)
    mean = float(np.mean(kept))
    band_seed = make_rng(cfg.seed).integers(2**63)  # one fixed band seed per config
    lo, hi = bootstrap_band(kept, cfg.bootstrap_reps, cfg.level, seed=int(band_seed))
    # On near-constant samples the resampled means can land an ulp away.
    lo, hi = min(lo, mean), max(hi, mean)
    return BenchSummary(
        method=sample.method,
        n=sample.n,
        p=sample.p,
        repetitions=len(sample.runtimes),
        kept_count=len(kept),
        removed_count=len(removed),
        trimmed_mean_s=mean,
        band_lo_s=lo,
        band_hi_s=hi,
        seed=cfg.seed,
        runtimes=list(sample.runtimes),
    )


def _skipped(method: str, n: int, p: int, cfg: BenchConfig) -> BenchSummary:
    nan = float("nan")
    return BenchSummary(method, n, p, cfg.repetitions, 0, 0, nan, nan, nan, cfg.seed, skipped=True)


def run_benchmark(
    cfg: BenchConfig, progress: Optional[Callable[[BenchSummary], None]] = None
) -> List[BenchSummary]:
    """Run the full protocol over the ``n x p`` grid, one timing at a time."""
    cfg.validate()
    summaries = []
    for n in cfg.n_values:
        for p in cfg.p_values:
            X = generate_data(n, p, cfg.seed)
            for method in cfg.methods:
                fn = resolve_method(method, cfg.kernel)
                if fn is None:
                    log.warning("method %s unavailable, skipping", method)
                    summary = _skipped(method, n, p, cfg)
                else:
                    runtimes = time_calls(fn, X, cfg.repetitions, cfg.warmup_calls)
                    summary = summarize(BenchSample(method, n, p, runtimes), cfg)
                summaries.append(summary)
                if progress is not None:
                    progress(summary)
    return summaries


def speedup_ratios(
    summaries: Sequence[BenchSummary], reference: str = "bariance"
) -> Dict[Tuple[str, int, int], float]:
    """``trimmed_mean(method) / trimmed_mean(reference)`` per ``(method, n, p)``.

    Values above 1 mean the reference (bariance) path was faster.
    """
    by_key = {(s.method, s.n, s.p): s for s in summaries if not s.skipped}
    ratios = {}
    for (method, n, p), s in by_key.items():
        ref = by_key.get((reference, n, p))
        if method == reference or ref is None:
            continue
        ratios[(method, n, p)] = s.trimmed_mean_s / ref.trimmed_mean_s
    return ratios


def equivalence_sweep(
    n_values: Sequence[int],
    p_values: Sequence[int],
    draws_per_size: int,
    seed,
    kernel: Kernel = "serial",
) -> List[EquivalenceReport]:
    """Largest ``delta_max`` between the bariance and centered paths per size.

    Each draw gets its own N(0, 1) matrix, see :func:`equivalence_draws`.
    """
    if any(n < 2 for n in n_values):
        raise ValueError("every n must be at least 2")
    if draws_per_size < 1:
        raise ValueError("draws_per_size must be positive")
    reports = []
    for n in n_values:
        for p in p_values:
            deltas = equivalence_draws(n, p, draws_per_size, seed, kernel)
            reports.append(EquivalenceReport(n, p, max(deltas)))
    return reports


def equivalence_draws(n: int, p: int, draws: int, seed, kernel: Kernel = "serial") -> List[float]:
    """``delta_max`` for each of ``draws`` matrices from the streams ``(seed, n, p, draw)``."""
    deltas = []
    for draw in range(draws):
        X = make_rng(seed, n, p, draw).standard_normal((n, p))
        deltas.append(delta_max(cov_bariance(X, kernel=kernel), cov_centered(X, kernel=kernel)))
    return deltas
