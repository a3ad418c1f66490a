"""Covariance of a bootstrap resample given as integer multiplicities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientObservations, ShapeMismatch
from ._rng import make_rng
from .estimators import cov_from_sums
from .matrix import _rows, column_sums, gram


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative integer multiplicities; ``n_star`` is the resample size."""

    w: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.w)
        if w.ndim != 1:
            raise ShapeMismatch("weights must be 1-D")
        if w.size and not np.issubdtype(w.dtype, np.integer):
            as_int = w.astype(np.int64)
            if not np.array_equal(as_int, w):
                raise ValueError("weights must be integers")
            w = as_int
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "w", w.astype(np.int64))

    @property
    def n_star(self) -> int:
        return int(self.w.sum())

    def __len__(self) -> int:
        return self.w.size


def multinomial_weights(n: int, rng_seed, index: int | None = None) -> WeightVector:
    """Draw a standard bootstrap resample of ``n`` rows as multiplicities.

    Uses PCG64 seeded from ``rng_seed``; pass ``index`` to get an independent
    stream per replicate, derived from ``(rng_seed, index)``.
    """
    if n < 1:
        raise ValueError("cannot resample from zero observations")
    rng = make_rng(rng_seed) if index is None else make_rng(rng_seed, index)
    return WeightVector(rng.multinomial(n, np.full(n, 1.0 / n)))


def cov_weighted(X, w) -> np.ndarray:
    """Covariance of the resample in which row ``i`` appears ``w[i]`` times.

    Works from the weighted pair ``(X^T W X, X^T w)`` and never expands the
    resample. The combination step is the same as the unweighted estimator,
    ``(n* G_w - s_w s_w^T) / (n* (n* - 1))``, so unit weights reproduce
    :func:`gramcov.estimators.cov_bariance` bit for bit.
    """
    X = _rows(X)
    if not isinstance(w, WeightVector):
        w = WeightVector(np.asarray(w))
    if len(w) != X.shape[0]:
        raise ShapeMismatch(f"{len(w)} weights for {X.shape[0]} observations")
    n_star = w.n_star
    if n_star < 2:
        raise InsufficientObservations("need at least two observations")
    keep = w.w > 0
    if keep.all():
        rows, mult = X, w.w.astype(np.float64)
    else:
        rows, mult = X[keep], w.w[keep].astype(np.float64)
    return cov_from_sums(n_star, column_sums(rows, mult), gram(rows, mult))
