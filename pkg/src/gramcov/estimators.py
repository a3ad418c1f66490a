"""Scalar and matrix covariance estimators.

The fast estimators use sufficient statistics only::

    Bar(x)   = (n*S_xx - S_x**2)   / (n*(n-1))
    C(x, y)  = (n*S_xy - S_x*S_y)  / (n*(n-1))
    Sigma(X) = (n*X^T X - s s^T)   / (n*(n-1)),   s = X^T 1

The O(n^2) pairwise-difference definitions and the explicit centering paths
are kept next to them as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientObservations, ShapeMismatch
from .matrix import Kernel, _rows, centering_matrix, column_sums, gram, mirror_upper, outer

__all__ = [
    "ScalarSums",
    "EquivalenceReport",
    "bariance_scalar",
    "bariance_scalar_bruteforce",
    "pairwise_cov_scalar",
    "pairwise_cov_bruteforce",
    "cov_bariance",
    "cov_centered",
    "cov_pairwise_bruteforce",
    "cov_via_centering_matrix",
    "cov_from_sums",
    "delta_max",
    "compare",
]


def _require_two(n: int) -> None:
    if n < 2:
        raise InsufficientObservations("need at least two observations")


def _denominator(n) -> float:
    return float(n) * (float(n) - 1.0)


@dataclass(frozen=True)
class ScalarSums:
    """Sufficient statistics ``(n, S_x, S_y, S_xx, S_yy, S_xy)`` of a pair of samples."""

    n: int
    sx: float
    sy: float
    sxx: float
    syy: float
    sxy: float

    @classmethod
    def from_data(cls, x, y=None) -> "ScalarSums":
        x = np.asarray(x, dtype=np.float64)
        y = x if y is None else np.asarray(y, dtype=np.float64)
        if x.ndim != 1 or y.ndim != 1:
            raise ShapeMismatch("samples must be 1-D")
        if x.shape != y.shape:
            raise ShapeMismatch(f"length mismatch: {x.size} vs {y.size}")
        # Same kernel and product order as the matrix path, so the scalar
        # results coincide bitwise with the matching covariance entries.
        sums = column_sums(np.column_stack([x, y, x * x, y * y, x * y]))
        return cls(int(x.size), *(float(v) for v in sums))

    @property
    def mean_x(self) -> float:
        return self.sx / self.n

    @property
    def mean_y(self) -> float:
        return self.sy / self.n

    def variance_x(self) -> float:
        _require_two(self.n)
        n = float(self.n)
        return (n * self.sxx - self.sx * self.sx) / _denominator(self.n)

    def variance_y(self) -> float:
        _require_two(self.n)
        n = float(self.n)
        return (n * self.syy - self.sy * self.sy) / _denominator(self.n)

    def covariance(self) -> float:
        _require_two(self.n)
        n = float(self.n)
        return (n * self.sxy - self.sx * self.sy) / _denominator(self.n)


def bariance_scalar(x) -> float:
    """Unbiased sample variance from two running sums, no centering pass."""
    return ScalarSums.from_data(x).variance_x()


def bariance_scalar_bruteforce(x) -> float:
    """Mean pairwise squared difference over ordered pairs ``i != j``, halved."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    _require_two(n)
    diff = x[:, None] - x[None, :]
    off = ~np.eye(n, dtype=bool)
    return float(np.sum((diff * diff)[off])) / (2.0 * _denominator(n))


def pairwise_cov_scalar(x, y) -> float:
    return ScalarSums.from_data(x, y).covariance()


def pairwise_cov_bruteforce(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeMismatch(f"length mismatch: {x.size} vs {y.size}")
    n = x.size
    _require_two(n)
    dx = x[:, None] - x[None, :]
    dy = y[:, None] - y[None, :]
    off = ~np.eye(n, dtype=bool)
    return float(np.sum((dx * dy)[off])) / (2.0 * _denominator(n))


def cov_from_sums(n: int, s: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Combine ``(n, s, G)`` into ``(n*G - s s^T) / (n*(n-1))``.

    Shared by the batch, weighted and streaming estimators so that equal
    sums always produce equal bits.
    """
    _require_two(n)
    cov = (float(n) * G - outer(s, s)) / _denominator(n)
    return mirror_upper(cov)


def cov_bariance(X, *, kernel: Kernel = "serial") -> np.ndarray:
    """Unbiased covariance of the columns of ``X`` without centering.

    Needs one Gram product and one rank-one correction; apart from ``p x p``
    work arrays nothing of size ``n x p`` is allocated.

    Parameters
    ----------
    X : array_like, shape (n, p)
        Observations in rows, ``n >= 2``.
    kernel : {"serial", "blas"}
        Gram kernel, see :func:`gramcov.matrix.gram`.

    Returns
    -------
    numpy.ndarray, shape (p, p)
        Symmetric covariance with denominator ``n - 1``.
    """
    X = _rows(X)
    n = X.shape[0]
    _require_two(n)
    return cov_from_sums(n, column_sums(X), gram(X, kernel=kernel))


def cov_centered(X, *, kernel: Kernel = "serial") -> np.ndarray:
    """Textbook covariance: demean into a fresh ``n x p`` array, then one Gram product."""
    X = _rows(X)
    n = X.shape[0]
    _require_two(n)
    mean = column_sums(X) / n
    centered = X - mean
    return gram(centered, kernel=kernel) / (n - 1.0)


def cov_pairwise_bruteforce(X) -> np.ndarray:
    """Literal sum of ``(x_i - x_j)(x_i - x_j)^T`` over unordered pairs ``i < j``.

    O(n^2 p^2); an oracle for small inputs only.
    """
    X = _rows(X)
    n, p = X.shape
    _require_two(n)
    i, j = np.triu_indices(n, 1)
    D = X[i] - X[j]
    total = np.sum(D[:, :, None] * D[:, None, :], axis=0)
    return mirror_upper(total / _denominator(n))


def cov_via_centering_matrix(X) -> np.ndarray:
    """``X^T H X / (n-1)`` with the centering matrix materialized.

    Test witness only; ``H`` is ``n x n``.
    """
    X = _rows(X)
    n = X.shape[0]
    _require_two(n)
    H = centering_matrix(n)
    return mirror_upper(X.T @ (H @ X) / (n - 1.0))


def delta_max(A, B) -> float:
    """Largest absolute entrywise difference ``max |A - B|``."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape:
        raise ShapeMismatch(f"shape mismatch: {A.shape} vs {B.shape}")
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A - B)))


@dataclass(frozen=True)
class EquivalenceReport:
    n: int
    p: int
    delta_max: float
    method_a: str = "bariance"
    method_b: str = "centered"


_METHODS = {
    "bariance": cov_bariance,
    "centered": cov_centered,
    "bruteforce": cov_pairwise_bruteforce,
    "centering-matrix": cov_via_centering_matrix,
}


def compare(X, method_a: str = "bariance", method_b: str = "centered") -> EquivalenceReport:
    """Run two estimators on the same data and report their ``delta_max``."""
    X = _rows(X)
    a = _METHODS[method_a](X)
    b = _METHODS[method_b](X)
    return EquivalenceReport(X.shape[0], X.shape[1], delta_max(a, b), method_a, method_b)
