"""Dense kernels: column sums, Gram product, outer product, centering matrix.

Matrices are float64 numpy arrays, observations in rows. Every reduction
over observations runs strictly left to right, one row at a time, starting
from 0.0. That fixed order is what makes the bariance and centered
estimators comparable bit for bit across runs, and it is why the kernels
here avoid ``ndarray.sum`` (which switches to pairwise summation on
contiguous data) and do not call BLAS unless asked to.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np

from .errors import InsufficientObservations, NonFiniteInput, ShapeMismatch

Kernel = Literal["serial", "blas"]

# Below this width the chunked accumulate path is faster than a per-row loop.
_NARROW_P = 24
# Element budget (64 KiB) for one chunk of stacked terms; keeps scratch independent of n.
_CHUNK_ELEMENTS = 1 << 13


def as_matrix(data, *, name: str = "X") -> np.ndarray:
    """Validate external input as an ``n x p`` matrix of finite float64.

    This is the ingestion boundary: NaN and infinity are rejected here so
    the kernels never have to test for them.
    """
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFiniteInput(f"{name} contains NaN or infinite entries")
    return np.ascontiguousarray(arr)


def as_vector(data, *, name: str = "x") -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeMismatch(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFiniteInput(f"{name} contains NaN or infinite entries")
    return arr


def _rows(X) -> np.ndarray:
    # Cheap coercion for the hot path; finiteness is an ingestion concern.
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D matrix, got shape {arr.shape}")
    return np.ascontiguousarray(arr)


def _weights_for(X: np.ndarray, weights) -> Optional[np.ndarray]:
    if weights is None:
        return None
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (X.shape[0],):
        raise ShapeMismatch(
            f"weights have shape {w.shape}, expected ({X.shape[0]},)"
        )
    return w


def mirror_upper(A: np.ndarray) -> np.ndarray:
    """Copy the upper triangle onto the lower one, in place."""
    lo_i, lo_j = np.tril_indices(A.shape[0], -1)
    A[lo_i, lo_j] = A[lo_j, lo_i]
    return A


def column_sums(X, weights=None) -> np.ndarray:
    """Sum each column over the observations, ``s = X^T 1``.

    With ``weights`` the result is ``X^T w``. An empty matrix gives a zero
    vector of length ``p``.
    """
    X = _rows(X)
    w = _weights_for(X, weights)
    n, p = X.shape
    s = np.zeros(p)
    if n == 0 or p == 0:
        return s
    m = max(1, _CHUNK_ELEMENTS // p)
    stack = np.empty((min(m, n) + 1, p))
    for start in range(0, n, m):
        chunk = X[start:start + m]
        k = chunk.shape[0]
        view = stack[:k + 1]
        view[0] = s
        if w is None:
            view[1:] = chunk
        else:
            np.multiply(w[start:start + k, None], chunk, out=view[1:])
        # accumulate is a sequential scan, so this is ((s + r0) + r1) + ...
        np.add.accumulate(view, axis=0, out=view)
        s = view[k].copy()
    return s


def gram(X, weights=None, *, kernel: Kernel = "serial") -> np.ndarray:
    """Gram matrix ``G = X^T X`` (or ``X^T W X`` with multiplicity weights).

    The serial kernel adds one rank-one term per row, so every entry is a
    left-to-right sum over observations. ``kernel="blas"`` hands the product
    to the linked BLAS: faster, but its summation order is unspecified and
    results may differ from the serial kernel in the last bits.
    The lower triangle is always a mirror of the upper one.
    """
    X = _rows(X)
    w = _weights_for(X, weights)
    n, p = X.shape
    if kernel == "blas":
        G = X.T @ X if w is None else (X.T * w) @ X
        return mirror_upper(np.ascontiguousarray(G))
    if kernel != "serial":
        raise ValueError(f"unknown Gram kernel {kernel!r}")

    G = np.zeros((p, p))
    if n == 0 or p == 0:
        return G
    if p <= _NARROW_P:
        G = _gram_chunked(X, w, G)
    else:
        buf = np.empty((p, p))
        for i, row in enumerate(X):
            np.multiply.outer(row, row, out=buf)
            if w is not None:
                buf *= w[i]
            G += buf
    return mirror_upper(G)


def _gram_chunked(X: np.ndarray, w: Optional[np.ndarray], G: np.ndarray) -> np.ndarray:
    n, p = X.shape
    m = max(1, _CHUNK_ELEMENTS // (p * p))
    stack = np.empty((min(m, n) + 1, p, p))
    for start in range(0, n, m):
        chunk = X[start:start + m]
        k = chunk.shape[0]
        view = stack[:k + 1]
        view[0] = G
        np.multiply(chunk[:, :, None], chunk[:, None, :], out=view[1:])
        if w is not None:
            view[1:] *= w[start:start + k, None, None]
        np.add.accumulate(view, axis=0, out=view)
        G = view[k].copy()
    return G


def outer(u, v) -> np.ndarray:
    """Outer product ``u v^T`` with shape ``len(u) x len(v)``."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return np.multiply.outer(u, v)


def centering_matrix(n: int) -> np.ndarray:
    """``H = I_n - (1/n) 1 1^T``.

    Only used to witness the centering-matrix identity in tests and the
    test-only estimator; it is ``n x n`` and never on the fast path.
    """
    if n < 1:
        raise InsufficientObservations("empty centering matrix")
    H = np.full((n, n), -1.0 / n)
    H[np.diag_indices(n)] += 1.0
    return H
