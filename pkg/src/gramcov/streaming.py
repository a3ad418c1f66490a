"""Online covariance from cumulative sums.

A :class:`StreamState` keeps the observation count ``t``, the running sum
``S`` and the running Gram matrix ``G``. Each update costs O(p^2) and the
covariance at any time is ``(t*G - S S^T) / (t*(t-1))``.

Far from the origin the rank-one subtraction cancels badly. An optional
constant ``shift`` is subtracted from every observation before it enters
the sums; covariance is shift invariant, so the estimate is unchanged in
exact arithmetic while the cancellation shrinks. Anchoring on the first
observation is usually enough.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import InsufficientObservations, NonFiniteInput, ShapeMismatch
from .estimators import cov_from_sums
from .matrix import as_matrix, mirror_upper


@dataclass(eq=False)
class StreamState:
    """Cumulative accumulator for one stream. Single writer; updates mutate in place."""

    p: int
    shift: np.ndarray
    t: int = 0
    S: np.ndarray = field(default=None)  # type: ignore[assignment]
    G: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.S is None:
            self.S = np.zeros(self.p)
        if self.G is None:
            self.G = np.zeros((self.p, self.p))
        self._buf = np.empty((self.p, self.p))

    @property
    def mean(self) -> np.ndarray:
        """Running mean in the original (unshifted) coordinates."""
        if self.t == 0:
            raise InsufficientObservations("mean of an empty stream")
        return self.S / self.t + self.shift

    def update(self, x) -> "StreamState":
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.p,):
            raise ShapeMismatch(f"observation has shape {x.shape}, expected ({self.p},)")
        if not np.isfinite(x).all():
            raise NonFiniteInput("observation contains NaN or infinite entries")
        y = x - self.shift
        np.multiply.outer(y, y, out=self._buf)
        self.t += 1
        self.S += y
        self.G += self._buf
        return self

    def extend(self, rows: Iterable) -> "StreamState":
        for row in rows:
            self.update(row)
        return self

    def covariance(self) -> np.ndarray:
        if self.t < 2:
            raise InsufficientObservations("need at least two observations")
        return cov_from_sums(self.t, self.S, self.G)

    def merge(self, other: "StreamState") -> "StreamState":
        """Combine two disjoint streams into a new state; neither input is modified."""
        if self.p != other.p:
            raise ShapeMismatch(f"dimension mismatch: {self.p} vs {other.p}")
        if not np.array_equal(self.shift, other.shift):
            raise ShapeMismatch("cannot merge streams anchored at different shifts")
        return StreamState(
            p=self.p,
            shift=self.shift.copy(),
            t=self.t + other.t,
            S=self.S + other.S,
            G=mirror_upper(self.G + other.G),
        )

    def copy(self) -> "StreamState":
        return StreamState(self.p, self.shift.copy(), self.t, self.S.copy(), self.G.copy())

    # Snapshot layout, a (p + 3) x p matrix:
    #   row 0: [t, 0, ..., 0]; row 1: shift; row 2: S; rows 3..: G
    def to_matrix(self) -> np.ndarray:
        header = np.zeros(self.p)
        header[0] = self.t
        return np.vstack([header, self.shift, self.S, self.G])

    @classmethod
    def from_matrix(cls, snapshot) -> "StreamState":
        M = as_matrix(snapshot, name="snapshot")
        p = M.shape[1]
        if p < 1 or M.shape[0] != p + 3:
            raise ShapeMismatch(f"snapshot must be (p+3) x p, got {M.shape}")
        t = M[0, 0]
        if t < 0 or t != int(t) or np.any(M[0, 1:] != 0):
            raise ShapeMismatch("malformed snapshot header row")
        return cls(p, M[1].copy(), int(t), M[2].copy(), M[3:].copy())


def stream_new(p: int, shift: Optional[Iterable[float]] = None) -> StreamState:
    if p < 1:
        raise ShapeMismatch("stream dimension must be at least 1")
    if shift is None:
        anchor = np.zeros(p)
    else:
        anchor = np.array(shift, dtype=np.float64)
        if anchor.shape != (p,):
            raise ShapeMismatch(f"shift has shape {anchor.shape}, expected ({p},)")
        if not np.isfinite(anchor).all():
            raise NonFiniteInput("shift contains NaN or infinite entries")
    return StreamState(p=p, shift=anchor)


def stream_update(state: StreamState, x) -> StreamState:
    return state.update(x)


def stream_cov(state: StreamState) -> np.ndarray:
    return state.covariance()


def stream_merge(a: StreamState, b: StreamState) -> StreamState:
    return a.merge(b)
