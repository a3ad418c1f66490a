"""Score covariance for sandwich estimators and per-unit panel covariances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Hashable, Iterable

import numpy as np

from .errors import InsufficientObservations
from .estimators import cov_bariance
from .matrix import _rows, column_sums, gram, mirror_upper, outer


def sandwich_score_cov(scores) -> np.ndarray:
    """Empirical covariance of per-observation score vectors (rows of ``scores``).

    This is the middle factor of a robust sandwich variance, scaled by
    ``1/(n-1)``. It is literally :func:`cov_bariance` on the score matrix.
    """
    return cov_bariance(scores)


@dataclass(frozen=True)
class PanelBlock:
    unit_id: Hashable
    X: np.ndarray


def panel_within_cov(block: PanelBlock) -> np.ndarray:
    """Covariance of one unit after the within (demeaning) transformation.

    Uses ``(X^T X - s s^T / T) / (T - 1)`` rather than forming ``M X``.
    """
    X = _rows(block.X)
    T = X.shape[0]
    if T < 2:
        raise InsufficientObservations(
            f"need at least two periods (unit {block.unit_id!r} has {T})"
        )
    s = column_sums(X)
    return mirror_upper((gram(X) - outer(s, s) / T) / (T - 1.0))


def panel_within_cov_all(blocks: Iterable[PanelBlock]) -> Dict[Hashable, np.ndarray]:
    blocks = list(blocks)
    for block in blocks:
        if np.shape(block.X)[0] < 2:
            raise InsufficientObservations(
                f"need at least two periods (unit {block.unit_id!r} has "
                f"{np.shape(block.X)[0]})"
            )
    return {block.unit_id: panel_within_cov(block) for block in blocks}


def group_panel(unit_ids, X) -> list[PanelBlock]:
    """Split long-format rows into blocks, one per unit, in first-seen order."""
    X = _rows(X)
    unit_ids = list(unit_ids)
    if len(unit_ids) != X.shape[0]:
        raise ValueError(f"{len(unit_ids)} unit ids for {X.shape[0]} rows")
    order: dict = {}
    for i, uid in enumerate(unit_ids):
        order.setdefault(uid, []).append(i)
    return [PanelBlock(uid, X[idx]) for uid, idx in order.items()]
