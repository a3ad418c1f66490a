"""Centering-free covariance: ``(n X^T X - s s^T) / (n (n-1))`` and friends."""

from .applications import PanelBlock, group_panel, panel_within_cov, panel_within_cov_all, sandwich_score_cov
from .errors import CovarianceError, InsufficientObservations, NonFiniteInput, ShapeMismatch
from .estimators import (
    EquivalenceReport,
    ScalarSums,
    bariance_scalar,
    bariance_scalar_bruteforce,
    compare,
    cov_bariance,
    cov_centered,
    cov_pairwise_bruteforce,
    cov_via_centering_matrix,
    delta_max,
    pairwise_cov_bruteforce,
    pairwise_cov_scalar,
)
from .matrix import as_matrix, as_vector, centering_matrix, column_sums, gram, outer
from .streaming import StreamState, stream_cov, stream_merge, stream_new, stream_update
from .weighted import WeightVector, cov_weighted, multinomial_weights

__version__ = "0.1.0"
