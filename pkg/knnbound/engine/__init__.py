"""
Bound computation engine.

This module provides neighbor search, the inclusion-exclusion estimators, and
the data-dependent, data-independent, and per-combination bounds.
"""

from knnbound.engine.combination_validation import combination_bound
from knnbound.engine.dataset import generate_quadrant_dataset, partition
from knnbound.engine.dependent_bounds import compute_s_V, result_bound, test_bound
from knnbound.engine.independent_bounds import independent_bound, u_value
from knnbound.engine.neighbors import build_context, classify, classify_full

__all__ = [
    "generate_quadrant_dataset",
    "partition",
    "build_context",
    "classify",
    "classify_full",
    "compute_s_V",
    "result_bound",
    "test_bound",
    "combination_bound",
    "independent_bound",
    "u_value",
]
