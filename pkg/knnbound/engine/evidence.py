"""
Per-partition evidence shared by every bound variant.

For each validation example the evidence stores the b-mask (which subsets beat
h(x)) and the error indicators I(g_S(x) != y) for all 2^r subsets S. For each W
example it stores whether c_R' holds. f_i, f_A, the direct double sum, and the
W term are all cheap functions of these arrays, so a partition is scanned once
no matter how many depths or variants are evaluated.
"""

import math
from dataclasses import dataclass

import numpy as np

from knnbound.engine.metrics import Metric
from knnbound.engine.neighbors import PartitionIndex
from knnbound.engine.subsets import (
    enumerate_pairs,
    f_i_terms,
    full_mask,
    members,
    popcount,
    submasks,
)
from knnbound.exceptions import ContextStateError, ParameterError
from knnbound.logging_config import get_logger
from knnbound.models.dataset import PartitionedDataset

logger = get_logger(__name__)


@dataclass(frozen=True)
class PartitionEvidence:
    """Neighbor-derived indicators for one partition."""

    n: int
    k: int
    sizes: tuple[int, ...]
    w: int
    closer: list[np.ndarray]  # per subset i: b-mask per example of V_i
    errors: list[np.ndarray]  # per subset i: (|V_i|, 2^r) error indicators
    holdout_prime: np.ndarray | None  # c_R' per example of W

    @property
    def r(self) -> int:
        return len(self.sizes)

    @property
    def w_hits(self) -> int:
        """Number of W examples with c_R'."""
        if self.holdout_prime is None:
            raise ContextStateError("No W examples were collected (w = 0)")
        return int(np.count_nonzero(self.holdout_prime))

    def c_indicator(self, i: int, union_mask: int) -> np.ndarray:
        """c_{S u T}(x) for each example of V_i."""
        return (self.closer[i] & union_mask) == union_mask

    def f_values(self, i: int, depth: int | None = None) -> np.ndarray:
        """f_i evaluated on every example of V_i (untruncated when depth is None)."""
        d = self.r if depth is None else depth
        values = np.zeros(self.sizes[i], dtype=np.float64)
        for term in f_i_terms(i, self.sizes, d):
            hit = self.c_indicator(i, term.union_mask) & self.errors[i][:, term.s_mask]
            values += term.sign * term.coefficient * hit
        return values

    def f_A_values(self, a_mask: int) -> np.ndarray:
        """
        f_A on every example of V_{R-A}, pooled in subset order.

        f_A = sum over S in A of (-1)^{|A-S|} I(c_A(x) and g_S(x) != y).
        """
        full = full_mask(self.r)
        if a_mask == full or a_mask & ~full:
            raise ParameterError(f"A must be a proper subset of R, got {a_mask:#b}")
        pooled = []
        for i in members(full & ~a_mask):
            c_a = self.c_indicator(i, a_mask)
            values = np.zeros(self.sizes[i], dtype=np.float64)
            for s_mask in submasks(a_mask):
                sign = -1.0 if popcount(a_mask & ~s_mask) % 2 else 1.0
                values += sign * (c_a & self.errors[i][:, s_mask])
            pooled.append(values)
        return np.concatenate(pooled)

    def direct_s_V(self, depth: int | None = None) -> float:
        """
        s_V as the signed double sum over (S, T) with S u T a proper subset of R,
        each term averaged over the pooled examples of V_{R-(S u T)}.
        """
        d = self.r if depth is None else depth
        full = full_mask(self.r)
        terms = []
        for s_mask, t_mask in enumerate_pairs(full, d):
            union = s_mask | t_mask
            if union == full:
                continue
            outside = members(full & ~union)
            hits = sum(
                int(np.count_nonzero(self.c_indicator(i, union) & self.errors[i][:, s_mask]))
                for i in outside
            )
            pooled = sum(self.sizes[i] for i in outside)
            sign = -1 if popcount(t_mask) % 2 else 1
            terms.append(sign * hits / pooled)
        return math.fsum(terms)


def collect_evidence(
    dataset: PartitionedDataset,
    metric: Metric | str | None = None,
    index: PartitionIndex | None = None,
) -> PartitionEvidence:
    """
    Scan a partition once: contexts for every validation and W example.

    Validation examples query with their own tie-break values. Their own
    subset's candidates are never read by f_i or f_A.
    """
    index = index or PartitionIndex(dataset, metric)
    examples = dataset.examples
    closer = []
    errors = []
    for i in range(dataset.r):
        positions = dataset.subset_positions(i)
        batch = index.batch(examples.inputs[positions], examples.tiebreaks[positions])
        closer.append(batch.closer_masks())
        errors.append(batch.error_matrix(examples.labels[positions]))

    holdout_prime = None
    if dataset.w > 0:
        positions = dataset.holdout_positions()
        batch = index.batch(
            examples.inputs[positions], examples.tiebreaks[positions], include_base=False
        )
        holdout_prime = batch.condition_c_prime()

    evidence = PartitionEvidence(
        n=dataset.n,
        k=dataset.k,
        sizes=dataset.subset_sizes,
        w=dataset.w,
        closer=closer,
        errors=errors,
        holdout_prime=holdout_prime,
    )
    logger.debug(
        "evidence_collected",
        n=dataset.n,
        r=dataset.r,
        validation_queries=dataset.validation_size,
        holdout_queries=dataset.w,
        w_hits=None if holdout_prime is None else evidence.w_hits,
    )
    return evidence
