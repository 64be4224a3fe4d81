"""
Tie-broken nearest-neighbor ranking and the conditions built on it.

Every example is ranked against a query by the key
(distance, |Z_example - Z_query|, position in F), compared lexicographically.
The key is a total order, so neighbor sets are deterministic.

A ContextBatch holds, for many queries at once:
    - the k nearest examples in F-V (the k-th one defines h(x)),
    - up to k nearest candidates from each validation subset V_i,
    - optionally the k-th nearest key in (F-V)-W (defines c_R').
Conditions b_S, c_S, c_R' and classifiers g_S are evaluated from these arrays
without rescanning the data. NeighborContext is the single-query view.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from knnbound.engine.metrics import Metric, get_metric
from knnbound.engine.subsets import full_mask, members, validate_mask
from knnbound.exceptions import ContextStateError, ParameterError
from knnbound.models.dataset import ExampleSet, LabeledExample, PartitionedDataset

# Relative gap below which a kd-tree boundary is treated as a possible tie
_BOUNDARY_TOLERANCE = 1e-9
_PAIRWISE_BUDGET = 4_000_000


class RankKey(NamedTuple):
    """Comparable ranking key of an example relative to a query."""

    distance: float
    gap: float
    position: int


def rank_distance(
    example: LabeledExample,
    query: np.ndarray,
    query_tiebreak: float,
    position: int,
    metric: Metric | str | None = None,
) -> RankKey:
    """
    Ranking key of one example for one query.

    Args:
        example: The in-sample example
        query: Query input vector
        query_tiebreak: The query's tie-break value Z
        position: The example's position in F
        metric: Dissimilarity function (default Euclidean)
    """
    resolved = get_metric(metric)
    point = np.asarray(example.input, dtype=np.float64)
    q = np.asarray(query, dtype=np.float64)
    distance = float(resolved.pairwise(q[None, :], point[None, :])[0, 0])
    return RankKey(distance, abs(example.tiebreak - query_tiebreak), position)


def key_less(
    dist_a: np.ndarray,
    gap_a: np.ndarray,
    pos_a: np.ndarray,
    dist_b: np.ndarray,
    gap_b: np.ndarray,
    pos_b: np.ndarray,
) -> np.ndarray:
    """Elementwise strict comparison key_a < key_b (broadcasting)."""
    same_dist = dist_a == dist_b
    return (dist_a < dist_b) | (same_dist & (gap_a < gap_b)) | (
        same_dist & (gap_a == gap_b) & (pos_a < pos_b)
    )


@dataclass(frozen=True)
class NeighborList:
    """Tie-broken nearest examples per query, best first; shape (q, c) for each array."""

    dist: np.ndarray
    gap: np.ndarray
    pos: np.ndarray
    label: np.ndarray

    @property
    def count(self) -> int:
        return int(self.dist.shape[1])


def _sort_by_key(dist: np.ndarray, gap: np.ndarray, pos: np.ndarray) -> np.ndarray:
    """Row-wise order of candidates by (distance, gap, position)."""
    return np.lexsort((pos, gap, dist), axis=-1)


class NeighborIndex:
    """
    Exact tie-broken k-NN search over a subset of F's positions.

    Minkowski metrics retrieve candidates through a kd-tree; a row whose boundary
    could hide a tie is recomputed by linear scan, so results always equal the scan.
    """

    def __init__(
        self, examples: ExampleSet, positions: np.ndarray, metric: Metric | str | None = None
    ):
        self.metric = get_metric(metric)
        self.positions = np.asarray(positions, dtype=np.int64)
        self.points = examples.inputs[self.positions]
        self.tiebreaks = examples.tiebreaks[self.positions]
        self.labels = examples.labels[self.positions]
        self._tree = (
            cKDTree(self.points)
            if self.metric.minkowski_p is not None and len(self.positions) > 0
            else None
        )

    def __len__(self) -> int:
        return int(self.positions.shape[0])

    def nearest(self, queries: np.ndarray, query_tiebreaks: np.ndarray, count: int) -> NeighborList:
        """
        The min(count, size) tie-broken nearest examples for each query.

        Args:
            queries: Query inputs, shape (q, dim)
            query_tiebreaks: Query tie-break values, shape (q,)
            count: Number of neighbors wanted
        """
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        query_tiebreaks = np.asarray(query_tiebreaks, dtype=np.float64).reshape(-1)
        size = len(self)
        c = min(count, size)
        q = queries.shape[0]
        local = np.zeros((q, c), dtype=np.int64)
        if c == 0 or q == 0:
            return self._gather(queries, query_tiebreaks, local)

        if self._tree is not None and size > c + 1:
            ambiguous = self._tree_candidates(queries, c, local)
        else:
            ambiguous = np.arange(q)
        if ambiguous.size:
            self._scan_candidates(
                queries[ambiguous], query_tiebreaks[ambiguous], c, local, ambiguous
            )
        return self._gather(queries, query_tiebreaks, local)

    def _tree_candidates(self, queries: np.ndarray, c: int, out: np.ndarray) -> np.ndarray:
        """Fill `out` for rows with an unambiguous boundary; return the other rows."""
        assert self._tree is not None
        fetch = c + 1
        tree_dist, idx = self._tree.query(
            queries, k=list(range(1, fetch + 1)), p=self.metric.minkowski_p
        )
        dist = self.metric.paired(queries, self.points[idx])
        order = np.argsort(dist, axis=1, kind="stable")
        sorted_dist = np.take_along_axis(dist, order, axis=1)
        boundary = sorted_dist[:, c - 1]
        horizon = np.minimum(sorted_dist[:, c], tree_dist[:, fetch - 1])
        clear = boundary < horizon * (1.0 - _BOUNDARY_TOLERANCE)
        out[clear] = np.take_along_axis(idx, order[:, :c], axis=1)[clear]
        return np.flatnonzero(~clear)

    def _scan_candidates(
        self,
        queries: np.ndarray,
        query_tiebreaks: np.ndarray,
        c: int,
        out: np.ndarray,
        rows: np.ndarray,
    ) -> None:
        """Exact selection by linear scan for the given rows."""
        size = len(self)
        chunk = max(1, _PAIRWISE_BUDGET // max(1, size * self.points.shape[1]))
        for start in range(0, len(rows), chunk):
            stop = min(start + chunk, len(rows))
            dist = self.metric.pairwise(queries[start:stop], self.points)
            for offset, row in enumerate(range(start, stop)):
                out[rows[row]] = self._select_exact(dist[offset], query_tiebreaks[row], c)

    def _select_exact(self, dist: np.ndarray, query_tiebreak: float, c: int) -> np.ndarray:
        if c < dist.shape[0]:
            boundary = np.partition(dist, c - 1)[c - 1]
            candidates = np.flatnonzero(dist <= boundary)
        else:
            candidates = np.arange(dist.shape[0])
        gap = np.abs(self.tiebreaks[candidates] - query_tiebreak)
        order = np.lexsort((self.positions[candidates], gap, dist[candidates]))
        return candidates[order[:c]]

    def _gather(
        self, queries: np.ndarray, query_tiebreaks: np.ndarray, local: np.ndarray
    ) -> NeighborList:
        if local.shape[1] == 0:
            empty = np.zeros(local.shape, dtype=np.float64)
            return NeighborList(empty, empty.copy(), local.copy(), local.astype(np.int8))
        dist = self.metric.paired(queries, self.points[local])
        gap = np.abs(self.tiebreaks[local] - query_tiebreaks[:, None])
        pos = self.positions[local]
        order = _sort_by_key(dist, gap, pos)
        local = np.take_along_axis(local, order, axis=1)
        return NeighborList(
            dist=np.take_along_axis(dist, order, axis=1),
            gap=np.take_along_axis(gap, order, axis=1),
            pos=pos[np.arange(len(pos))[:, None], order],
            label=self.labels[local],
        )


def _pad(values: np.ndarray, width: int, fill: float | int) -> np.ndarray:
    if values.shape[1] >= width:
        return values
    pad = np.full((values.shape[0], width - values.shape[1]), fill, dtype=values.dtype)
    return np.concatenate([values, pad], axis=1)


@dataclass(frozen=True)
class ContextBatch:
    """
    Neighbor state for a batch of queries against one partition.

    Candidate arrays have shape (q, r, k); subsets smaller than k are padded with
    infinite keys that never enter a top-k merge.
    """

    k: int
    r: int
    base: NeighborList
    cand_dist: np.ndarray
    cand_gap: np.ndarray
    cand_pos: np.ndarray
    cand_label: np.ndarray
    reduced: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    def __len__(self) -> int:
        return int(self.base.dist.shape[0])

    @property
    def h(self) -> np.ndarray:
        """h(x): distance to the k-th nearest example in F-V."""
        return self.base.dist[:, self.k - 1]

    @property
    def h_reduced(self) -> np.ndarray | None:
        """Distance to the k-th nearest example in (F-V)-W, when W is present."""
        return None if self.reduced is None else self.reduced[0]

    def closer_masks(self) -> np.ndarray:
        """b_S per query: bit i set iff V_{i+1} ranks an example before the k-th base neighbor."""
        kth = self.k - 1
        hits = key_less(
            self.cand_dist[:, :, 0],
            self.cand_gap[:, :, 0],
            self.cand_pos[:, :, 0],
            self.base.dist[:, kth, None],
            self.base.gap[:, kth, None],
            self.base.pos[:, kth, None],
        )
        weights = np.left_shift(1, np.arange(self.r, dtype=np.int64))
        return (hits.astype(np.int64) * weights).sum(axis=1)

    def prime_masks(self) -> np.ndarray:
        """Like closer_masks, but against the k-th neighbor in (F-V)-W."""
        if self.reduced is None:
            raise ContextStateError("c_R' needs a context built with w > 0")
        dist, gap, pos = self.reduced
        hits = key_less(
            self.cand_dist[:, :, 0],
            self.cand_gap[:, :, 0],
            self.cand_pos[:, :, 0],
            dist[:, None],
            gap[:, None],
            pos[:, None],
        )
        weights = np.left_shift(1, np.arange(self.r, dtype=np.int64))
        return (hits.astype(np.int64) * weights).sum(axis=1)

    def condition_c(self, s_mask: int) -> np.ndarray:
        """c_S per query."""
        validate_mask(s_mask, self.r)
        return (self.closer_masks() & s_mask) == s_mask

    def condition_c_prime(self) -> np.ndarray:
        """c_R' per query."""
        return self.prime_masks() == full_mask(self.r)

    def classify(self, s_mask: int) -> np.ndarray:
        """g_S per query: majority label of the top k in (F-V) u V_S."""
        validate_mask(s_mask, self.r)
        if self.k % 2 == 0:
            raise ParameterError(f"k must be odd to classify by majority, got {self.k}")
        subsets = members(s_mask)
        if not subsets:
            votes = self.base.label.sum(axis=1, dtype=np.int64)
            return (2 * votes > self.k).astype(np.int8)
        dist = np.concatenate([self.base.dist] + [self.cand_dist[:, i] for i in subsets], axis=1)
        gap = np.concatenate([self.base.gap] + [self.cand_gap[:, i] for i in subsets], axis=1)
        pos = np.concatenate([self.base.pos] + [self.cand_pos[:, i] for i in subsets], axis=1)
        label = np.concatenate([self.base.label] + [self.cand_label[:, i] for i in subsets], axis=1)
        order = _sort_by_key(dist, gap, pos)[:, : self.k]
        votes = np.take_along_axis(label, order, axis=1).sum(axis=1, dtype=np.int64)
        return (2 * votes > self.k).astype(np.int8)

    def error_matrix(self, labels: np.ndarray) -> np.ndarray:
        """I(g_S(x) != y) for every S, shape (q, 2^r); column S is the mask S."""
        labels = np.asarray(labels)
        columns = [self.classify(s) != labels for s in range(1 << self.r)]
        return np.stack(columns, axis=1)

    def context(self, j: int, query: np.ndarray, query_tiebreak: float) -> "NeighborContext":
        """Single-query view of row j."""
        row = slice(j, j + 1)
        reduced = None
        if self.reduced is not None:
            reduced = (self.reduced[0][row], self.reduced[1][row], self.reduced[2][row])
        return NeighborContext(
            query=np.asarray(query, dtype=np.float64),
            query_tiebreak=float(query_tiebreak),
            batch=ContextBatch(
                k=self.k,
                r=self.r,
                base=NeighborList(
                    self.base.dist[row],
                    self.base.gap[row],
                    self.base.pos[row],
                    self.base.label[row],
                ),
                cand_dist=self.cand_dist[row],
                cand_gap=self.cand_gap[row],
                cand_pos=self.cand_pos[row],
                cand_label=self.cand_label[row],
                reduced=reduced,
            ),
        )


@dataclass(frozen=True)
class NeighborContext:
    """
    Neighbor state for one query.

    Attributes mirror the batch arrays for a single row; use the module-level
    functions (condition_c, classify, ...) to evaluate conditions.
    """

    query: np.ndarray
    query_tiebreak: float
    batch: ContextBatch

    @property
    def k(self) -> int:
        return self.batch.k

    @property
    def r(self) -> int:
        return self.batch.r

    @property
    def h(self) -> float:
        return float(self.batch.h[0])

    @property
    def h_reduced(self) -> float | None:
        reduced = self.batch.h_reduced
        return None if reduced is None else float(reduced[0])

    @property
    def base_neighbors(self) -> list[RankKey]:
        base = self.batch.base
        return [
            RankKey(float(base.dist[0, j]), float(base.gap[0, j]), int(base.pos[0, j]))
            for j in range(base.count)
        ]

    def subset_candidates(self, i: int) -> list[RankKey]:
        """Candidate keys from V_{i+1}, best first, padding dropped."""
        return [
            RankKey(
                float(self.batch.cand_dist[0, i, j]),
                float(self.batch.cand_gap[0, i, j]),
                int(self.batch.cand_pos[0, i, j]),
            )
            for j in range(self.k)
            if np.isfinite(self.batch.cand_dist[0, i, j])
        ]


class PartitionIndex:
    """
    The neighbor indexes a partition needs: F-V, each V_i, and (F-V)-W.

    Built once per partition and reused for every batch of queries.
    """

    def __init__(self, dataset: PartitionedDataset, metric: Metric | str | None = None):
        self.dataset = dataset
        self.metric = get_metric(metric)
        examples = dataset.examples
        self.remainder = NeighborIndex(examples, dataset.remainder_positions(), self.metric)
        self.subsets = [
            NeighborIndex(examples, dataset.subset_positions(i), self.metric)
            for i in range(dataset.r)
        ]
        self.reduced = (
            NeighborIndex(examples, dataset.reduced_positions(), self.metric)
            if dataset.w > 0
            else None
        )

    def batch(
        self,
        queries: np.ndarray,
        query_tiebreaks: np.ndarray,
        include_base: bool = True,
    ) -> ContextBatch:
        """
        Build contexts for many queries.

        With include_base=False only the subset candidates and the (F-V)-W key are
        computed (enough for c_R'); base arrays are then filled with infinite keys.
        """
        k = self.dataset.k
        r = self.dataset.r
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        query_tiebreaks = np.asarray(query_tiebreaks, dtype=np.float64).reshape(-1)
        q = queries.shape[0]

        if len(self.remainder) < k:
            raise ParameterError(f"F-V has {len(self.remainder)} examples, fewer than k = {k}")
        if include_base:
            base = self.remainder.nearest(queries, query_tiebreaks, k)
        else:
            inf = np.full((q, k), np.inf)
            base = NeighborList(
                inf, inf.copy(), np.full((q, k), -1, np.int64), np.zeros((q, k), np.int8)
            )

        count = k if include_base else 1
        lists = [index.nearest(queries, query_tiebreaks, count) for index in self.subsets]
        cand_dist = np.stack([_pad(nl.dist, count, np.inf) for nl in lists], axis=1)
        cand_gap = np.stack([_pad(nl.gap, count, np.inf) for nl in lists], axis=1)
        cand_pos = np.stack([_pad(nl.pos, count, np.iinfo(np.int64).max) for nl in lists], axis=1)
        cand_label = np.stack([_pad(nl.label, count, 0) for nl in lists], axis=1)

        reduced = None
        if self.reduced is not None:
            if len(self.reduced) < k:
                raise ParameterError(
                    f"(F-V)-W has {len(self.reduced)} examples, fewer than k = {k}"
                )
            nl = self.reduced.nearest(queries, query_tiebreaks, k)
            reduced = (nl.dist[:, k - 1], nl.gap[:, k - 1], nl.pos[:, k - 1])

        return ContextBatch(
            k=k,
            r=r,
            base=base,
            cand_dist=cand_dist,
            cand_gap=cand_gap,
            cand_pos=cand_pos,
            cand_label=cand_label,
            reduced=reduced,
        )


def build_context(
    dataset: PartitionedDataset,
    query: np.ndarray | LabeledExample,
    query_tiebreak: float | None = None,
    metric: Metric | str | None = None,
) -> NeighborContext:
    """
    Build the neighbor context of a single query.

    Args:
        dataset: The partitioned in-sample data
        query: Query input, or a LabeledExample whose tiebreak is used
        query_tiebreak: The query's tie-break value (required for raw inputs)
        metric: Dissimilarity function (default Euclidean)

    Raises:
        ParameterError: If F-V (or (F-V)-W when w > 0) has fewer than k examples
    """
    if isinstance(query, LabeledExample):
        point = np.asarray(query.input, dtype=np.float64)
        tiebreak = query.tiebreak if query_tiebreak is None else query_tiebreak
    else:
        point = np.asarray(query, dtype=np.float64).reshape(-1)
        if query_tiebreak is None:
            raise ParameterError("A query tie-break value is required")
        tiebreak = query_tiebreak
    index = PartitionIndex(dataset, metric)
    batch = index.batch(point[None, :], np.array([tiebreak]))
    return batch.context(0, point, tiebreak)


def condition_c(ctx: NeighborContext, s_mask: int) -> bool:
    """True iff every V_i with i in S has an example ranked before the k-th neighbor in F-V."""
    return bool(ctx.batch.condition_c(s_mask)[0])


def condition_b(ctx: NeighborContext) -> int:
    """The unique S for which b_S(x) holds."""
    return int(ctx.batch.closer_masks()[0])


def condition_c_prime(ctx: NeighborContext) -> bool:
    """
    True iff every V_i has an example ranked before the k-th neighbor in (F-V)-W.

    Raises:
        ContextStateError: If the partition has no W
    """
    return bool(ctx.batch.condition_c_prime()[0])


def classify(ctx: NeighborContext, s_mask: int) -> int:
    """
    g_S(x), the majority label over the k nearest examples in (F-V) u V_S.

    Raises:
        ParameterError: If k is even
    """
    return int(ctx.batch.classify(s_mask)[0])


def classify_full(
    examples: ExampleSet,
    queries: np.ndarray,
    query_tiebreaks: np.ndarray,
    k: int,
    metric: Metric | str | None = None,
    index: NeighborIndex | None = None,
) -> np.ndarray:
    """
    g*(x) for many queries: the k-NN classifier built from every example in F.

    Raises:
        ParameterError: If k is even or larger than F
    """
    if k % 2 == 0:
        raise ParameterError(f"k must be odd, got {k}")
    if k > len(examples):
        raise ParameterError(f"k = {k} exceeds the number of examples {len(examples)}")
    if index is None:
        index = NeighborIndex(examples, np.arange(len(examples)), metric)
    neighbors = index.nearest(queries, query_tiebreaks, k)
    votes = neighbors.label.sum(axis=1, dtype=np.int64)
    return (2 * votes > k).astype(np.int8)
