"""
Dissimilarity functions for neighbor ranking.

A metric maps (query, example) to a nonnegative real. It need not be symmetric.
Minkowski metrics also expose their order p so neighbor search can use a kd-tree
for candidate retrieval; every distance that enters a ranking is still computed
by the metric itself.
"""

from abc import ABC, abstractmethod
from collections.abc import Callable

import numpy as np

from knnbound.exceptions import ParameterError


class Metric(ABC):
    """
    Base class for all metrics.

    Subclasses implement `_reduce`, which turns coordinate differences
    (query - example, last axis = features) into distances.
    """

    name: str = "metric"
    minkowski_p: float | None = None

    @abstractmethod
    def _reduce(self, diff: np.ndarray) -> np.ndarray:
        """Collapse the last axis of a difference array into distances."""
        pass

    def pairwise(self, queries: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Distances from every query to every point, shape (len(queries), len(points))."""
        return self._reduce(queries[:, None, :] - points[None, :, :])

    def paired(self, queries: np.ndarray, points: np.ndarray) -> np.ndarray:
        """
        Distances from each query to its own candidate points.

        Args:
            queries: shape (q, dim)
            points: shape (q, c, dim)

        Returns:
            Distances of shape (q, c)
        """
        return self._reduce(queries[:, None, :] - points)


class EuclideanMetric(Metric):
    """Euclidean (L2) distance; the default."""

    name = "euclidean"
    minkowski_p = 2.0

    def _reduce(self, diff: np.ndarray) -> np.ndarray:
        return np.sqrt(np.sum(diff * diff, axis=-1))


class ManhattanMetric(Metric):
    """L1 distance."""

    name = "manhattan"
    minkowski_p = 1.0

    def _reduce(self, diff: np.ndarray) -> np.ndarray:
        return np.sum(np.abs(diff), axis=-1)


class ChebyshevMetric(Metric):
    """L-infinity distance."""

    name = "chebyshev"
    minkowski_p = np.inf

    def _reduce(self, diff: np.ndarray) -> np.ndarray:
        return np.max(np.abs(diff), axis=-1)


class CallableMetric(Metric):
    """
    Wrap an arbitrary dissimilarity function.

    The function is called as func(query, example) and may be asymmetric.
    Neighbor search with a callable metric always uses a linear scan.

    Example:
        CallableMetric(lambda q, x: float(np.abs(q - x).sum() + 0.1 * x[0]))
    """

    def __init__(self, func: Callable[[np.ndarray, np.ndarray], float], name: str = "callable"):
        self.func = func
        self.name = name

    def _reduce(self, diff: np.ndarray) -> np.ndarray:
        raise NotImplementedError("CallableMetric computes distances from raw vectors")

    def pairwise(self, queries: np.ndarray, points: np.ndarray) -> np.ndarray:
        out = np.empty((len(queries), len(points)), dtype=np.float64)
        for a, query in enumerate(queries):
            for b, point in enumerate(points):
                out[a, b] = self.func(query, point)
        return out

    def paired(self, queries: np.ndarray, points: np.ndarray) -> np.ndarray:
        out = np.empty(points.shape[:2], dtype=np.float64)
        for a, query in enumerate(queries):
            for b, point in enumerate(points[a]):
                out[a, b] = self.func(query, point)
        return out


METRIC_REGISTRY: dict[str, type[Metric]] = {
    "euclidean": EuclideanMetric,
    "manhattan": ManhattanMetric,
    "chebyshev": ChebyshevMetric,
    "l1": ManhattanMetric,  # Alias for 'manhattan'
    "l2": EuclideanMetric,  # Alias for 'euclidean'
    "linf": ChebyshevMetric,  # Alias for 'chebyshev'
}


def get_metric(metric: str | Metric | None = None) -> Metric:
    """
    Resolve a metric by name, passing Metric instances through.

    Raises:
        ParameterError: If the name is not registered
    """
    if metric is None:
        return EuclideanMetric()
    if isinstance(metric, Metric):
        return metric
    metric_class = METRIC_REGISTRY.get(metric.lower())
    if metric_class is None:
        raise ParameterError(
            f"Unknown metric '{metric}'. Available: {', '.join(sorted(METRIC_REGISTRY))}"
        )
    return metric_class()
