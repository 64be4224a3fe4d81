"""Tests for metric resolution and distance computation."""

import numpy as np
import pytest

from knnbound.engine.metrics import (
    CallableMetric,
    ChebyshevMetric,
    EuclideanMetric,
    ManhattanMetric,
    get_metric,
)
from knnbound.exceptions import ParameterError


class TestGetMetric:
    """Tests for get_metric()."""

    def test_default_is_euclidean(self):
        """Test that None resolves to Euclidean."""
        assert isinstance(get_metric(None), EuclideanMetric)

    @pytest.mark.parametrize(
        "name,cls",
        [
            ("euclidean", EuclideanMetric),
            ("L2", EuclideanMetric),
            ("manhattan", ManhattanMetric),
            ("l1", ManhattanMetric),
            ("chebyshev", ChebyshevMetric),
            ("linf", ChebyshevMetric),
        ],
    )
    def test_names_and_aliases(self, name, cls):
        """Test that registered names and aliases resolve case-insensitively."""
        assert isinstance(get_metric(name), cls)

    def test_instance_passthrough(self):
        """Test that Metric instances are returned unchanged."""
        metric = ManhattanMetric()
        assert get_metric(metric) is metric

    def test_unknown_metric(self):
        """Test that unknown names raise ParameterError."""
        with pytest.raises(ParameterError, match="Unknown metric"):
            get_metric("cosine")


class TestDistances:
    """Tests for pairwise and paired distances."""

    def test_minkowski_values(self):
        """Test L1, L2, and L-infinity on a 3-4 triangle."""
        queries = np.array([[0.0, 0.0]])
        points = np.array([[3.0, 4.0]])
        assert EuclideanMetric().pairwise(queries, points)[0, 0] == pytest.approx(5.0)
        assert ManhattanMetric().pairwise(queries, points)[0, 0] == pytest.approx(7.0)
        assert ChebyshevMetric().pairwise(queries, points)[0, 0] == pytest.approx(4.0)

    def test_pairwise_shape(self):
        """Test that pairwise returns (queries, points)."""
        out = EuclideanMetric().pairwise(np.zeros((3, 2)), np.ones((5, 2)))
        assert out.shape == (3, 5)

    def test_paired_matches_pairwise(self):
        """Test that paired distances agree with the pairwise matrix."""
        rng = np.random.default_rng(0)
        queries = rng.random((4, 3))
        points = rng.random((6, 3))
        idx = rng.integers(0, 6, size=(4, 2))
        metric = ManhattanMetric()
        full = metric.pairwise(queries, points)
        paired = metric.paired(queries, points[idx])
        assert np.allclose(paired, np.take_along_axis(full, idx, axis=1))

    def test_callable_metric_asymmetric(self):
        """Test that a callable metric is applied as func(query, example)."""
        metric = CallableMetric(lambda q, x: float(x[0] - q[0]) ** 2 + x[0])
        out = metric.pairwise(np.array([[0.0]]), np.array([[1.0], [2.0]]))
        assert out[0].tolist() == [2.0, 6.0]
        paired = metric.paired(np.array([[0.0]]), np.array([[[2.0], [1.0]]]))
        assert paired[0].tolist() == [6.0, 2.0]
