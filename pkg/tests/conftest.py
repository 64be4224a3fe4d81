"""
Shared test fixtures for all tests.

This module provides small seeded datasets, partitions, and configs that can be
used across all test files.
"""

import numpy as np
import pytest

from knnbound.engine.dataset import generate_quadrant_dataset, partition
from knnbound.engine.evidence import collect_evidence
from knnbound.models.bounds import BoundConfig
from knnbound.models.dataset import ExampleSet, LabeledExample

# ============================================================================
# Example Fixtures
# ============================================================================


@pytest.fixture
def line_examples():
    """Six one-dimensional examples with distinct tie-break values."""
    return ExampleSet.from_examples(
        [
            LabeledExample(input=(0.0,), label=0, tiebreak=0.10),
            LabeledExample(input=(1.0,), label=1, tiebreak=0.20),
            LabeledExample(input=(2.0,), label=1, tiebreak=0.30),
            LabeledExample(input=(3.0,), label=0, tiebreak=0.40),
            LabeledExample(input=(4.0,), label=1, tiebreak=0.50),
            LabeledExample(input=(5.0,), label=0, tiebreak=0.60),
        ]
    )


@pytest.fixture
def small_examples():
    """200 quadrant examples (seed 1)."""
    return generate_quadrant_dataset(200, seed=1)


@pytest.fixture
def medium_examples():
    """1000 quadrant examples (seed 2)."""
    return generate_quadrant_dataset(1000, seed=2)


@pytest.fixture
def tied_examples():
    """40 examples on a coarse grid, so many distances tie."""
    rng = np.random.default_rng(5)
    inputs = rng.integers(-2, 3, size=(40, 2)).astype(np.float64)
    labels = rng.integers(0, 2, size=40)
    return ExampleSet(inputs=inputs, labels=labels, tiebreaks=rng.random(40))


# ============================================================================
# Partition and Config Fixtures
# ============================================================================


@pytest.fixture
def small_config():
    """r = 2 subsets of 20 with a W tail of 20."""
    return BoundConfig(k=3, r=2, m=20, w=20)


@pytest.fixture
def small_partition(small_examples, small_config):
    """small_examples partitioned per small_config."""
    return partition(small_examples, small_config.r, small_config.m, small_config.w, small_config.k)


@pytest.fixture
def small_evidence(small_partition):
    """Evidence for small_partition."""
    return collect_evidence(small_partition)


@pytest.fixture
def three_subset_partition(medium_examples):
    """r = 3 subsets of 50 with a W tail of 50 over 1000 examples."""
    return partition(medium_examples, 3, 50, 50, 3)
