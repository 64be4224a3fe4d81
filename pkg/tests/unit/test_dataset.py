"""Tests for dataset models, generation, reordering, and partitioning."""

import itertools
from collections import Counter

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import chisquare

from knnbound.engine.dataset import (
    generate_quadrant_dataset,
    partition,
    quadrant_label,
    sample_permutations,
    shuffle_with_permutation,
    validate_permutation,
)
from knnbound.exceptions import ParameterError
from knnbound.models.dataset import ExampleSet, LabeledExample, PartitionedDataset


class TestLabeledExample:
    """Tests for LabeledExample validation."""

    def test_valid_example(self):
        """Test a well-formed example."""
        example = LabeledExample(input=(0.5, -0.25), label=1, tiebreak=0.3)
        assert example.input == (0.5, -0.25)

    def test_label_must_be_binary(self):
        """Test that labels other than 0 and 1 are rejected."""
        with pytest.raises(ValidationError):
            LabeledExample(input=(0.0,), label=2, tiebreak=0.5)

    def test_tiebreak_range(self):
        """Test that tie-break values outside [0, 1] are rejected."""
        with pytest.raises(ValidationError):
            LabeledExample(input=(0.0,), label=0, tiebreak=1.5)

    def test_empty_input_rejected(self):
        """Test that an empty input vector is rejected."""
        with pytest.raises(ValidationError):
            LabeledExample(input=(), label=0, tiebreak=0.5)


class TestExampleSet:
    """Tests for ExampleSet."""

    def test_arrays_are_read_only(self, line_examples):
        """Test that stored arrays cannot be modified."""
        with pytest.raises(ValueError):
            line_examples.labels[0] = 1

    def test_example_round_trip(self, line_examples):
        """Test that example() returns the stored values."""
        example = line_examples.example(2)
        assert example.input == (2.0,)
        assert example.label == 1
        assert example.tiebreak == pytest.approx(0.3)

    def test_take_reorders(self, line_examples):
        """Test that take() returns examples in the requested order."""
        taken = line_examples.take(np.array([5, 0]))
        assert taken.inputs[:, 0].tolist() == [5.0, 0.0]
        assert taken.labels.tolist() == [0, 0]

    def test_mismatched_shapes(self):
        """Test that labels must match the number of inputs."""
        with pytest.raises(ValidationError):
            ExampleSet(inputs=[[0.0], [1.0]], labels=[0], tiebreaks=[0.1, 0.2])

    def test_from_examples_empty(self):
        """Test that an empty list raises ParameterError."""
        with pytest.raises(ParameterError):
            ExampleSet.from_examples([])

    def test_from_examples_inconsistent_dims(self):
        """Test that inputs must share a dimension."""
        with pytest.raises(ParameterError):
            ExampleSet.from_examples(
                [
                    LabeledExample(input=(0.0,), label=0, tiebreak=0.1),
                    LabeledExample(input=(0.0, 1.0), label=0, tiebreak=0.2),
                ]
            )


class TestQuadrantGeneration:
    """Tests for the quadrant-parity generator."""

    def test_quadrant_label(self):
        """Test the noiseless parity label."""
        inputs = np.array([[0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5], [0.5, -0.5]])
        assert quadrant_label(inputs).tolist() == [1, 0, 1, 0]

    def test_deterministic(self):
        """Test that the same seed yields identical data."""
        a = generate_quadrant_dataset(100, seed=7)
        b = generate_quadrant_dataset(100, seed=7)
        assert np.array_equal(a.inputs, b.inputs)
        assert np.array_equal(a.labels, b.labels)
        assert np.array_equal(a.tiebreaks, b.tiebreaks)

    def test_different_seeds_differ(self):
        """Test that different seeds yield different data."""
        a = generate_quadrant_dataset(100, seed=7)
        b = generate_quadrant_dataset(100, seed=8)
        assert not np.array_equal(a.inputs, b.inputs)

    def test_shape_and_ranges(self):
        """Test shapes and value domains."""
        examples = generate_quadrant_dataset(500, dim=3, seed=0)
        assert examples.inputs.shape == (500, 3)
        assert np.all(np.abs(examples.inputs) <= 1.0)
        assert set(np.unique(examples.labels)) <= {0, 1}

    def test_zero_noise_is_noiseless(self):
        """Test that noise=0 gives the parity label everywhere."""
        examples = generate_quadrant_dataset(300, noise=0.0, seed=3)
        assert np.array_equal(examples.labels, quadrant_label(examples.inputs))

    def test_noise_rate(self):
        """Test that roughly a noise fraction of labels is flipped."""
        examples = generate_quadrant_dataset(20000, noise=0.1, seed=4)
        flipped = np.mean(examples.labels != quadrant_label(examples.inputs))
        assert flipped == pytest.approx(0.1, abs=0.01)

    @pytest.mark.parametrize("kwargs", [{"n": 0}, {"n": 10, "dim": 0}, {"n": 10, "noise": 1.5}])
    def test_invalid_parameters(self, kwargs):
        """Test that invalid parameters raise ParameterError."""
        with pytest.raises(ParameterError):
            generate_quadrant_dataset(**kwargs)


class TestPermutations:
    """Tests for permutation helpers."""

    def test_validate_rejects_duplicates(self):
        """Test that a non-bijection is rejected."""
        with pytest.raises(ParameterError):
            validate_permutation([0, 0, 1], 3)

    def test_validate_rejects_wrong_length(self):
        """Test that a permutation of the wrong length is rejected."""
        with pytest.raises(ParameterError):
            validate_permutation([0, 1], 3)

    def test_shuffle_semantics(self, line_examples):
        """Test that position i of the result holds position perm[i] of the input."""
        perm = [3, 1, 5, 0, 2, 4]
        shuffled = shuffle_with_permutation(line_examples, perm)
        for i, source in enumerate(perm):
            assert shuffled.inputs[i, 0] == line_examples.inputs[source, 0]
            assert shuffled.tiebreaks[i] == line_examples.tiebreaks[source]

    def test_identity_shuffle(self, line_examples):
        """Test that the identity permutation changes nothing."""
        shuffled = shuffle_with_permutation(line_examples, list(range(6)))
        assert np.array_equal(shuffled.inputs, line_examples.inputs)

    def test_sample_permutations(self):
        """Test that sampled rows are permutations and reproducible."""
        perms = sample_permutations(10, 5, seed=3)
        assert perms.shape == (5, 10)
        for row in perms:
            assert sorted(row.tolist()) == list(range(10))
        assert np.array_equal(perms, sample_permutations(10, 5, seed=3))

    def test_sample_permutations_uniform(self):
        """Test that the 24 orderings of four items are equally likely."""
        perms = sample_permutations(4, 10_000, seed=17)
        counts = Counter(tuple(row) for row in perms.tolist())
        observed = [counts[ordering] for ordering in itertools.permutations(range(4))]
        assert sum(observed) == 10_000
        assert chisquare(observed).pvalue > 1e-3

    def test_sample_permutations_prefix_stable(self):
        """Test that permutation j does not depend on q."""
        assert np.array_equal(sample_permutations(10, 3, 9), sample_permutations(10, 6, 9)[:3])


class TestPartition:
    """Tests for positional partitioning."""

    def test_positions(self, small_examples):
        """Test subset, remainder, reduced, and holdout positions."""
        dataset = partition(small_examples, r=2, m=20, w=30, k=3)
        assert dataset.subset_positions(0).tolist() == list(range(0, 20))
        assert dataset.subset_positions(1).tolist() == list(range(20, 40))
        assert dataset.holdout_positions().tolist() == list(range(170, 200))
        assert len(dataset.remainder_positions()) == 160
        assert len(dataset.reduced_positions()) == 130
        assert dataset.m == 20
        assert dataset.validation_size == 40

    def test_unequal_sizes(self, small_examples):
        """Test partitions with explicit subset sizes."""
        dataset = partition(small_examples, r=0, m=0, k=3, subset_sizes=(5, 10))
        assert dataset.r == 2
        assert dataset.subset_positions(1).tolist() == list(range(5, 15))
        with pytest.raises(ParameterError):
            _ = dataset.m

    def test_infeasible(self, small_examples):
        """Test that r*m + w > n - k is rejected."""
        with pytest.raises(ParameterError):
            partition(small_examples, r=3, m=50, w=50, k=3)

    def test_boundary_feasible(self, small_examples):
        """Test that r*m + w = n - k is accepted."""
        dataset = partition(small_examples, r=1, m=100, w=97, k=3)
        assert len(dataset.reduced_positions()) == 3

    def test_model_validator(self, small_examples):
        """Test that constructing an infeasible partition directly fails validation."""
        with pytest.raises(ValidationError):
            PartitionedDataset(examples=small_examples, k=3, subset_sizes=(150, 100), w=0)

    def test_subset_index_out_of_range(self, small_partition):
        """Test that an invalid subset index raises ParameterError."""
        with pytest.raises(ParameterError):
            small_partition.subset_positions(2)
