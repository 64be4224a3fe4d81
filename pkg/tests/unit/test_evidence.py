"""Tests for per-partition evidence."""

import numpy as np
import pytest

from knnbound.engine.dataset import partition
from knnbound.engine.evidence import collect_evidence
from knnbound.engine.subsets import full_mask, members
from knnbound.exceptions import ContextStateError, ParameterError
from knnbound.models.dataset import ExampleSet


def _with_flipped_labels(examples: ExampleSet, positions: np.ndarray) -> ExampleSet:
    labels = examples.labels.copy()
    labels[positions] = 1 - labels[positions]
    return ExampleSet(inputs=examples.inputs, labels=labels, tiebreaks=examples.tiebreaks)


def _pooled_positions(dataset, a_mask: int) -> np.ndarray:
    outside = members(full_mask(dataset.r) & ~a_mask)
    return np.concatenate([dataset.subset_positions(i) for i in outside])


class TestCombinationLocality:
    """f_A at x depends on x's own label, F - V, and V_A only."""

    @pytest.mark.parametrize("a_mask", [0b000, 0b001, 0b010, 0b011, 0b101, 0b110])
    def test_unflipped_values_unchanged(self, medium_examples, a_mask):
        """Test that flipping labels in V_{R-A} only moves f_A at the flipped examples."""
        dataset = partition(medium_examples, 3, 50, 50, 3)
        pooled = _pooled_positions(dataset, a_mask)
        flipped = pooled[::2]

        before = collect_evidence(dataset).f_A_values(a_mask)
        changed = partition(_with_flipped_labels(medium_examples, flipped), 3, 50, 50, 3)
        after = collect_evidence(changed).f_A_values(a_mask)

        kept = np.ones(len(pooled), dtype=bool)
        kept[::2] = False
        assert np.array_equal(before[kept], after[kept])

    def test_validation_labels_in_A_matter(self, medium_examples):
        """Test that f_A does read the labels of V_A."""
        dataset = partition(medium_examples, 3, 50, 50, 3)
        a_mask = 0b011
        inside = np.concatenate([dataset.subset_positions(i) for i in members(a_mask)])
        changed = partition(_with_flipped_labels(medium_examples, inside), 3, 50, 50, 3)
        before = collect_evidence(dataset)
        after = collect_evidence(changed)
        assert any(
            not np.array_equal(before.errors[2][:, s], after.errors[2][:, s])
            for s in (0b001, 0b010, 0b011)
        )

    def test_full_mask_rejected(self, small_evidence):
        """Test that A = R is rejected."""
        with pytest.raises(ParameterError):
            small_evidence.f_A_values(0b11)


class TestHoldoutEvidence:
    """Tests for the W indicators."""

    def test_w_hits_counts_c_prime(self, small_evidence):
        """Test that w_hits counts the c_R' indicators."""
        assert small_evidence.w_hits == int(np.count_nonzero(small_evidence.holdout_prime))
        assert 0 <= small_evidence.w_hits <= small_evidence.w

    def test_w_hits_without_holdout(self, small_examples):
        """Test that w_hits needs W examples."""
        evidence = collect_evidence(partition(small_examples, 2, 20, 0, 3))
        with pytest.raises(ContextStateError):
            _ = evidence.w_hits
