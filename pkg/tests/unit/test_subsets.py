"""Tests for subset masks and inclusion-exclusion term enumeration."""

import math

import pytest

from knnbound.engine.subsets import (
    enumerate_pairs,
    f_i_terms,
    full_mask,
    mask_of,
    members,
    popcount,
    submasks,
    truncation_width,
    validate_mask,
)
from knnbound.exceptions import ParameterError


class TestMasks:
    """Tests for mask helpers."""

    def test_full_mask(self):
        """Test the mask of R."""
        assert full_mask(3) == 0b111

    def test_members_and_mask_of(self):
        """Test conversion between masks and index lists."""
        assert members(0b1011) == [0, 1, 3]
        assert mask_of([0, 1, 3]) == 0b1011
        assert popcount(0b1011) == 3

    def test_mask_of_negative(self):
        """Test that negative indices are rejected."""
        with pytest.raises(ParameterError):
            mask_of([-1])

    def test_validate_mask(self):
        """Test that masks with bits beyond r are rejected."""
        assert validate_mask(0b11, 2) == 0b11
        with pytest.raises(ParameterError):
            validate_mask(0b100, 2)
        with pytest.raises(ParameterError):
            validate_mask(0, 0)

    def test_submasks(self):
        """Test that every submask appears once, empty set included."""
        subs = submasks(0b101)
        assert sorted(subs) == [0b000, 0b001, 0b100, 0b101]
        assert len(submasks(0b1111)) == 16


class TestTruncation:
    """Tests for the truncation width u(S)."""

    @pytest.mark.parametrize(
        "s_mask,depth,expected",
        [(0, 0, 0), (0, 2, 2), (0, 3, 2), (0b1, 3, 2), (0b11, 3, 0), (0b111, 2, 0)],
    )
    def test_width(self, s_mask, depth, expected):
        """Test u(S) = max(2 floor((d - |S|)/2), 0)."""
        assert truncation_width(s_mask, depth) == expected

    def test_negative_depth(self):
        """Test that a negative depth is rejected."""
        with pytest.raises(ParameterError):
            truncation_width(0, -1)


class TestEnumeration:
    """Tests for (S, T) enumeration and f_i coefficients."""

    def test_untruncated_pair_count(self):
        """Test that disjoint pairs inside an r-set number 3^r."""
        assert len(enumerate_pairs(full_mask(3), None)) == 27

    def test_pairs_are_disjoint(self):
        """Test that S and T never overlap."""
        for s_mask, t_mask in enumerate_pairs(full_mask(4), 2):
            assert s_mask & t_mask == 0
            assert popcount(t_mask) <= truncation_width(s_mask, 2)

    def test_f_i_excludes_own_subset(self):
        """Test that f_i never conditions on its own subset."""
        for term in f_i_terms(1, (5, 5, 5), 3):
            assert not term.union_mask >> 1 & 1

    def test_f_i_coefficients_equal_sizes(self):
        """Test that the coefficients with equal sizes are 1 / (r - |S u T|)."""
        for term in f_i_terms(0, (10, 10, 10), 3):
            assert term.coefficient == pytest.approx(1 / (3 - popcount(term.union_mask)))

    def test_f_i_range_equal_sizes(self):
        """Test the coefficient magnitude sum for r = 2."""
        # r = 2, i = 0: S, T inside {1}: (0,0) -> 1/2, ({1},0) -> 1, (0,{1}) -> 1
        total = math.fsum(t.coefficient for t in f_i_terms(0, (4, 4), 2))
        assert total == pytest.approx(2.5)

    def test_f_i_unequal_sizes(self):
        """Test the pooled coefficient with unequal subset sizes."""
        terms = {(t.s_mask, t.union_mask): t.coefficient for t in f_i_terms(0, (2, 6), 2)}
        assert terms[(0, 0)] == pytest.approx(2 / 8)
        assert terms[(0b10, 0b10)] == pytest.approx(1.0)

    def test_f_i_invalid(self):
        """Test that invalid subset indices and depths are rejected."""
        with pytest.raises(ParameterError):
            f_i_terms(3, (5, 5), 2)
        with pytest.raises(ParameterError):
            f_i_terms(0, (5, 5), 3)

