"""Tests for the exact inclusion-exclusion identity check."""

import pytest

from knnbound.engine.identity import verify_identity
from knnbound.exceptions import ParameterError


class TestVerifyIdentity:
    """Tests for verify_identity()."""

    @pytest.mark.parametrize("r", [1, 2, 3])
    @pytest.mark.parametrize("k", [1, 3])
    def test_identity_holds(self, r, k):
        """Test that every exact check passes on a random domain."""
        report = verify_identity(domain_size=300, r=r, k=k, seed=r * 10 + k)
        assert report.passed, report.failures
        assert report.signed_sum == pytest.approx(report.p_star, abs=1e-12)
        assert report.b_partition == pytest.approx(1.0, abs=1e-12)

    def test_truncated_sums_bound_p_star(self):
        """Test that every truncation depth is reported and upper-bounds p*."""
        report = verify_identity(domain_size=400, r=3, k=3, seed=7)
        assert sorted(report.truncated_sums) == [0, 1, 2, 3]
        for value in report.truncated_sums.values():
            assert value >= report.p_star - 1e-12

    def test_c_prime_at_least_c(self):
        """Test that P(c_R') is at least P(c_R)."""
        report = verify_identity(domain_size=200, r=2, k=3, seed=1)
        assert report.c_r_prime_probability >= report.c_r_probability

    def test_without_holdout(self):
        """Test that w = 0 skips the c_R' check."""
        report = verify_identity(domain_size=100, r=2, k=1, seed=2, w=0)
        assert report.passed
        assert report.c_r_prime_probability is None

    def test_other_metric(self):
        """Test that the identity does not depend on the metric."""
        report = verify_identity(domain_size=150, r=2, k=3, seed=3, metric="manhattan")
        assert report.passed

    def test_report_string(self):
        """Test the status line."""
        report = verify_identity(domain_size=50, r=1, k=1, seed=4)
        assert str(report).startswith("✓ PASS")

    @pytest.mark.parametrize("domain_size", [0, 1001])
    def test_invalid_domain_size(self, domain_size):
        """Test that the domain size is limited to 1..1000."""
        with pytest.raises(ParameterError):
            verify_identity(domain_size=domain_size, r=2, k=3)

    def test_infeasible_partition(self):
        """Test that oversized subsets are rejected."""
        with pytest.raises(ParameterError):
            verify_identity(domain_size=100, r=2, k=3, n=20, m=10)
