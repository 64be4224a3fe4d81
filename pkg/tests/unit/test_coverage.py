"""Tests for Monte Carlo coverage and oracle suites at small scale."""

import pytest

from knnbound.engine import coverage
from knnbound.engine.coverage import estimate_c_prime_rate, run_coverage, true_error
from knnbound.engine.dataset import generate_quadrant_dataset
from knnbound.engine.independent_bounds import independent_bound, u_value
from knnbound.exceptions import ParameterError
from knnbound.models.experiment import CoverageReport, CoverageSuite


class TestScalarSuites:
    """Coverage of the concentration primitives on Bernoulli samples."""

    @pytest.mark.parametrize(
        "suite", [CoverageSuite.HOEFFDING, CoverageSuite.BERNSTEIN, CoverageSuite.BINOMIAL]
    )
    def test_within_budget(self, suite):
        """Test that the failure rate stays within budget + 3 sigma."""
        report = run_coverage(suite, repetitions=100, seed=1)
        assert report.passed
        assert report.budget == pytest.approx(0.025)
        assert report.failure_rate <= report.threshold

    def test_reproducible(self):
        """Test that the same seed gives the same failure count."""
        first = run_coverage(CoverageSuite.BINOMIAL, repetitions=50, seed=9)
        second = run_coverage(CoverageSuite.BINOMIAL, repetitions=50, seed=9)
        assert first.failures == second.failures

    def test_repetitions_must_be_positive(self):
        """Test that zero repetitions is rejected."""
        with pytest.raises(ParameterError):
            run_coverage(CoverageSuite.HOEFFDING, repetitions=0)


class TestBoundSuites:
    """Coverage of the classifier bounds on small datasets."""

    @pytest.mark.parametrize(
        "suite",
        [
            CoverageSuite.RESULT_BOUND,
            CoverageSuite.TEST_BOUND,
            CoverageSuite.COMBINATION_BOUND,
            CoverageSuite.INDEPENDENT_BOUND,
        ],
    )
    def test_small_scale(self, suite):
        """Test that each bound suite runs and reports a verdict."""
        report = run_coverage(suite, repetitions=5, seed=2, n=400, test_size=1000, q=2)
        assert isinstance(report, CoverageReport)
        assert report.repetitions == 5
        assert report.budget == pytest.approx(0.05)
        assert report.passed

    def test_independent_plans_differ_per_repetition(self, monkeypatch):
        """Test that each repetition samples permutations from its own seed."""
        plan_seeds = []

        def recording_bound(examples, cfg, plan, *args, **kwargs):
            plan_seeds.append(plan.seed)
            return independent_bound(examples, cfg, plan, *args, **kwargs)

        monkeypatch.setattr(coverage, "independent_bound", recording_bound)
        run_coverage(
            CoverageSuite.INDEPENDENT_BOUND, repetitions=4, seed=2, n=400, test_size=500, q=2
        )
        assert len(plan_seeds) == 4
        assert len(set(plan_seeds)) == 4
        assert 2 not in plan_seeds


class TestOracleSuites:
    """Exact-versus-simulated oracle suites."""

    def test_u_value(self):
        """Test that the exact probability agrees with sampled rankings."""
        report = run_coverage(CoverageSuite.U_VALUE, repetitions=4, seed=0)
        assert report.budget == 0.0
        assert set(report.details) == {"exact", "estimate", "stderr", "z"}
        assert report.details["exact"] == pytest.approx(u_value(20, 3, 2, 3))
        assert report.passed

    def test_residual_rate(self):
        """Test that the observed c_R' rate on W matches its exact expectation."""
        report = run_coverage(CoverageSuite.RESIDUAL_RATE, repetitions=40, seed=3, n=400)
        assert report.details["exact"] <= report.details["chvatal"]
        assert report.passed


class TestHelpers:
    """Tests for the suite helpers."""

    def test_true_error_noiseless_large_sample(self):
        """Test that 1-NN on noiseless data has a small error."""
        examples = generate_quadrant_dataset(2000, noise=0.0, seed=1)
        assert true_error(examples, 1, 2000, seed=2, noise=0.0) < 0.1

    def test_c_prime_rate_in_unit_interval(self):
        """Test that the estimated rate is a probability with a standard error."""
        mean, stderr = estimate_c_prime_rate(300, 3, 2, 15, 15, repetitions=5, seed=1)
        assert 0.0 <= mean <= 1.0
        assert stderr >= 0.0
