"""
Monte Carlo coverage and oracle suites.

Coverage suites repeat a bound on independent seeded draws and count how often
the target falls outside it; a suite passes when the failure rate is within
budget + 3 sigma. Oracle suites compare an exact quantity to a simulation and
pass when they agree within 3 standard errors.
"""

import math
from collections.abc import Callable

import numpy as np

from knnbound.engine.combination_validation import combination_bound
from knnbound.engine.concentration import (
    binomial_tail_upper,
    chvatal_tail_bound,
    empirical_bernstein_bound,
    hoeffding_bound,
)
from knnbound.engine.dataset import generate_quadrant_dataset, partition
from knnbound.engine.dependent_bounds import result_bound, test_bound
from knnbound.engine.evidence import collect_evidence
from knnbound.engine.independent_bounds import (
    independent_bound,
    sample_c_R_probability,
    suggest_m_independent,
    u_value,
)
from knnbound.engine.neighbors import PartitionIndex, classify_full
from knnbound.exceptions import ParameterError
from knnbound.logging_config import bound_run_context, get_logger
from knnbound.models.bounds import BoundConfig, BoundDirection, BoundReport, PermutationPlan
from knnbound.models.dataset import ExampleSet
from knnbound.models.experiment import CoverageReport, CoverageSuite

logger = get_logger(__name__)

SAMPLE_SIZE = 200
BERNOULLI_RATE = 0.3
ORACLE_SIGMAS = 3.0


def _streams(seed: int, repetitions: int) -> list[np.random.SeedSequence]:
    if repetitions < 1:
        raise ParameterError(f"repetitions must be positive, got {repetitions}")
    return np.random.SeedSequence(seed).spawn(repetitions)


def true_error(
    examples: ExampleSet,
    k: int,
    test_size: int,
    seed: int,
    dim: int = 2,
    noise: float = 0.1,
) -> float:
    """Error of g* estimated on test_size fresh quadrant examples."""
    test = generate_quadrant_dataset(test_size, dim, noise, seed)
    predictions = classify_full(examples, test.inputs, test.tiebreaks, k)
    return float(np.mean(predictions != test.labels))


def estimate_c_prime_rate(
    n: int, k: int, r: int, m: int, w: int, repetitions: int, seed: int = 0
) -> tuple[float, float]:
    """
    Mean rate of c_R' on W over fresh datasets, with its standard error.

    The expected rate equals u(n - w, k, r, m): a W example is an exchangeable
    query against the other n - w examples.
    """
    rates = []
    for stream in _streams(seed, repetitions):
        examples = generate_quadrant_dataset(n, seed=int(stream.generate_state(1)[0]))
        dataset = partition(examples, r, m, w, k)
        positions = dataset.holdout_positions()
        batch = PartitionIndex(dataset).batch(
            examples.inputs[positions], examples.tiebreaks[positions], include_base=False
        )
        rates.append(float(np.mean(batch.condition_c_prime())))
    values = np.array(rates)
    stderr = float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return float(np.mean(values)), stderr


def _scalar_suite(
    repetitions: int, seed: int, delta: float, upper: Callable[[np.ndarray], float]
) -> int:
    failures = 0
    for stream in _streams(seed, repetitions):
        rng = np.random.default_rng(stream)
        sample = (rng.random(SAMPLE_SIZE) < BERNOULLI_RATE).astype(np.float64)
        if upper(sample) < BERNOULLI_RATE:
            failures += 1
    return failures


def _bound_suite(
    repetitions: int,
    seed: int,
    bound: Callable[[ExampleSet, int], BoundReport],
    k: int,
    n: int,
    test_size: int,
) -> int:
    """
    Count repetitions where the error of g* leaves [lower, upper].

    Each repetition draws its data, test, and bound seeds from its own stream;
    `bound` receives the last one for any sampling of its own.
    """
    failures = 0
    for stream in _streams(seed, repetitions):
        data_seed, test_seed, bound_seed = (int(v) for v in stream.generate_state(3))
        examples = generate_quadrant_dataset(n, seed=data_seed)
        report = bound(examples, bound_seed)
        error = true_error(examples, k, test_size, test_seed)
        below = report.lower_bound is not None and error < report.lower_bound
        above = report.upper_bound is not None and error > report.upper_bound
        failures += int(below or above)
    return failures


def _passes(failures: int, repetitions: int, budget: float) -> bool:
    sigma = math.sqrt(budget * (1 - budget) / repetitions)
    return failures / repetitions <= budget + 3 * sigma


def run_coverage(
    suite: CoverageSuite,
    repetitions: int = 200,
    seed: int = 0,
    n: int = 2000,
    k: int = 3,
    r: int = 2,
    delta: float = 0.025,
    delta_w: float = 0.025,
    test_size: int = 20000,
    q: int = 20,
) -> CoverageReport:
    """
    Run one suite and report its verdict.

    Scalar suites (hoeffding, bernstein, binomial) bound the mean of Bernoulli
    samples at failure probability delta. Bound suites draw n quadrant examples
    per repetition and use m = w = n // 10 (independent-bound uses the suggested
    m with q permutations).
    """
    with bound_run_context(suite=suite.value, seed=seed):
        return _run_suite(suite, repetitions, seed, n, k, r, delta, delta_w, test_size, q)


def _run_suite(
    suite: CoverageSuite,
    repetitions: int,
    seed: int,
    n: int,
    k: int,
    r: int,
    delta: float,
    delta_w: float,
    test_size: int,
    q: int,
) -> CoverageReport:
    details: dict[str, float] = {}
    budget = delta
    m = max(2, n // 10)

    if suite == CoverageSuite.HOEFFDING:
        failures = _scalar_suite(
            repetitions,
            seed,
            delta,
            lambda s: hoeffding_bound(s, 1.0, delta, BoundDirection.UPPER),
        )
    elif suite == CoverageSuite.BERNSTEIN:
        failures = _scalar_suite(
            repetitions, seed, delta, lambda s: empirical_bernstein_bound(s, 1.0, delta)
        )
    elif suite == CoverageSuite.BINOMIAL:
        failures = _scalar_suite(
            repetitions,
            seed,
            delta,
            lambda s: binomial_tail_upper(int(s.sum()), s.size, delta),
        )
    elif suite in (
        CoverageSuite.RESULT_BOUND,
        CoverageSuite.TEST_BOUND,
        CoverageSuite.COMBINATION_BOUND,
    ):
        budget = delta + delta_w
        if suite == CoverageSuite.TEST_BOUND:
            cfg = BoundConfig(k=k, r=r, m=m, w=m, depth=r - 1, delta=delta, delta_w=delta_w)
            compute = test_bound
        else:
            cfg = BoundConfig(
                k=k,
                r=r,
                m=m,
                w=m,
                delta=delta,
                delta_w=delta_w,
                direction=BoundDirection.TWO_SIDED,
            )
            compute = result_bound if suite == CoverageSuite.RESULT_BOUND else combination_bound

        def bound(examples: ExampleSet, _bound_seed: int) -> BoundReport:
            dataset = partition(examples, cfg.r, cfg.m, cfg.w, cfg.k)
            return compute(dataset, cfg, collect_evidence(dataset))

        failures = _bound_suite(repetitions, seed, bound, k, n, test_size)
    elif suite == CoverageSuite.INDEPENDENT_BOUND:
        budget = delta + delta_w
        m_ind, _ = suggest_m_independent(n, k, r)
        cfg = BoundConfig(k=k, r=r, m=m_ind, delta=delta, direction=BoundDirection.TWO_SIDED)

        def bound(examples: ExampleSet, bound_seed: int) -> BoundReport:
            plan = PermutationPlan(q=q, seed=bound_seed, delta_q=delta_w)
            return independent_bound(examples, cfg, plan)

        failures = _bound_suite(repetitions, seed, bound, k, n, test_size)
    elif suite == CoverageSuite.U_VALUE:
        budget = 0.0
        exact = u_value(20, 3, 2, 3)
        estimate, stderr = sample_c_R_probability(20, 3, 2, 3, repetitions * 5000, seed)
        z = abs(exact - estimate) / stderr if stderr > 0 else 0.0
        details = {"exact": exact, "estimate": estimate, "stderr": stderr, "z": z}
        failures = int(z > ORACLE_SIGMAS)
    else:
        budget = 0.0
        m_small = max(1, n // 20)
        exact = u_value(n - m_small, k, r, m_small)
        estimate, stderr = estimate_c_prime_rate(n, k, r, m_small, m_small, repetitions, seed)
        z = abs(exact - estimate) / stderr if stderr > 0 else 0.0
        chvatal = chvatal_tail_bound(n - m_small, k, r, m_small)
        details = {
            "exact": exact,
            "estimate": estimate,
            "stderr": stderr,
            "z": z,
            "chvatal": chvatal,
        }
        failures = int(z > ORACLE_SIGMAS or exact > chvatal)

    if budget > 0:
        passed = _passes(failures, repetitions, budget)
    else:
        passed = failures == 0
    report = CoverageReport(
        suite=suite,
        repetitions=repetitions,
        failures=failures,
        budget=budget,
        seed=seed,
        details=details,
        passed=passed,
    )
    logger.info(
        "coverage_checked",
        repetitions=repetitions,
        failures=failures,
        budget=budget,
        passed=passed,
    )
    return report
