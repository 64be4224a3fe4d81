"""
Exact verification of the inclusion-exclusion rearrangement.

A finite input domain with known label probabilities eta(x) = P(y = 1 | x) and
a uniform marginal makes every probability a finite average, so p*, the signed
sum over (S, T), the b_S partition, and every truncated sum can be computed
exactly and compared.
"""

import math

import numpy as np

from knnbound.engine.dataset import partition
from knnbound.engine.neighbors import PartitionIndex, classify_full
from knnbound.engine.subsets import enumerate_pairs, full_mask, popcount
from knnbound.exceptions import ParameterError
from knnbound.logging_config import get_logger
from knnbound.models.dataset import ExampleSet
from knnbound.models.experiment import IdentityReport

logger = get_logger(__name__)

MAX_DOMAIN_SIZE = 1000
DEFAULT_TOLERANCE = 1e-12


def _domain_mean(values: np.ndarray) -> float:
    return math.fsum(values.tolist()) / values.size


def verify_identity(
    domain_size: int,
    r: int,
    k: int,
    seed: int = 0,
    n: int = 40,
    m: int | None = None,
    w: int | None = None,
    dim: int = 2,
    metric: str = "euclidean",
    tolerance: float = DEFAULT_TOLERANCE,
) -> IdentityReport:
    """
    Check the rearrangement exactly on a random finite domain.

    The domain has `domain_size` points in [-1, 1]^dim, each with a random
    eta(x) and a fixed tie-break value. F holds n examples drawn from the domain
    with labels drawn from eta. Checks:
        - p* equals the full signed sum over disjoint (S, T)
        - the b_S events partition the domain and sum_S P(b_S, g_S errs) = p*
        - the truncated sum at every depth d in 0..r is at least p*
        - |t_W| <= 2^{r-1} P(c_R), and c_R implies c_R' when w > 0

    Args:
        domain_size: Number of domain points (at most 1000)
        r: Number of validation subsets
        k: Number of neighbors (odd)
        seed: Seed for the domain and for F
        n: Size of F
        m: Validation subset size (default n // (2 (r + 1)))
        w: Holdout tail size (default m)

    Returns:
        Report listing every failed check
    """
    if not 1 <= domain_size <= MAX_DOMAIN_SIZE:
        raise ParameterError(f"domain_size must lie in 1..{MAX_DOMAIN_SIZE}, got {domain_size}")
    m = max(1, n // (2 * (r + 1))) if m is None else m
    w = m if w is None else w

    rng = np.random.default_rng(seed)
    points = rng.uniform(-1.0, 1.0, size=(domain_size, dim))
    eta = rng.random(domain_size)
    point_tiebreaks = rng.random(domain_size)
    drawn = rng.integers(0, domain_size, size=n)
    labels = (rng.random(n) < eta[drawn]).astype(np.int8)
    examples = ExampleSet(inputs=points[drawn], labels=labels, tiebreaks=point_tiebreaks[drawn])
    dataset = partition(examples, r, m, w, k)

    index = PartitionIndex(dataset, metric)
    batch = index.batch(points, point_tiebreaks)
    closer = batch.closer_masks()
    full = full_mask(r)
    # P(g_S errs | x): eta where g_S says 0, 1 - eta where it says 1
    perr = {s: np.where(batch.classify(s) == 0, eta, 1.0 - eta) for s in range(full + 1)}

    g_star = classify_full(examples, points, point_tiebreaks, k, metric)
    p_star = _domain_mean(np.where(g_star == 0, eta, 1.0 - eta))

    def signed_sum(depth: int | None) -> float:
        terms = []
        for s_mask, t_mask in enumerate_pairs(full, depth):
            union = s_mask | t_mask
            hit = (closer & union) == union
            sign = -1 if popcount(t_mask) % 2 else 1
            terms.append(sign * _domain_mean(np.where(hit, perr[s_mask], 0.0)))
        return math.fsum(terms)

    exact = signed_sum(None)
    truncated = {d: signed_sum(d) for d in range(r + 1)}
    b_partition = math.fsum(_domain_mean((closer == s).astype(np.float64)) for s in range(full + 1))
    b_sum = math.fsum(
        _domain_mean(np.where(closer == s, perr[s], 0.0)) for s in range(full + 1)
    )

    c_r = closer == full
    c_r_probability = _domain_mean(c_r.astype(np.float64))
    t_w = math.fsum(
        (-1 if popcount(full & ~s) % 2 else 1) * _domain_mean(np.where(c_r, perr[s], 0.0))
        for s in range(full + 1)
    )

    failures = []
    if abs(exact - p_star) > tolerance:
        failures.append(f"signed sum {exact!r} differs from p* {p_star!r}")
    if abs(_domain_mean(perr[full]) - p_star) > tolerance:
        failures.append("g_R disagrees with g* on the domain")
    if abs(b_partition - 1.0) > tolerance:
        failures.append(f"b_S probabilities sum to {b_partition!r}")
    if abs(b_sum - p_star) > tolerance:
        failures.append(f"sum over b_S of errors {b_sum!r} differs from p* {p_star!r}")
    for depth, value in truncated.items():
        if value < p_star - tolerance:
            failures.append(f"depth {depth} truncated sum {value!r} is below p* {p_star!r}")
    if abs(t_w) > 2 ** (r - 1) * c_r_probability + tolerance:
        failures.append(f"|t_W| = {abs(t_w)!r} exceeds 2^(r-1) P(c_R)")

    c_r_prime_probability = None
    if w > 0:
        c_r_prime = batch.condition_c_prime()
        c_r_prime_probability = _domain_mean(c_r_prime.astype(np.float64))
        if np.any(c_r & ~c_r_prime):
            failures.append("c_R holds where c_R' does not")

    report = IdentityReport(
        domain_size=domain_size,
        r=r,
        k=k,
        n=n,
        m=m,
        w=w,
        seed=seed,
        tolerance=tolerance,
        p_star=p_star,
        signed_sum=exact,
        b_sum=b_sum,
        b_partition=b_partition,
        truncated_sums=truncated,
        t_w=t_w,
        c_r_probability=c_r_probability,
        c_r_prime_probability=c_r_prime_probability,
        failures=failures,
    )
    logger.info(
        "identity_checked",
        domain_size=domain_size,
        r=r,
        k=k,
        passed=report.passed,
        failures=len(failures),
    )
    return report
