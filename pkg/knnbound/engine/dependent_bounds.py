"""
Data-dependent error bounds for the k-NN classifier built from all of F.

The error rate p* of g* is rearranged by inclusion and exclusion into terms that
validation subsets can estimate (t_V) plus a residual over S u T = R (t_W). The
estimate s_V is a sum of per-subset empirical means of f_i; t_W is bounded by
the rate of c_R' on the holdout tail W.

Two bound recipes are provided:
    - result_bound: Hoeffding on each f_i, Hoeffding on W, no truncation.
    - test_bound: empirical Bernstein on truncated f_i, exact binomial tail on W.
"""

import math

import numpy as np

from knnbound.engine.concentration import (
    binomial_tail_upper,
    chvatal_tail_bound,
    empirical_bernstein_bound,
    hoeffding_bound,
)
from knnbound.engine.dataset import partition
from knnbound.engine.evidence import PartitionEvidence, collect_evidence
from knnbound.engine.neighbors import NeighborContext
from knnbound.engine.subsets import f_i_terms, truncation_width
from knnbound.exceptions import ParameterError
from knnbound.logging_config import get_logger
from knnbound.models.bounds import (
    BoundConfig,
    BoundDirection,
    BoundReport,
    BoundVariant,
    SubsetTerm,
)
from knnbound.models.dataset import ExampleSet, PartitionedDataset

logger = get_logger(__name__)

FIXED_POINT_MAX_ITER = 100

__all__ = [
    "build_report",
    "compute_s_V",
    "direct_s_V",
    "epsilon_two_sided",
    "expected_epsilon_bound",
    "f_i_value",
    "partition_for",
    "result_bound",
    "solve_m_fixed_point",
    "suggest_m",
    "suggest_r",
    "term_range",
    "test_bound",
    "truncation_width",
    "w_term",
]


def partition_for(examples: ExampleSet, cfg: BoundConfig) -> PartitionedDataset:
    """Positional partition of F with the sizes a config asks for."""
    return partition(examples, cfg.r, cfg.m, cfg.w, cfg.k, subset_sizes=cfg.subset_sizes)


def _check_match(dataset: PartitionedDataset, cfg: BoundConfig) -> None:
    if dataset.k != cfg.k or dataset.subset_sizes != cfg.sizes or dataset.w != cfg.w:
        raise ParameterError(
            f"Config (k={cfg.k}, sizes={cfg.sizes}, w={cfg.w}) does not match the partition "
            f"(k={dataset.k}, sizes={dataset.subset_sizes}, w={dataset.w})"
        )


def _evidence(
    dataset: PartitionedDataset, cfg: BoundConfig, evidence: PartitionEvidence | None
) -> PartitionEvidence:
    _check_match(dataset, cfg)
    return evidence if evidence is not None else collect_evidence(dataset, cfg.metric)


def f_i_value(ctx: NeighborContext, label: int, i: int, cfg: BoundConfig) -> float:
    """
    f_i for one example of V_i, from its neighbor context.

    Only subsets other than i are consulted, so the example's own presence in V_i
    does not matter.
    """
    if not 0 <= i < cfg.r:
        raise ParameterError(f"Subset index {i} out of range for r = {cfg.r}")
    closer = int(ctx.batch.closer_masks()[0])
    total = 0.0
    for term in f_i_terms(i, cfg.sizes, cfg.d):
        if closer & term.union_mask != term.union_mask:
            continue
        if int(ctx.batch.classify(term.s_mask)[0]) != label:
            total += term.sign * term.coefficient
    return total


def term_range(i: int, cfg: BoundConfig) -> float:
    """Range length of f_i: the sum of its coefficient magnitudes at depth d."""
    return math.fsum(term.coefficient for term in f_i_terms(i, cfg.sizes, cfg.d))


def compute_s_V(
    dataset: PartitionedDataset,
    cfg: BoundConfig,
    evidence: PartitionEvidence | None = None,
) -> tuple[float, list[np.ndarray]]:
    """
    s_V = sum over i of the mean of f_i over V_i.

    Returns:
        Tuple of (s_V, per-subset arrays of f_i values)
    """
    evidence = _evidence(dataset, cfg, evidence)
    values = [evidence.f_values(i, cfg.d) for i in range(cfg.r)]
    s_v = math.fsum(float(np.mean(v)) for v in values)
    return s_v, values


def direct_s_V(
    dataset: PartitionedDataset,
    cfg: BoundConfig,
    evidence: PartitionEvidence | None = None,
) -> float:
    """s_V evaluated as the signed double sum over pooled validation sets."""
    return _evidence(dataset, cfg, evidence).direct_s_V(cfg.d)


def w_term(
    evidence: PartitionEvidence,
    delta_w: float,
    coefficient: float,
    exact: bool = False,
) -> float:
    """
    coefficient times an upper bound on P(c_R') from the W examples.

    Hoeffding by default; exact=True inverts the binomial tail instead.
    """
    if evidence.w < 1 or evidence.holdout_prime is None:
        raise ParameterError("Bounding t_W needs a holdout tail W with w >= 1")
    if exact:
        rate_bound = binomial_tail_upper(evidence.w_hits, evidence.w, delta_w)
    else:
        rate_bound = hoeffding_bound(
            evidence.holdout_prime.astype(np.float64), 1.0, delta_w, BoundDirection.UPPER
        )
    return coefficient * rate_bound


def epsilon_two_sided(r: int, m: int, w: int, delta: float, delta_w: float, p_w: float) -> float:
    """
    Two-sided width r 3^{r-1} sqrt(ln(2r/delta)/(2m)) + 2^r [p_w + sqrt(ln(2/delta_w)/(2w))],
    where p_w is the observed rate of c_R' on W.
    """
    if min(r, m, w) < 1:
        raise ParameterError(f"r, m, w must be positive, got {r}, {m}, {w}")
    validation = r * 3 ** (r - 1) * math.sqrt(math.log(2 * r / delta) / (2 * m))
    holdout = 2**r * (p_w + math.sqrt(math.log(2 / delta_w) / (2 * w)))
    return validation + holdout


def expected_epsilon_bound(
    n: int, k: int, r: int, m: int, w: int, delta: float, delta_w: float
) -> float:
    """epsilon_two_sided with the expected c_R' rate replaced by its Chvatal-style bound."""
    return epsilon_two_sided(r, m, w, delta, delta_w, chvatal_tail_bound(n - w, k, r, m))


def build_report(
    variant: BoundVariant,
    direction: BoundDirection,
    dataset: PartitionedDataset,
    cfg: BoundConfig,
    estimate: float,
    epsilon_v: float,
    epsilon_w: float,
    terms: list[SubsetTerm],
    evidence: PartitionEvidence,
) -> BoundReport:
    """Assemble a report from an estimate and its validation and W widths."""
    if direction == BoundDirection.UPPER:
        final = estimate + epsilon_v + epsilon_w
        lower, upper = None, final
    elif direction == BoundDirection.LOWER:
        final = estimate - epsilon_v - epsilon_w
        lower, upper = final, None
    else:
        lower = estimate - epsilon_v - epsilon_w
        upper = estimate + epsilon_v + epsilon_w
        final = upper
    report = BoundReport(
        variant=variant,
        direction=direction,
        estimate=estimate,
        epsilon_v=epsilon_v,
        epsilon_w=epsilon_w,
        final_bound=final,
        lower_bound=lower,
        upper_bound=upper,
        failure_prob=cfg.delta + cfg.delta_w,
        per_subset_terms=terms,
        n=dataset.n,
        k=dataset.k,
        r=dataset.r,
        m=min(dataset.subset_sizes),
        w=dataset.w,
        d=cfg.d,
        w_hits=evidence.w_hits,
    )
    logger.debug(
        "bound_computed",
        variant=variant.value,
        direction=direction.value,
        r=dataset.r,
        d=cfg.d,
        estimate=estimate,
        epsilon_v=epsilon_v,
        epsilon_w=epsilon_w,
        final_bound=final,
    )
    return report


def result_bound(
    dataset: PartitionedDataset,
    cfg: BoundConfig,
    evidence: PartitionEvidence | None = None,
) -> BoundReport:
    """
    Hoeffding bound on p* with no truncation.

    Upper: sum_i hoeffding(f_i values, range_i, delta/r) + 2^{r-1} hoeffding(c_R' on W, 1, delta_w).
    Lower: the validation terms flip sign; the W term is still the upper bound on
    P(c_R'), subtracted. Two-sided: s_V +/- epsilon_two_sided.

    Raises:
        ParameterError: If the config truncates (d < r) or w = 0
    """
    if cfg.d != cfg.r:
        raise ParameterError(f"result_bound does not truncate; need d = r = {cfg.r}, got {cfg.d}")
    if cfg.w < 1:
        raise ParameterError("result_bound needs a holdout tail W with w >= 1")
    evidence = _evidence(dataset, cfg, evidence)
    values = [evidence.f_values(i) for i in range(cfg.r)]
    means = [float(np.mean(v)) for v in values]
    estimate = math.fsum(means)
    r = cfg.r

    if cfg.direction == BoundDirection.TWO_SIDED:
        m = dataset.m
        p_w = evidence.w_hits / evidence.w
        epsilon = epsilon_two_sided(r, m, cfg.w, cfg.delta, cfg.delta_w, p_w)
        epsilon_v = r * 3 ** (r - 1) * math.sqrt(math.log(2 * r / cfg.delta) / (2 * m))
        half_width = 3 ** (r - 1) * math.sqrt(math.log(2 * r / cfg.delta) / (2 * m))
        terms = [
            SubsetTerm(
                index=i, size=len(v), mean=mu, width=half_width, range_len=term_range(i, cfg)
            )
            for i, (v, mu) in enumerate(zip(values, means))
        ]
        return build_report(
            BoundVariant.RESULT,
            cfg.direction,
            dataset,
            cfg,
            estimate,
            epsilon_v,
            epsilon - epsilon_v,
            terms,
            evidence,
        )

    terms = []
    for i, (v, mu) in enumerate(zip(values, means)):
        range_len = term_range(i, cfg)
        side = hoeffding_bound(v, range_len, cfg.delta / r, cfg.direction)
        terms.append(
            SubsetTerm(index=i, size=len(v), mean=mu, width=abs(side - mu), range_len=range_len)
        )
    epsilon_v = math.fsum(t.width for t in terms)
    epsilon_w = w_term(evidence, cfg.delta_w, 2 ** (r - 1))
    return build_report(
        BoundVariant.RESULT,
        cfg.direction,
        dataset,
        cfg,
        estimate,
        epsilon_v,
        epsilon_w,
        terms,
        evidence,
    )


def test_bound(
    dataset: PartitionedDataset,
    cfg: BoundConfig,
    evidence: PartitionEvidence | None = None,
) -> BoundReport:
    """
    Upper bound with truncation depth d, empirical Bernstein validation terms,
    and an exact binomial tail bound on the rate of c_R' in W.

    For d < r the only surviving residual term is P(c_R and g_R(x) != y), so
    the W term carries coefficient 1; at d = r it carries 2^{r-1}.

    Raises:
        ParameterError: For a direction other than upper, w = 0, or a subset with
            fewer than two examples
    """
    if cfg.direction != BoundDirection.UPPER:
        raise ParameterError("test_bound is a one-sided upper bound")
    if cfg.w < 1:
        raise ParameterError("test_bound needs a holdout tail W with w >= 1")
    evidence = _evidence(dataset, cfg, evidence)
    r = cfg.r
    terms = []
    for i in range(r):
        values = evidence.f_values(i, cfg.d)
        range_len = term_range(i, cfg)
        mu = float(np.mean(values))
        upper = empirical_bernstein_bound(values, range_len, cfg.delta / r)
        terms.append(
            SubsetTerm(
                index=i, size=len(values), mean=mu, width=upper - mu, range_len=range_len
            )
        )
    estimate = math.fsum(t.mean for t in terms)
    epsilon_v = math.fsum(t.width for t in terms)
    coefficient = 1 if cfg.d < r else 2 ** (r - 1)
    epsilon_w = w_term(evidence, cfg.delta_w, coefficient, exact=True)
    return build_report(
        BoundVariant.TEST,
        BoundDirection.UPPER,
        dataset,
        cfg,
        estimate,
        epsilon_v,
        epsilon_w,
        terms,
        evidence,
    )


test_bound.__test__ = False  # type: ignore[attr-defined]


def solve_m_fixed_point(n: int, k: int, r: int) -> tuple[float, int]:
    """
    Iterate m <- (n - m)^{r/(r + 1/2)} / ((k + r - 1) e) from m = 0.

    Returns:
        Tuple of (unrounded fixed point, iterations used)
    """
    if n < 2 or k < 1 or r < 1:
        raise ParameterError(f"Need n >= 2, k >= 1, r >= 1; got n={n}, k={k}, r={r}")
    exponent = r / (r + 0.5)
    scale = (k + r - 1) * math.e
    current = 0.0
    for iteration in range(1, FIXED_POINT_MAX_ITER + 1):
        following = max(n - current, 0.0) ** exponent / scale
        if abs(following - current) < 1e-9:
            return following, iteration
        current = following
    return current, FIXED_POINT_MAX_ITER


def suggest_m(n: int, k: int, r: int) -> tuple[int, int]:
    """
    Subset size m (and w = m) balancing validation width against the residual term.

    Raises:
        ParameterError: If the rounded m is zero or r*m + w > n - k
    """
    value, iterations = solve_m_fixed_point(n, k, r)
    m = int(round(value))
    if m < 1 or (r + 1) * m > n - k:
        raise ParameterError(
            f"No feasible m for n={n}, k={k}, r={r}: fixed point {value:.3f} "
            f"gives r*m + w = {(r + 1) * m} against n - k = {n - k}"
        )
    logger.debug("m_suggested", n=n, k=k, r=r, m=m, iterations=iterations)
    return m, m


def suggest_r(n: int) -> int:
    """ceil(sqrt(ln n) / (2 sqrt(ln 3)))."""
    if n < 2:
        raise ParameterError(f"n must be at least 2, got {n}")
    value = math.sqrt(math.log(n)) / (2 * math.sqrt(math.log(3)))
    return max(1, math.ceil(value - 1e-9))
