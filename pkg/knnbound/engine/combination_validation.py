"""
Validation with one concentration bound per combination.

Instead of validating each f_i, every proper subset A of R is validated
separately: f_A is evaluated on the examples of V_{R-A} (m (r - |A|) of them),
and combinations at level j = |A| share the failure probability delta_j. The
estimate sum_A mean(f_A) is the same s_V as sum_i mean(f_i); only the width
differs.
"""

import math

import numpy as np
from scipy.optimize import minimize
from scipy.special import softmax

from knnbound.engine.dependent_bounds import build_report, w_term
from knnbound.engine.evidence import PartitionEvidence, collect_evidence
from knnbound.engine.neighbors import NeighborContext
from knnbound.engine.subsets import full_mask, popcount, submasks
from knnbound.exceptions import ParameterError
from knnbound.logging_config import get_logger
from knnbound.models.bounds import (
    BoundConfig,
    BoundDirection,
    BoundReport,
    BoundVariant,
    DeltaSchedule,
    ScheduleSelector,
    SubsetTerm,
)
from knnbound.models.dataset import PartitionedDataset

logger = get_logger(__name__)


def alpha(delta: float) -> float:
    """(delta/2) / ln(1 + delta/2); slightly above 1 for small delta."""
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    half = delta / 2
    return half / math.log1p(half)


def f_A_value(ctx: NeighborContext, label: int, a_mask: int) -> float:
    """
    f_A = sum over S in A of (-1)^{|A-S|} I(c_A(x) and g_S(x) != y).

    The query should come from V_{R-A}; subsets outside A are never consulted.
    """
    if a_mask < 0 or a_mask & ~full_mask(ctx.r):
        raise ParameterError(f"A={a_mask:#b} is not a subset of R for r = {ctx.r}")
    if not bool(ctx.batch.condition_c(a_mask)[0]):
        return 0.0
    total = 0
    for s_mask in submasks(a_mask):
        if int(ctx.batch.classify(s_mask)[0]) != label:
            total += -1 if popcount(a_mask & ~s_mask) % 2 else 1
    return float(total)


def level_width(r: int, j: int, m: int, delta_j: float) -> float:
    """Width for one combination at level j: 2^j sqrt(ln(2/delta_j) / ((r - j) m))."""
    return 2**j * math.sqrt(math.log(2 / delta_j) / ((r - j) * m))


def epsilon_V_levelwise(schedule: DeltaSchedule, m: int) -> float:
    """sum_j C(r, j) 2^j sqrt(ln(2/delta_j) / ((r - j) m)) for any schedule."""
    r = schedule.r
    return math.fsum(
        math.comb(r, j) * level_width(r, j, m, schedule.per_level[j]) for j in range(r)
    )


def epsilon_V_closed_form(r: int, m: int, delta: float) -> float:
    """(3^r - 2^r) sqrt(ln(2 r alpha(delta) / delta) / m)."""
    if r < 1 or m < 1:
        raise ParameterError(f"r and m must be positive, got r={r}, m={m}")
    return (3**r - 2**r) * math.sqrt(math.log(2 * r * alpha(delta) / delta) / m)


def _closed_form_levels(r: int, delta: float) -> dict[int, float]:
    base = delta / (2 * r * alpha(delta))
    return {j: 2 * base ** (r - j) for j in range(r)}


def _optimized_levels(r: int, delta: float, m: int) -> dict[int, float]:
    """
    Minimize the levelwise width over budgets that spend delta exactly.

    Level j receives a share w_j of delta, split evenly across its C(r, j)
    combinations; shares are parameterized through a softmax.
    """
    counts = np.array([math.comb(r, j) for j in range(r)], dtype=np.float64)
    scale = np.array([math.comb(r, j) * 2**j / math.sqrt((r - j) * m) for j in range(r)])

    def width(logits: np.ndarray) -> float:
        per_level = delta * softmax(logits) / counts
        return float(np.sum(scale * np.sqrt(np.log(2 / per_level))))

    start = np.log(counts * np.array(list(_closed_form_levels(r, delta).values())))
    result = minimize(width, start, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
    shares = softmax(result.x)
    # renormalize so rounding never overspends
    shares = shares / math.fsum(shares.tolist())
    return {j: float(delta * shares[j] / counts[j]) for j in range(r)}


def delta_schedule(
    r: int,
    delta: float,
    selector: ScheduleSelector = ScheduleSelector.CLOSED_FORM,
    m: int = 1,
) -> DeltaSchedule:
    """
    Allocate delta across combination levels 0..r-1.

    closed-form: delta_j = 2 (delta / (2 r alpha(delta)))^{r-j}
    uniform: delta_j = delta / (2^r - 1)
    optimized: numerical minimum of the levelwise width, never wider than closed-form

    Raises:
        ParameterError: If r is not positive or delta is outside (0, 1)
    """
    if r < 1:
        raise ParameterError(f"r must be positive, got {r}")
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    if selector == ScheduleSelector.CLOSED_FORM:
        per_level = _closed_form_levels(r, delta)
    elif selector == ScheduleSelector.UNIFORM:
        per_level = {j: delta / (2**r - 1) for j in range(r)}
    else:
        closed = DeltaSchedule(r=r, delta=delta, per_level=_closed_form_levels(r, delta))
        candidate = DeltaSchedule(r=r, delta=delta, per_level=_optimized_levels(r, delta, m))
        best = min(closed, candidate, key=lambda s: epsilon_V_levelwise(s, m))
        per_level = best.per_level
    return DeltaSchedule(r=r, delta=delta, per_level=per_level, selector=selector)


def combination_bound(
    dataset: PartitionedDataset,
    cfg: BoundConfig,
    evidence: PartitionEvidence | None = None,
    selector: ScheduleSelector = ScheduleSelector.CLOSED_FORM,
) -> BoundReport:
    """
    s_V from combination means, widened by epsilon_V and the W term.

    The W term is the one result_bound uses: 2^{r-1} times a Hoeffding upper
    bound on P(c_R') for one-sided bounds, 2^r [p_W + sqrt(ln(2/delta_W)/(2w))]
    for two-sided bounds.

    Raises:
        ParameterError: If d < r, the subsets differ in size, or w = 0
    """
    if cfg.d != cfg.r:
        raise ParameterError(f"combination_bound does not truncate; need d = r = {cfg.r}")
    if cfg.w < 1:
        raise ParameterError("combination_bound needs a holdout tail W with w >= 1")
    if dataset.k != cfg.k or dataset.subset_sizes != cfg.sizes or dataset.w != cfg.w:
        raise ParameterError("Config does not match the partition")
    m = dataset.m
    r = cfg.r
    evidence = evidence if evidence is not None else collect_evidence(dataset, cfg.metric)

    schedule = delta_schedule(r, cfg.delta, selector, m)
    terms = []
    for a_mask in range(full_mask(r)):
        j = popcount(a_mask)
        values = evidence.f_A_values(a_mask)
        terms.append(
            SubsetTerm(
                index=a_mask,
                size=len(values),
                mean=float(np.mean(values)),
                width=level_width(r, j, m, schedule.per_level[j]),
                range_len=float(2**j),
            )
        )
    estimate = math.fsum(t.mean for t in terms)
    if selector == ScheduleSelector.CLOSED_FORM:
        epsilon_v = epsilon_V_closed_form(r, m, cfg.delta)
    else:
        epsilon_v = epsilon_V_levelwise(schedule, m)

    if cfg.direction == BoundDirection.TWO_SIDED:
        p_w = evidence.w_hits / evidence.w
        epsilon_w = 2**r * (p_w + math.sqrt(math.log(2 / cfg.delta_w) / (2 * cfg.w)))
    else:
        epsilon_w = w_term(evidence, cfg.delta_w, 2 ** (r - 1))

    logger.debug("schedule_selected", r=r, selector=selector.value, spent=schedule.spent())
    return build_report(
        BoundVariant.COMBINATION,
        cfg.direction,
        dataset,
        cfg,
        estimate,
        epsilon_v,
        epsilon_w,
        terms,
        evidence,
    )
