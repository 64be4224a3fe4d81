"""
Data-independent bounds from permutation sampling.

The estimate is the mean of s_V over q uniformly sampled reorderings of F (the
k-NN classifier on a reordered F is the same classifier). The residual term is
bounded analytically rather than from a holdout set: either by the Chvatal-style
form ((k + r - 1) m / n)^r e^r or, tighter, by the exact probability u(n, k, r)
that every validation subset beats the k-th non-validation neighbor under a
uniform permutation.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any

import numpy as np

from knnbound.engine.concentration import chvatal_tail_bound, log_binomial
from knnbound.engine.dataset import (
    draw_permutation,
    partition,
    permutation_streams,
    shuffle_with_permutation,
)
from knnbound.engine.evidence import collect_evidence
from knnbound.exceptions import ParameterError
from knnbound.logging_config import get_logger
from knnbound.models.bounds import (
    BoundConfig,
    BoundDirection,
    BoundReport,
    BoundVariant,
    PermutationPlan,
)
from knnbound.models.dataset import ExampleSet, PartitionedDataset

logger = get_logger(__name__)

_WORKER_STATE: dict[str, Any] = {}


def _in_sample(data: ExampleSet | PartitionedDataset) -> ExampleSet:
    return data.examples if isinstance(data, PartitionedDataset) else data


def _s_V_for(examples: ExampleSet, cfg: BoundConfig, permutation: np.ndarray) -> float:
    shuffled = shuffle_with_permutation(examples, permutation)
    dataset = partition(shuffled, cfg.r, cfg.m, 0, cfg.k, subset_sizes=cfg.subset_sizes)
    evidence = collect_evidence(dataset, cfg.metric)
    return math.fsum(float(np.mean(evidence.f_values(i, cfg.d))) for i in range(cfg.r))


def _init_worker(examples: ExampleSet, cfg: BoundConfig) -> None:
    _WORKER_STATE["examples"] = examples
    _WORKER_STATE["cfg"] = cfg


def _worker_s_V(task: tuple[int, np.random.SeedSequence | None]) -> float:
    n, stream = task
    permutation = np.arange(n) if stream is None else draw_permutation(n, stream)
    return _s_V_for(_WORKER_STATE["examples"], _WORKER_STATE["cfg"], permutation)


def permutation_s_V_values(
    data: ExampleSet | PartitionedDataset,
    cfg: BoundConfig,
    plan: PermutationPlan,
    workers: int = 1,
) -> list[float]:
    """
    s_V of each sampled reordering, in permutation order.

    Partitions use w = 0. Permutation j is drawn from its own seed stream, so the
    values do not depend on the worker count.
    """
    examples = _in_sample(data)
    n = len(examples)
    if sum(cfg.sizes) > n - cfg.k:
        raise ParameterError(
            f"Partition infeasible: r*m = {sum(cfg.sizes)} exceeds n - k = {n - cfg.k}"
        )
    streams: list[np.random.SeedSequence | None] = list(permutation_streams(plan.q, plan.seed))
    if plan.force_identity:
        streams[0] = None
    tasks = [(n, stream) for stream in streams]

    if workers > 1 and plan.q > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(examples, cfg)
        ) as executor:
            return list(executor.map(_worker_s_V, tasks))

    values = []
    for _, stream in tasks:
        permutation = np.arange(n) if stream is None else draw_permutation(n, stream)
        values.append(_s_V_for(examples, cfg, permutation))
    return values


def permutation_mean_s_V(
    data: ExampleSet | PartitionedDataset,
    cfg: BoundConfig,
    plan: PermutationPlan,
    workers: int = 1,
) -> float:
    """Mean of s_V over the sampled reorderings of F."""
    return math.fsum(permutation_s_V_values(data, cfg, plan, workers)) / plan.q


def epsilon_permutation(
    n: int,
    k: int,
    r: int,
    m: float,
    q: int,
    delta: float,
    delta_q: float,
    residual: float | None = None,
) -> float:
    """
    r 3^{r-1} sqrt(ln(2rq/delta) / (2m)) + 2^r [sqrt(ln(2/delta_q) / (2q)) + X].

    X defaults to the Chvatal-style form ((k + r - 1) m / n)^r e^r; pass u_value
    as `residual` for the tighter width.
    """
    if min(n, k, r, m, q) <= 0:
        raise ParameterError("n, k, r, m, q must be positive")
    x = chvatal_tail_bound(n, k, r, m) if residual is None else residual
    validation, sampling = _permutation_terms(r, m, q, delta, delta_q)
    return validation + sampling + 2**r * x


def _permutation_terms(
    r: int, m: float, q: int, delta: float, delta_q: float
) -> tuple[float, float]:
    """Validation width r 3^{r-1} sqrt(...) and sampling width 2^r sqrt(ln(2/delta_q) / (2q))."""
    validation = r * 3 ** (r - 1) * math.sqrt(math.log(2 * r * q / delta) / (2 * m))
    sampling = 2**r * math.sqrt(math.log(2 / delta_q) / (2 * q))
    return validation, sampling


def _validation_split_m(n: int, k: int, r: int) -> float:
    return n ** (r / (r + 0.5)) / ((k + r - 1) * math.e)


def epsilon_permutation_asymptotic(n: int, k: int, r: int, delta: float, delta_q: float) -> float:
    """
    Width at m = n^{r/(r+1/2)} / ((k + r - 1) e) and q = n, in expanded form:
    n^{-r/(2r+1)} [r 3^{r-1} sqrt((k + r - 1) e ln(2rn/delta) / 2) + 2^r]
    + 2^r sqrt(ln(2/delta_q) / (2n)).
    """
    if n < 2:
        raise ParameterError(f"n must be at least 2, got {n}")
    rate = n ** (-r / (2 * r + 1))
    log_term = math.log(2 * r * n / delta)
    validation = r * 3 ** (r - 1) * math.sqrt((k + r - 1) * math.e * log_term / 2)
    return rate * (validation + 2**r) + 2**r * math.sqrt(math.log(2 / delta_q) / (2 * n))


def suggest_m_independent(n: int, k: int, r: int) -> tuple[int, int]:
    """
    m = round(n^{r/(r+1/2)} / ((k + r - 1) e)) and q = n.

    Raises:
        ParameterError: If m rounds to zero or r*m > n - k
    """
    if n < 2 or k < 1 or r < 1:
        raise ParameterError(f"Need n >= 2, k >= 1, r >= 1; got n={n}, k={k}, r={r}")
    value = _validation_split_m(n, k, r)
    m = int(round(value))
    if m < 1 or r * m > n - k:
        raise ParameterError(
            f"No feasible m for n={n}, k={k}, r={r}: {value:.3f} rounds to m={m}"
        )
    return m, n


def _hit_all_probabilities(r: int, m: int, draws: np.ndarray, compensated: bool) -> np.ndarray:
    """
    For each i in draws: probability that i positions drawn from r groups of m
    include at least one from every group, by inclusion and exclusion over the
    missed groups. Adjacent signed terms are paired before summation.
    """
    log_total = log_binomial(r * m, draws)
    signed = np.zeros((r + 1, draws.size))
    for j in range(r + 1):
        ratio = np.exp(log_binomial((r - j) * m, draws) - log_total)
        signed[j] = (-1) ** j * math.comb(r, j) * ratio
    pairs = [signed[j] + (signed[j + 1] if j + 1 <= r else 0.0) for j in range(0, r + 1, 2)]
    stacked = np.stack(pairs)
    if compensated:
        result = np.array([math.fsum(stacked[:, col]) for col in range(draws.size)])
    else:
        result = stacked.sum(axis=0)
    return np.clip(result, 0.0, 1.0)


def u_value(n: int, k: int, r: int, m: int, compensated: bool = True) -> float:
    """
    u(n, k, r): probability over uniform permutations that every V_i holds an
    example ranked before the k-th nearest example outside V.

    Sums over i, the number of validation examples ranked before that k-th
    neighbor, of P(exactly i of them) times P(those i touch every subset).

    Raises:
        ParameterError: If r*m > n - k
    """
    if min(n, k, r, m) < 1:
        raise ParameterError("n, k, r, m must be positive")
    if r * m > n - k:
        raise ParameterError(f"Infeasible: r*m = {r * m} exceeds n - k = {n - k}")
    validation = r * m
    draws = np.arange(r, min(n - k, validation) + 1)
    if draws.size == 0:
        return 0.0
    log_weight = (
        log_binomial(validation, draws)
        + log_binomial(n - validation, k)
        - log_binomial(n, k + draws)
    )
    weights = np.exp(log_weight) * k / (k + draws)
    terms = weights * _hit_all_probabilities(r, m, draws, compensated)
    total = math.fsum(terms.tolist()) if compensated else float(np.sum(terms))
    return float(min(1.0, max(0.0, total)))


def sample_c_R_probability(
    n: int, k: int, r: int, m: int, samples: int, seed: int = 0
) -> tuple[float, float]:
    """
    Monte Carlo estimate of u(n, k, r) from uniformly random rankings.

    Positions 0..rm-1 form V_1..V_r (m each); the rest lie outside V. Each sample
    assigns a random rank to every position and checks whether every V_i has a
    rank below the k-th smallest rank outside V.

    Returns:
        Tuple of (estimate, standard error)
    """
    if r * m > n - k:
        raise ParameterError(f"Infeasible: r*m = {r * m} exceeds n - k = {n - k}")
    if samples < 1:
        raise ParameterError(f"samples must be positive, got {samples}")
    rng = np.random.default_rng(seed)
    validation = r * m
    batch = max(1, 2_000_000 // n)
    hits = 0
    remaining = samples
    while remaining:
        size = min(batch, remaining)
        ranks = rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)
        outside_kth = np.partition(ranks[:, validation:], k - 1, axis=1)[:, k - 1]
        best = ranks[:, :validation].reshape(size, r, m).min(axis=2)
        hits += int(np.count_nonzero((best < outside_kth[:, None]).all(axis=1)))
        remaining -= size
    estimate = hits / samples
    return estimate, math.sqrt(estimate * (1 - estimate) / samples)


def independent_bound(
    data: ExampleSet | PartitionedDataset,
    cfg: BoundConfig,
    plan: PermutationPlan,
    tight: bool = True,
    workers: int = 1,
) -> BoundReport:
    """
    Permutation-averaged bound: mean_Q(s_V) +/- epsilon_q.

    With tight=True the residual uses u(n, k, r); otherwise the Chvatal-style form.
    Failure probability is delta + delta_q.

    Raises:
        ParameterError: If the partition is infeasible or the config truncates
    """
    if cfg.d != cfg.r:
        raise ParameterError("independent_bound does not truncate; leave depth unset or equal to r")
    examples = _in_sample(data)
    n = len(examples)
    # unequal sizes: smallest subset for the validation width, largest for the residual
    m = min(cfg.sizes)
    m_residual = max(cfg.sizes)
    values = permutation_s_V_values(examples, cfg, plan, workers)
    estimate = math.fsum(values) / plan.q

    if tight:
        residual = u_value(n, cfg.k, cfg.r, m_residual)
    else:
        residual = chvatal_tail_bound(n, cfg.k, cfg.r, m_residual)
    epsilon = epsilon_permutation(n, cfg.k, cfg.r, m, plan.q, cfg.delta, plan.delta_q, residual)
    epsilon_v, epsilon_sampling = _permutation_terms(cfg.r, m, plan.q, cfg.delta, plan.delta_q)
    epsilon_w = 2**cfg.r * residual

    lower = estimate - epsilon
    upper = estimate + epsilon
    if cfg.direction == BoundDirection.UPPER:
        final, lower_bound, upper_bound = upper, None, upper
    elif cfg.direction == BoundDirection.LOWER:
        final, lower_bound, upper_bound = lower, lower, None
    else:
        final, lower_bound, upper_bound = upper, lower, upper

    logger.debug(
        "bound_computed",
        variant=BoundVariant.INDEPENDENT.value,
        q=plan.q,
        tight=tight,
        estimate=estimate,
        epsilon=epsilon,
    )
    return BoundReport(
        variant=BoundVariant.INDEPENDENT,
        direction=cfg.direction,
        estimate=estimate,
        epsilon_v=epsilon_v,
        epsilon_w=epsilon_w,
        epsilon_sampling=epsilon_sampling,
        final_bound=final,
        lower_bound=lower_bound,
        upper_bound=upper_bound,
        failure_prob=cfg.delta + plan.delta_q,
        n=n,
        k=cfg.k,
        r=cfg.r,
        m=m,
        w=0,
        d=cfg.d,
        q=plan.q,
    )
