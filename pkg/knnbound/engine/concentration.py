"""
Probability-bound primitives.

Hoeffding and empirical Bernstein bounds on means of bounded values, exact
binomial tail inversion, the exact hypergeometric tail, and the Chvatal-style
tail bound. Callers split failure probabilities; nothing here applies a union bound.
"""

import math
from collections.abc import Sequence

import numpy as np
from scipy.optimize import bisect
from scipy.special import gammaln, logsumexp
from scipy.stats import binom

from knnbound.exceptions import ParameterError
from knnbound.models.bounds import BoundDirection

BISECTION_TOLERANCE = 1e-10
BISECTION_MAX_ITER = 200


def _as_values(values: Sequence[float] | np.ndarray, minimum: int) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64).reshape(-1)
    if array.size < minimum:
        raise ParameterError(f"Need at least {minimum} values, got {array.size}")
    return array


def _check_range(range_len: float) -> None:
    if not range_len > 0:
        raise ParameterError(f"range_len must be positive, got {range_len}")


def _check_delta(delta: float, upper: float) -> None:
    if not 0.0 < delta <= upper:
        raise ParameterError(f"delta must lie in (0, {upper}], got {delta}")


def log_binomial(n: float | np.ndarray, k: float | np.ndarray) -> np.ndarray:
    """log C(n, k) via log-gamma; -inf outside 0 <= k <= n."""
    n = np.asarray(n, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    valid = (k >= 0) & (k <= n)
    safe_k = np.where(valid, k, 0.0)
    safe_n = np.where(valid, n, 0.0)
    value = gammaln(safe_n + 1) - gammaln(safe_k + 1) - gammaln(safe_n - safe_k + 1)
    return np.where(valid, value, -np.inf)


def hoeffding_bound(
    values: Sequence[float] | np.ndarray,
    range_len: float,
    delta: float,
    direction: BoundDirection = BoundDirection.UPPER,
) -> float:
    """
    Hoeffding bound on the mean of independent values with range length `range_len`.

    Upper/lower return mean +/- range * sqrt(ln(1/delta) / (2n)); two-sided
    returns only the half-width range * sqrt(ln(2/delta) / (2n)).

    Raises:
        ParameterError: On empty values, nonpositive range, or delta out of range
    """
    array = _as_values(values, 1)
    _check_range(range_len)
    n = array.size
    if direction == BoundDirection.TWO_SIDED:
        _check_delta(delta, 2.0)
        return range_len * math.sqrt(math.log(2.0 / delta) / (2 * n))
    _check_delta(delta, 1.0)
    width = range_len * math.sqrt(math.log(1.0 / delta) / (2 * n))
    mean = float(np.mean(array))
    return mean + width if direction == BoundDirection.UPPER else mean - width


def bernstein_width(
    values: Sequence[float] | np.ndarray, range_len: float, delta: float
) -> float:
    """sqrt(2 Var ln(2/delta) / n) + range * 7 ln(2/delta) / (3(n - 1)), Var unbiased."""
    array = _as_values(values, 2)
    _check_range(range_len)
    _check_delta(delta, 2.0)
    n = array.size
    log_term = math.log(2.0 / delta)
    variance = float(np.var(array, ddof=1))
    return math.sqrt(2 * variance * log_term / n) + range_len * 7 * log_term / (3 * (n - 1))


def empirical_bernstein_bound(
    values: Sequence[float] | np.ndarray,
    range_len: float,
    delta: float,
    direction: BoundDirection = BoundDirection.UPPER,
) -> float:
    """
    Empirical Bernstein bound (Maurer-Pontil form) on the mean.

    One-sided bounds use ln(2/delta) as written; the two-sided half-width spends
    delta/2 on each side.

    Raises:
        ParameterError: If fewer than two values are given
    """
    array = _as_values(values, 2)
    if direction == BoundDirection.TWO_SIDED:
        _check_delta(delta, 4.0)
        return bernstein_width(array, range_len, delta / 2)
    width = bernstein_width(array, range_len, delta)
    mean = float(np.mean(array))
    return mean + width if direction == BoundDirection.UPPER else mean - width


def binomial_tail_upper(successes: int, trials: int, delta: float) -> float:
    """
    Exact binomial upper confidence limit.

    The largest p with P(Binomial(trials, p) <= successes) >= delta, found by
    bisection on the exact CDF.

    Example:
        binomial_tail_upper(0, 10, 0.05)  # 1 - 0.05 ** (1 / 10)
    """
    if trials < 1:
        raise ParameterError(f"trials must be positive, got {trials}")
    if not 0 <= successes <= trials:
        raise ParameterError(f"successes must lie in 0..{trials}, got {successes}")
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    if successes == trials:
        return 1.0

    def excess(p: float) -> float:
        return float(binom.cdf(successes, trials, p)) - delta

    low = successes / trials
    if excess(low) == 0.0:
        return low
    if excess(low) < 0.0:
        # CDF already below delta at the empirical rate; the limit lies to the left
        return float(
            bisect(excess, 0.0, low, xtol=BISECTION_TOLERANCE, maxiter=BISECTION_MAX_ITER)
        )
    return float(bisect(excess, low, 1.0, xtol=BISECTION_TOLERANCE, maxiter=BISECTION_MAX_ITER))


def hypergeometric_tail_exact(population: int, marked: int, draws: int, min_marked: int) -> float:
    """
    P(X >= min_marked) for X hypergeometric: `draws` taken without replacement from
    `population` items of which `marked` are marked. Summed in log space.
    """
    if min(population, marked, draws, min_marked) < 0:
        raise ParameterError("Hypergeometric parameters must be nonnegative")
    if marked > population or draws > population:
        raise ParameterError(
            f"marked ({marked}) and draws ({draws}) cannot exceed population ({population})"
        )
    low = max(0, draws - (population - marked))
    high = min(draws, marked)
    start = max(min_marked, low)
    if start > high:
        return 0.0
    i = np.arange(start, high + 1)
    log_terms = (
        log_binomial(draws, i)
        + log_binomial(population - draws, marked - i)
        - log_binomial(population, marked)
    )
    return float(min(1.0, np.exp(logsumexp(log_terms))))


def chvatal_tail_bound(n_eff: float, k: int, r: int, m: float) -> float:
    """((k + r - 1) m / n_eff)^r e^r, the bound on P(c_R') with n_eff = n - w."""
    if min(n_eff, k, r, m) <= 0:
        raise ParameterError(
            f"n_eff, k, r, m must be positive, got {n_eff}, {k}, {r}, {m}"
        )
    return float(((k + r - 1) * m / n_eff) ** r * math.e**r)
