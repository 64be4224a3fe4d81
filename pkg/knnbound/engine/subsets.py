"""
Subset masks over the validation subsets and inclusion-exclusion term enumeration.

A subset S of R = {1, ..., r} is a Python int whose bit i-1 is set when V_i is in S.
The enumerations here are shared by the per-subset estimator f_i, the direct
double-sum estimator, the per-combination estimator f_A, and the exact identity check.
"""

from functools import lru_cache
from typing import NamedTuple

from knnbound.exceptions import ParameterError

MAX_R = 16


def full_mask(r: int) -> int:
    """The mask of R itself."""
    return (1 << r) - 1


def popcount(mask: int) -> int:
    """|S|."""
    return bin(mask).count("1")


def members(mask: int) -> list[int]:
    """0-based subset indices set in the mask, ascending."""
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def mask_of(indices: list[int] | tuple[int, ...] | set[int]) -> int:
    """Build a mask from 0-based subset indices."""
    mask = 0
    for i in indices:
        if i < 0:
            raise ParameterError(f"Subset index must be nonnegative, got {i}")
        mask |= 1 << i
    return mask


def validate_mask(mask: int, r: int) -> int:
    """Check that only the low r bits are set."""
    if not 1 <= r <= MAX_R:
        raise ParameterError(f"r must lie in 1..{MAX_R}, got {r}")
    if mask < 0 or mask >> r:
        raise ParameterError(f"Mask {mask:#b} has bits outside 1..{r}")
    return mask


def submasks(mask: int) -> list[int]:
    """All submasks of mask, the empty set included, in descending order."""
    result = []
    sub = mask
    while True:
        result.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & mask
    return result


def truncation_width(s_mask: int, depth: int) -> int:
    """u(S) = max(2 * floor((d - |S|) / 2), 0), the largest |T| kept at depth d."""
    if depth < 0:
        raise ParameterError(f"Depth must be nonnegative, got {depth}")
    return max(2 * ((depth - popcount(s_mask)) // 2), 0)


class InclusionExclusionTerm(NamedTuple):
    """One (S, T) term: sign * coefficient * I(c_{S u T}(x) and g_S(x) != y)."""

    s_mask: int
    union_mask: int
    sign: int
    coefficient: float


def enumerate_pairs(available: int, depth: int | None) -> list[tuple[int, int]]:
    """
    Enumerate disjoint (S, T) with S u T inside `available`.

    T is limited to |T| <= u(S) when a depth is given.
    """
    pairs = []
    for s_mask in submasks(available):
        limit = truncation_width(s_mask, depth) if depth is not None else None
        for t_mask in submasks(available & ~s_mask):
            if limit is not None and popcount(t_mask) > limit:
                continue
            pairs.append((s_mask, t_mask))
    return pairs


@lru_cache(maxsize=256)
def f_i_terms(i: int, sizes: tuple[int, ...], depth: int) -> tuple[InclusionExclusionTerm, ...]:
    """
    Terms of f_i for validation subset i (0-based).

    The coefficient is |V_i| / |V_{R - (S u T)}|, where V_{R - (S u T)} pools every
    subset outside S u T; i is always outside, so the pool is never empty.
    """
    r = len(sizes)
    if not 0 <= i < r:
        raise ParameterError(f"Subset index {i} out of range for r = {r}")
    if not 0 <= depth <= r:
        raise ParameterError(f"Depth must lie in 0..{r}, got {depth}")
    full = full_mask(r)
    available = full & ~(1 << i)
    terms = []
    for s_mask, t_mask in enumerate_pairs(available, depth):
        union = s_mask | t_mask
        pooled = sum(sizes[j] for j in members(full & ~union))
        sign = -1 if popcount(t_mask) % 2 else 1
        terms.append(InclusionExclusionTerm(s_mask, union, sign, sizes[i] / pooled))
    return tuple(terms)

