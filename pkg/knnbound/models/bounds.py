"""
Bound configuration and report models.

BoundConfig selects the partition sizes, failure probabilities, truncation depth,
variant, and direction of a bound. BoundReport itemizes how a bound was assembled.
"""

import math
from enum import Enum
from typing import Any

from pydantic import BaseModel, Field, field_validator, model_validator

from knnbound.config import settings


class BoundDirection(str, Enum):
    """Which side(s) of the error rate a bound covers."""

    UPPER = "upper"
    LOWER = "lower"
    TWO_SIDED = "two-sided"


class BoundVariant(str, Enum):
    """How the validation terms and the W term are bounded."""

    RESULT = "result"  # Hoeffding on each f_i, Hoeffding on W
    TEST = "test"  # Empirical Bernstein on truncated f_i, binomial tail on W
    COMBINATION = "combination"  # One Hoeffding validation per combination A
    INDEPENDENT = "independent"  # Permutation-averaged estimate, analytic W term


class ScheduleSelector(str, Enum):
    """Allocation of failure probability across combination levels."""

    CLOSED_FORM = "closed-form"
    UNIFORM = "uniform"
    OPTIMIZED = "optimized"


def _check_probability(v: float) -> float:
    if not 0.0 < v < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {v}")
    return v


class BoundConfig(BaseModel):
    """
    Parameters of a data-dependent bound.

    Example:
        BoundConfig(k=3, r=3, m=3125, w=3125, depth=2, variant="test")
    """

    k: int = Field(default=3, description="Number of neighbors (odd)")
    r: int = Field(..., description="Number of validation subsets")
    m: int = Field(..., description="Size of each validation subset")
    w: int = Field(default=0, description="Size of the holdout tail W")
    depth: int | None = Field(
        default=None, description="Truncation depth d in 0..r (None means r, untruncated)"
    )
    delta: float = Field(default=0.025, description="Failure probability for validation terms")
    delta_w: float = Field(default=0.025, description="Failure probability for the W term")
    delta_q: float = Field(
        default=0.025, description="Failure probability for permutation sampling"
    )
    variant: BoundVariant = Field(default=BoundVariant.TEST, description="Bound variant")
    direction: BoundDirection = Field(default=BoundDirection.UPPER, description="Bound direction")
    metric: str = Field(default="euclidean", description="Registered metric name")
    subset_sizes: tuple[int, ...] | None = Field(
        default=None, description="Per-subset sizes |V_1|..|V_r|, overriding m"
    )

    @field_validator("k")
    @classmethod
    def validate_k(cls, v: int) -> int:
        """k must be a positive odd integer."""
        if v < 1 or v % 2 == 0:
            raise ValueError(f"k must be a positive odd integer, got {v}")
        return v

    @field_validator("r")
    @classmethod
    def validate_r(cls, v: int) -> int:
        """r is limited by the subset mask width."""
        if not 1 <= v <= settings.max_r:
            raise ValueError(f"r must lie in 1..{settings.max_r}, got {v}")
        return v

    @field_validator("m")
    @classmethod
    def validate_m(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"m must be positive, got {v}")
        return v

    @field_validator("w")
    @classmethod
    def validate_w(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"w must be nonnegative, got {v}")
        return v

    @field_validator("delta", "delta_w", "delta_q")
    @classmethod
    def validate_probability(cls, v: float) -> float:
        return _check_probability(v)

    @model_validator(mode="after")
    def validate_depth_and_sizes(self) -> "BoundConfig":
        """Depth must lie in 0..r; explicit subset sizes must match r."""
        if self.depth is not None and not 0 <= self.depth <= self.r:
            raise ValueError(f"depth must lie in 0..{self.r}, got {self.depth}")
        if self.subset_sizes is not None:
            if len(self.subset_sizes) != self.r:
                raise ValueError(
                    f"subset_sizes has {len(self.subset_sizes)} entries, expected r = {self.r}"
                )
            if any(size < 1 for size in self.subset_sizes):
                raise ValueError("subset sizes must be positive")
        return self

    @property
    def d(self) -> int:
        """Resolved truncation depth."""
        return self.r if self.depth is None else self.depth

    @property
    def sizes(self) -> tuple[int, ...]:
        """|V_1|, ..., |V_r|."""
        return self.subset_sizes if self.subset_sizes is not None else (self.m,) * self.r


class PermutationPlan(BaseModel):
    """Sampled permutations for permutation-averaged estimates."""

    q: int = Field(..., description="Number of sampled permutations")
    seed: int = Field(default=0, description="Seed for permutation sampling")
    delta_q: float = Field(default=0.025, description="Failure probability for sampling")
    force_identity: bool = Field(
        default=False, description="Use the identity as the first permutation"
    )

    @field_validator("q")
    @classmethod
    def validate_q(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"q must be positive, got {v}")
        return v

    @field_validator("delta_q")
    @classmethod
    def validate_probability(cls, v: float) -> float:
        return _check_probability(v)


class DeltaSchedule(BaseModel):
    """
    Failure probability per combination level j = |A|, for A a proper subset of R.

    Every one of the C(r, j) combinations at level j is validated with delta_j.
    """

    r: int = Field(..., description="Number of validation subsets")
    delta: float = Field(..., description="Total failure probability")
    per_level: dict[int, float] = Field(..., description="Level j -> delta_j")
    selector: ScheduleSelector = Field(default=ScheduleSelector.CLOSED_FORM)

    @model_validator(mode="after")
    def validate_budget(self) -> "DeltaSchedule":
        """Levels 0..r-1 present, each positive, and sum_j C(r, j) delta_j <= delta."""
        if sorted(self.per_level) != list(range(self.r)):
            raise ValueError(f"per_level must cover levels 0..{self.r - 1}")
        if any(value <= 0 for value in self.per_level.values()):
            raise ValueError("per-level failure probabilities must be positive")
        if self.spent() > self.delta * (1 + 1e-12):
            raise ValueError(f"schedule spends {self.spent()} > delta = {self.delta}")
        return self

    def spent(self) -> float:
        """sum_j C(r, j) delta_j."""
        return math.fsum(math.comb(self.r, j) * dj for j, dj in self.per_level.items())


class SubsetTerm(BaseModel):
    """Per-subset diagnostic: the mean of the subset's values and its bound width."""

    index: int = Field(..., description="Subset index (0-based) or combination mask")
    size: int = Field(..., description="Number of values")
    mean: float = Field(..., description="Empirical mean of the values")
    width: float = Field(..., description="Concentration width added to the mean")
    range_len: float = Field(..., description="Range length used by the concentration bound")


class BoundReport(BaseModel):
    """
    Result of a bound computation.

    `final_bound` is the bound in the requested direction (the upper end for
    two-sided reports) before clamping; `reported_bound` clamps it to [0, 1].
    """

    variant: BoundVariant
    direction: BoundDirection
    estimate: float = Field(..., description="s_V, or its mean over sampled permutations")
    epsilon_v: float = Field(..., description="Validation-term width")
    epsilon_w: float = Field(..., description="W-term (or analytic residual) bound")
    epsilon_sampling: float | None = Field(
        default=None, description="Permutation-sampling width (independent variant)"
    )
    final_bound: float = Field(..., description="Unclamped bound in the requested direction")
    lower_bound: float | None = Field(default=None, description="Unclamped lower end")
    upper_bound: float | None = Field(default=None, description="Unclamped upper end")
    failure_prob: float = Field(..., description="Probability the bound fails")
    per_subset_terms: list[SubsetTerm] = Field(default_factory=list)
    n: int
    k: int
    r: int
    m: int
    w: int
    d: int
    w_hits: int | None = Field(default=None, description="Number of c_R' hits in W")
    q: int | None = Field(default=None, description="Number of sampled permutations")

    @property
    def reported_bound(self) -> float:
        """final_bound clamped to [0, 1]."""
        return min(1.0, max(0.0, self.final_bound))

    def to_record(self) -> str:
        """Flat key=value record, one line, space separated."""
        fields: dict[str, Any] = {
            "variant": self.variant.value,
            "direction": self.direction.value,
            "n": self.n,
            "k": self.k,
            "r": self.r,
            "m": self.m,
            "w": self.w,
            "d": self.d,
            "estimate": self.estimate,
            "epsilon_v": self.epsilon_v,
            "epsilon_w": self.epsilon_w,
            "final_bound": self.final_bound,
            "reported_bound": self.reported_bound,
            "failure_prob": self.failure_prob,
        }
        if self.epsilon_sampling is not None:
            fields["epsilon_sampling"] = self.epsilon_sampling
        if self.lower_bound is not None:
            fields["lower_bound"] = self.lower_bound
        if self.upper_bound is not None:
            fields["upper_bound"] = self.upper_bound
        if self.w_hits is not None:
            fields["w_hits"] = self.w_hits
        if self.q is not None:
            fields["q"] = self.q
        return " ".join(f"{key}={value}" for key, value in fields.items())
