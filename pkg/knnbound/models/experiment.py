"""
Experiment, identity-check, and coverage models.

These models describe an experiment grid, the per-trial records it produces,
and the verdicts of the exact-identity and Monte Carlo coverage checks.
"""

import math
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, field_validator, model_validator

from knnbound.config import settings
from knnbound.models.bounds import BoundVariant

CSV_COLUMNS = (
    "trial",
    "n",
    "k",
    "r",
    "d",
    "m",
    "w",
    "variant",
    "bound",
    "test_error",
    "gap",
    "seed",
    "runtime_s",
)

DEFAULT_M_FRACTIONS = [0.00625, 0.0125, 0.025, 0.0375, 0.05, 0.0625, 0.075, 0.0875, 0.1]


class ExperimentConfig(BaseModel):
    """
    A grid of bound computations repeated over independent trials.

    Each trial draws n in-sample examples and test_size fresh test examples,
    then evaluates the chosen variant at every (m fraction, r, d) cell with
    m = round(fraction * n) and w = m.

    Example:
        ExperimentConfig(n=50000, k=3, trials=20, r_values=[3], d_values=[2],
                         m_fractions=[0.0625])
    """

    n: int = Field(default=50000, description="In-sample examples per trial")
    k: int = Field(default=3, description="Number of neighbors (odd)")
    dim: int = Field(default=2, description="Input dimension")
    noise: float = Field(default=0.1, description="Label flip probability")
    trials: int = Field(default=100, description="Number of independent trials")
    m_fractions: list[float] = Field(
        default_factory=lambda: list(DEFAULT_M_FRACTIONS),
        description="Validation subset sizes as fractions of n",
    )
    r_values: list[int] = Field(
        default_factory=lambda: [1, 2, 3, 4, 5], description="Numbers of validation subsets"
    )
    d_values: list[int] | None = Field(
        default=None, description="Truncation depths (None means every d < r)"
    )
    delta: float = Field(default=0.025, description="Failure probability for validation terms")
    delta_w: float = Field(default=0.025, description="Failure probability for the W term")
    test_size: int = Field(
        default_factory=lambda: settings.default_test_size,
        description="Fresh test examples per trial",
    )
    seed: int = Field(default_factory=lambda: settings.default_seed, description="Master seed")
    variant: BoundVariant = Field(default=BoundVariant.TEST, description="Bound variant")
    metric: str = Field(default="euclidean", description="Registered metric name")
    output: Path | None = Field(default=None, description="CSV output path")
    workers: int = Field(default=1, description="Worker processes for trials")
    record_runtime: bool = Field(
        default=True, description="Record wall-clock time (False writes 0.0)"
    )

    @field_validator("n", "dim", "trials", "test_size", "workers")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"must be positive, got {v}")
        return v

    @field_validator("k")
    @classmethod
    def validate_k(cls, v: int) -> int:
        if v < 1 or v % 2 == 0:
            raise ValueError(f"k must be a positive odd integer, got {v}")
        return v

    @field_validator("noise")
    @classmethod
    def validate_noise(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"noise must lie in [0, 1], got {v}")
        return v

    @field_validator("delta", "delta_w")
    @classmethod
    def validate_probability(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"probability must lie in (0, 1), got {v}")
        return v

    @field_validator("m_fractions")
    @classmethod
    def validate_fractions(cls, v: list[float]) -> list[float]:
        """Every fraction lies strictly between 0 and 1."""
        if not v:
            raise ValueError("m_fractions must not be empty")
        if any(not 0.0 < c < 1.0 for c in v):
            raise ValueError(f"m_fractions must lie in (0, 1), got {v}")
        return v

    @field_validator("r_values")
    @classmethod
    def validate_r_values(cls, v: list[int]) -> list[int]:
        if not v:
            raise ValueError("r_values must not be empty")
        if any(not 1 <= r <= settings.max_r for r in v):
            raise ValueError(f"r_values must lie in 1..{settings.max_r}, got {v}")
        return v

    @field_validator("d_values")
    @classmethod
    def validate_d_values(cls, v: list[int] | None) -> list[int] | None:
        if v is not None and (not v or any(d < 0 for d in v)):
            raise ValueError(f"d_values must be a nonempty list of nonnegative depths, got {v}")
        return v

    @field_validator("variant")
    @classmethod
    def validate_variant(cls, v: BoundVariant) -> BoundVariant:
        """Permutation-averaged bounds are run through the bound command, not the grid."""
        if v == BoundVariant.INDEPENDENT:
            raise ValueError("the experiment grid supports test, result, and combination bounds")
        return v

    def depths_for(self, r: int) -> list[int]:
        """Depths evaluated for r: every d < r, the listed ones, or r itself for
        variants that do not truncate."""
        if self.variant != BoundVariant.TEST:
            return [r]
        if self.d_values is None:
            return list(range(r))
        return [d for d in self.d_values if d <= r]


class TrialRecord(BaseModel):
    """One (trial, cell) outcome; gap is bound - test_error exactly."""

    trial: int
    n: int
    k: int
    r: int
    d: int
    m: int
    w: int
    variant: BoundVariant
    bound: float = Field(..., description="Reported (clamped) bound")
    test_error: float = Field(..., description="Error of g* on the fresh test examples")
    gap: float = Field(..., description="bound - test_error")
    seed: int = Field(..., description="Seed of the trial's stream")
    runtime_s: float = Field(default=0.0, description="Wall-clock seconds for the cell")

    @model_validator(mode="after")
    def validate_gap(self) -> "TrialRecord":
        if self.gap != self.bound - self.test_error:
            raise ValueError(f"gap {self.gap} != bound - test_error")
        return self

    def to_row(self) -> list[Any]:
        """Values in CSV column order."""
        return [
            self.variant.value if column == "variant" else getattr(self, column)
            for column in CSV_COLUMNS
        ]


class SkippedCell(BaseModel):
    """A grid cell that could not be evaluated."""

    trial: int
    r: int
    d: int
    m: int
    reason: str


class CellSummary(BaseModel):
    """Gap statistics for one (r, d, m) cell across trials."""

    r: int
    d: int
    m: int
    fraction: float = Field(..., description="m / n")
    trials: int = Field(..., description="Trials with a record for this cell")
    mean_gap: float
    std_gap: float = Field(..., description="Sample standard deviation of per-trial gaps")
    std_mean: float = Field(..., description="std_gap / sqrt(trials)")
    mean_bound: float
    mean_test_error: float


class ExperimentResult(BaseModel):
    """Records, skipped cells, and per-cell summaries of a run."""

    config: ExperimentConfig
    records: list[TrialRecord] = Field(default_factory=list)
    skipped: list[SkippedCell] = Field(default_factory=list)
    summaries: list[CellSummary] = Field(default_factory=list)

    def best_cell(self) -> CellSummary | None:
        """The cell with the smallest mean gap."""
        return min(self.summaries, key=lambda s: s.mean_gap, default=None)

    def best_by_r(self) -> dict[int, CellSummary]:
        """Smallest mean gap for each r."""
        best: dict[int, CellSummary] = {}
        for summary in self.summaries:
            current = best.get(summary.r)
            if current is None or summary.mean_gap < current.mean_gap:
                best[summary.r] = summary
        return best


class IdentityReport(BaseModel):
    """
    Exact checks of the inclusion-exclusion rearrangement on a finite domain.

    Example:
        IdentityReport(domain_size=200, r=2, k=3, ..., passed=True)
    """

    domain_size: int
    r: int
    k: int
    n: int
    m: int
    w: int
    seed: int
    tolerance: float
    p_star: float = Field(..., description="Exact error of g* over the domain")
    signed_sum: float = Field(..., description="Full signed inclusion-exclusion sum")
    b_sum: float = Field(..., description="sum_S P(b_S and g_S errs)")
    b_partition: float = Field(..., description="sum_S P(b_S), which must be 1")
    truncated_sums: dict[int, float] = Field(
        default_factory=dict, description="Depth d -> truncated signed sum"
    )
    t_w: float = Field(..., description="Residual sum over S u T = R")
    c_r_probability: float = Field(..., description="P(c_R)")
    c_r_prime_probability: float | None = Field(default=None, description="P(c_R') when w > 0")
    failures: list[str] = Field(default_factory=list, description="Failed checks")

    @property
    def passed(self) -> bool:
        return not self.failures

    def __str__(self) -> str:
        status = "✓ PASS" if self.passed else "✗ FAIL"
        return (
            f"{status}: r={self.r} k={self.k} domain={self.domain_size} "
            f"p*={self.p_star:.12f} signed_sum={self.signed_sum:.12f}"
        )


class CoverageSuite(str, Enum):
    """Monte Carlo coverage and oracle suites."""

    HOEFFDING = "hoeffding"
    BERNSTEIN = "bernstein"
    BINOMIAL = "binomial"
    RESULT_BOUND = "result-bound"
    TEST_BOUND = "test-bound"
    COMBINATION_BOUND = "combination-bound"
    INDEPENDENT_BOUND = "independent-bound"
    U_VALUE = "u-value"
    RESIDUAL_RATE = "residual-rate"


class CoverageReport(BaseModel):
    """
    Observed failure rate of one suite against its budget.

    A suite passes when the observed rate is at most budget + 3 sigma, with
    sigma = sqrt(budget (1 - budget) / repetitions). Oracle suites (u-value,
    residual-rate) report a z-score in `details` and use budget 0.
    """

    suite: CoverageSuite
    repetitions: int
    failures: int
    budget: float = Field(..., description="Allowed failure probability")
    seed: int
    details: dict[str, Any] = Field(default_factory=dict)
    passed: bool

    @property
    def failure_rate(self) -> float:
        return self.failures / self.repetitions

    @property
    def threshold(self) -> float:
        """budget + 3 sigma."""
        return self.budget + 3 * math.sqrt(self.budget * (1 - self.budget) / self.repetitions)

    def __str__(self) -> str:
        status = "✓ PASS" if self.passed else "✗ FAIL"
        return (
            f"{status}: {self.suite.value} failures={self.failures}/{self.repetitions} "
            f"budget={self.budget:.4f}"
        )
