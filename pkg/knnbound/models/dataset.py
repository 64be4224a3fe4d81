"""
Dataset models: labeled examples, example sequences, and positional partitions.

An example sequence F is stored column-wise (inputs, labels, tie-break values) so
neighbor search can run on arrays. A partition splits F by position into the
validation subsets V_1..V_r, the holdout tail W, and the remainder F-V-W.
"""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from knnbound.exceptions import ParameterError


class LabeledExample(BaseModel):
    """
    A single labeled example (x, y) with its tie-break value Z.

    Example:
        LabeledExample(input=[0.25, -0.5], label=0, tiebreak=0.731)
    """

    model_config = ConfigDict(frozen=True)

    input: tuple[float, ...] = Field(..., description="Feature vector")
    label: int = Field(..., description="Binary label (0 or 1)")
    tiebreak: float = Field(..., description="Tie-break value drawn uniformly from [0, 1]")

    @field_validator("input")
    @classmethod
    def validate_input(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        """Inputs must be non-empty."""
        if len(v) == 0:
            raise ValueError("Input vector cannot be empty")
        return v

    @field_validator("label")
    @classmethod
    def validate_label(cls, v: int) -> int:
        """Labels are binary."""
        if v not in (0, 1):
            raise ValueError(f"Label must be 0 or 1, got {v}")
        return v

    @field_validator("tiebreak")
    @classmethod
    def validate_tiebreak(cls, v: float) -> float:
        """Tie-break values lie in [0, 1]."""
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"Tiebreak must lie in [0, 1], got {v}")
        return v


class ExampleSet(BaseModel):
    """
    An ordered, immutable sequence of labeled examples (the in-sample set F).

    Position i in the sequence is the example's index for tie-breaking.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    inputs: np.ndarray = Field(..., description="Inputs, shape (n, dim)")
    labels: np.ndarray = Field(..., description="Binary labels, shape (n,)")
    tiebreaks: np.ndarray = Field(..., description="Tie-break values in [0, 1], shape (n,)")

    @model_validator(mode="before")
    @classmethod
    def coerce_arrays(cls, data: Any) -> Any:
        """Convert array-likes to read-only numpy arrays with canonical dtypes."""
        if not isinstance(data, dict):
            return data
        coerced = dict(data)
        if "inputs" in coerced:
            inputs = np.array(coerced["inputs"], dtype=np.float64)
            if inputs.ndim == 1:
                inputs = inputs.reshape(-1, 1) if inputs.size else inputs.reshape(0, 1)
            coerced["inputs"] = inputs
        if "labels" in coerced:
            coerced["labels"] = np.array(coerced["labels"], dtype=np.int8)
        if "tiebreaks" in coerced:
            coerced["tiebreaks"] = np.array(coerced["tiebreaks"], dtype=np.float64)
        for key in ("inputs", "labels", "tiebreaks"):
            if key in coerced:
                coerced[key].setflags(write=False)
        return coerced

    @model_validator(mode="after")
    def validate_shapes(self) -> "ExampleSet":
        """Check shapes and value domains."""
        if self.inputs.ndim != 2:
            raise ValueError(f"inputs must be 2-dimensional, got shape {self.inputs.shape}")
        n = self.inputs.shape[0]
        if self.labels.shape != (n,) or self.tiebreaks.shape != (n,):
            raise ValueError(
                f"labels and tiebreaks must have shape ({n},), got "
                f"{self.labels.shape} and {self.tiebreaks.shape}"
            )
        if n and not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if n and ((self.tiebreaks < 0.0) | (self.tiebreaks > 1.0)).any():
            raise ValueError("tiebreaks must lie in [0, 1]")
        return self

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def dim(self) -> int:
        """Input dimension."""
        return int(self.inputs.shape[1])

    def example(self, position: int) -> LabeledExample:
        """Get the example at a position as a LabeledExample."""
        return LabeledExample(
            input=tuple(float(v) for v in self.inputs[position]),
            label=int(self.labels[position]),
            tiebreak=float(self.tiebreaks[position]),
        )

    def take(self, positions: np.ndarray) -> "ExampleSet":
        """Return a new set holding the examples at the given positions, in that order."""
        positions = np.asarray(positions, dtype=np.int64)
        return ExampleSet(
            inputs=self.inputs[positions],
            labels=self.labels[positions],
            tiebreaks=self.tiebreaks[positions],
        )

    @classmethod
    def from_examples(cls, examples: list[LabeledExample]) -> "ExampleSet":
        """Build a set from individual examples; all inputs must share a dimension."""
        if not examples:
            raise ParameterError("Cannot build an example set from an empty list")
        dims = {len(e.input) for e in examples}
        if len(dims) != 1:
            raise ParameterError(f"Inconsistent input dimensions: {sorted(dims)}")
        return cls(
            inputs=[e.input for e in examples],
            labels=[e.label for e in examples],
            tiebreaks=[e.tiebreak for e in examples],
        )


class PartitionedDataset(BaseModel):
    """
    Positional partition of F into V_1..V_r, W, and F-V-W.

    V_i occupies positions offset(i) .. offset(i) + |V_i| - 1 (subsets laid out
    back to back from the start of F); W is the last w positions of F.
    Subset indices are 0-based here: V_1 of the derivations is subset 0.

    Example:
        PartitionedDataset(examples=F, k=3, subset_sizes=[3125] * 3, w=3125)
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    examples: ExampleSet = Field(..., description="The in-sample sequence F")
    k: int = Field(..., description="Number of neighbors")
    subset_sizes: tuple[int, ...] = Field(..., description="|V_1|, ..., |V_r|")
    w: int = Field(default=0, description="|W|, the holdout tail size")

    @model_validator(mode="after")
    def validate_layout(self) -> "PartitionedDataset":
        """Enforce r >= 1, positive subset sizes, and sum(|V_i|) + w <= n - k."""
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if len(self.subset_sizes) < 1:
            raise ValueError("At least one validation subset is required")
        if any(size < 1 for size in self.subset_sizes):
            raise ValueError(f"Subset sizes must be positive, got {self.subset_sizes}")
        if self.w < 0:
            raise ValueError(f"w must be nonnegative, got {self.w}")
        n = len(self.examples)
        used = sum(self.subset_sizes) + self.w
        if used > n - self.k:
            raise ValueError(
                f"Partition infeasible: sum(|V_i|) + w = {used} exceeds n - k = {n - self.k}"
            )
        return self

    @property
    def n(self) -> int:
        return len(self.examples)

    @property
    def r(self) -> int:
        return len(self.subset_sizes)

    @property
    def m(self) -> int:
        """Common subset size; raises if subsets differ in size."""
        if len(set(self.subset_sizes)) != 1:
            raise ParameterError(f"Subsets have unequal sizes {self.subset_sizes}")
        return self.subset_sizes[0]

    @property
    def validation_size(self) -> int:
        """|V|."""
        return sum(self.subset_sizes)

    def subset_positions(self, i: int) -> np.ndarray:
        """Positions of V_{i+1} in F."""
        if not 0 <= i < self.r:
            raise ParameterError(f"Subset index {i} out of range for r = {self.r}")
        start = sum(self.subset_sizes[:i])
        return np.arange(start, start + self.subset_sizes[i], dtype=np.int64)

    def validation_positions(self) -> np.ndarray:
        """Positions of V = V_1 u ... u V_r."""
        return np.arange(0, self.validation_size, dtype=np.int64)

    def remainder_positions(self) -> np.ndarray:
        """Positions of F - V (W included)."""
        return np.arange(self.validation_size, self.n, dtype=np.int64)

    def reduced_positions(self) -> np.ndarray:
        """Positions of (F - V) - W."""
        return np.arange(self.validation_size, self.n - self.w, dtype=np.int64)

    def holdout_positions(self) -> np.ndarray:
        """Positions of W, the last w examples of F."""
        return np.arange(self.n - self.w, self.n, dtype=np.int64)
