"""
knnbound data models.

This module exports all Pydantic models used by the bound computations.
"""

from knnbound.models.bounds import (
    BoundConfig,
    BoundDirection,
    BoundReport,
    BoundVariant,
    DeltaSchedule,
    PermutationPlan,
    ScheduleSelector,
    SubsetTerm,
)
from knnbound.models.dataset import ExampleSet, LabeledExample, PartitionedDataset
from knnbound.models.experiment import (
    CellSummary,
    CoverageReport,
    CoverageSuite,
    ExperimentConfig,
    ExperimentResult,
    IdentityReport,
    SkippedCell,
    TrialRecord,
)

__all__ = [
    # Dataset models
    "LabeledExample",
    "ExampleSet",
    "PartitionedDataset",
    # Bound models
    "BoundConfig",
    "BoundDirection",
    "BoundReport",
    "BoundVariant",
    "DeltaSchedule",
    "PermutationPlan",
    "ScheduleSelector",
    "SubsetTerm",
    # Experiment models
    "ExperimentConfig",
    "TrialRecord",
    "SkippedCell",
    "CellSummary",
    "ExperimentResult",
    "IdentityReport",
    "CoverageSuite",
    "CoverageReport",
]
