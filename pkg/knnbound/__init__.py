"""
knnbound - error bounds for k-nearest neighbor classifiers.

This package computes PAC bounds on the out-of-sample error of the k-nn
classifier built from all in-sample examples, using validation subsets and an
inclusion-exclusion rearrangement of the error rate.
"""

__version__ = "0.1.0"

from knnbound.models.bounds import BoundConfig, BoundReport, BoundVariant, PermutationPlan
from knnbound.models.dataset import ExampleSet, LabeledExample, PartitionedDataset
from knnbound.models.experiment import ExperimentConfig, TrialRecord

__all__ = [
    "LabeledExample",
    "ExampleSet",
    "PartitionedDataset",
    "BoundConfig",
    "BoundReport",
    "BoundVariant",
    "PermutationPlan",
    "ExperimentConfig",
    "TrialRecord",
]
