"""
Dataset generation, reordering, and partitioning.

The synthetic distribution draws inputs uniformly from [-1, 1]^dim. The noiseless
label is 1 when the number of negative coordinates is even and 0 when it is odd;
each label is then flipped with probability `noise`.
"""

import numpy as np

from knnbound.exceptions import ParameterError
from knnbound.logging_config import get_logger
from knnbound.models.dataset import ExampleSet, PartitionedDataset

logger = get_logger(__name__)


def quadrant_label(inputs: np.ndarray) -> np.ndarray:
    """Noiseless label: 1 if the count of negative coordinates is even, else 0."""
    negatives = np.count_nonzero(np.asarray(inputs) < 0.0, axis=-1)
    return (negatives % 2 == 0).astype(np.int8)


def generate_quadrant_dataset(
    n: int, dim: int = 2, noise: float = 0.1, seed: int = 0
) -> ExampleSet:
    """
    Generate n examples from the noisy quadrant-parity distribution.

    Draw order is fixed (inputs, then flips, then tie-break values) so the same
    seed always yields the same bytes.

    Args:
        n: Number of examples
        dim: Input dimension
        noise: Probability that a label is flipped
        seed: Seed for numpy's default generator

    Returns:
        The generated example sequence

    Raises:
        ParameterError: If n or dim is not positive or noise is outside [0, 1]
    """
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    if dim < 1:
        raise ParameterError(f"dim must be positive, got {dim}")
    if not 0.0 <= noise <= 1.0:
        raise ParameterError(f"noise must lie in [0, 1], got {noise}")

    rng = np.random.default_rng(seed)
    inputs = rng.uniform(-1.0, 1.0, size=(n, dim))
    flips = rng.random(n) < noise
    tiebreaks = rng.random(n)
    labels = quadrant_label(inputs) ^ flips.astype(np.int8)

    logger.debug("dataset_generated", n=n, dim=dim, noise=noise, seed=seed)
    return ExampleSet(inputs=inputs, labels=labels, tiebreaks=tiebreaks)


def validate_permutation(permutation: np.ndarray | list[int], n: int) -> np.ndarray:
    """Return the permutation as an int array, or raise if it is not a bijection on 0..n-1."""
    perm = np.asarray(permutation)
    if perm.shape != (n,) or (n and not np.issubdtype(perm.dtype, np.integer)):
        raise ParameterError(f"Permutation must be {n} integers, got shape {perm.shape}")
    if not np.array_equal(np.sort(perm), np.arange(n)):
        raise ParameterError("Permutation is not a bijection on 0..n-1")
    return perm.astype(np.int64)


def shuffle_with_permutation(
    examples: ExampleSet, permutation: np.ndarray | list[int]
) -> ExampleSet:
    """Reorder so that position i of the result holds position permutation[i] of the input."""
    perm = validate_permutation(permutation, len(examples))
    return examples.take(perm)


def permutation_streams(q: int, seed: int) -> list[np.random.SeedSequence]:
    """One independent seed stream per sampled permutation."""
    if q < 1:
        raise ParameterError(f"q must be positive, got {q}")
    return np.random.SeedSequence(seed).spawn(q)


def draw_permutation(n: int, stream: np.random.SeedSequence) -> np.ndarray:
    """A uniform permutation of 0..n-1 from one stream."""
    return np.random.default_rng(stream).permutation(n)


def sample_permutations(n: int, q: int, seed: int) -> np.ndarray:
    """
    Draw q permutations of 0..n-1 uniformly with replacement.

    Permutation j depends only on (seed, j), so it can be regenerated
    independently by a worker.

    Returns:
        Array of shape (q, n); row j is permutation j
    """
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    return np.stack([draw_permutation(n, stream) for stream in permutation_streams(q, seed)])


def partition(
    examples: ExampleSet,
    r: int,
    m: int,
    w: int = 0,
    k: int = 1,
    subset_sizes: tuple[int, ...] | None = None,
) -> PartitionedDataset:
    """
    Split F by position: V_1..V_r of m examples each from the front, W from the back.

    Args:
        examples: The in-sample sequence F
        r: Number of validation subsets
        m: Size of each validation subset
        w: Size of the holdout tail W
        k: Number of neighbors; F-V-W must keep at least k examples
        subset_sizes: Unequal subset sizes, overriding r and m

    Raises:
        ParameterError: If r*m + w > n - k
    """
    sizes = tuple(subset_sizes) if subset_sizes is not None else (m,) * r
    if not sizes or any(size < 1 for size in sizes):
        raise ParameterError(f"Need r >= 1 subsets of positive size, got {sizes}")
    if k < 1 or w < 0:
        raise ParameterError(f"k must be positive and w nonnegative, got k={k}, w={w}")
    n = len(examples)
    if sum(sizes) + w > n - k:
        raise ParameterError(
            f"Partition infeasible: r*m + w = {sum(sizes) + w} exceeds n - k = {n - k}"
        )
    dataset = PartitionedDataset(examples=examples, k=k, subset_sizes=sizes, w=w)
    logger.debug(
        "partition_built",
        n=dataset.n,
        r=dataset.r,
        subset_sizes=list(sizes),
        w=w,
        remainder=dataset.n - dataset.validation_size - w,
    )
    return dataset
