"""
Fixtures for end-to-end pipeline tests.

Datasets are written to CSV and read back so the tests exercise the same path
as the command line.
"""

import pytest

from knnbound.engine.dataset import generate_quadrant_dataset
from knnbound.utils.exporters import export_examples_to_csv
from knnbound.utils.loaders import load_examples_csv


@pytest.fixture
def quadrant_csv(tmp_path):
    """Path to a 2000-example quadrant dataset on disk."""
    path = tmp_path / "quadrant.csv"
    export_examples_to_csv(generate_quadrant_dataset(2000, seed=11), path)
    return path


@pytest.fixture
def loaded_examples(quadrant_csv):
    """The on-disk dataset, loaded back."""
    return load_examples_csv(quadrant_csv)
