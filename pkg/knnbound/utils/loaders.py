"""
Utilities for loading experiment configs and datasets from files.

Configs are YAML or JSON; datasets are headerless CSV files, one example per
line, with the input coordinates followed by the label.
"""

import csv
import json
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from knnbound.config import settings
from knnbound.models.bounds import BoundConfig
from knnbound.models.dataset import ExampleSet
from knnbound.models.experiment import ExperimentConfig


class SafeYAMLLoader(yaml.SafeLoader):
    """YAML loader with depth and alias limits to prevent bombs."""

    def __init__(self, stream: Any):
        self._depth = 0
        self._max_depth = settings.yaml_max_depth
        self._alias_count = 0
        self._max_aliases = settings.yaml_max_aliases
        super().__init__(stream)

    def compose_node(self, parent: Any, index: Any) -> Any:
        """Override to track nesting depth and alias count during composition."""
        # compose_node consumes the AliasEvent, so count before calling super()
        if self.check_event(yaml.events.AliasEvent):
            self._alias_count += 1
            if self._alias_count > self._max_aliases:
                raise yaml.YAMLError(
                    f"YAML contains too many alias references (max: {self._max_aliases})"
                )

        self._depth += 1
        if self._depth > self._max_depth:
            raise yaml.YAMLError(f"YAML depth exceeds maximum of {self._max_depth} levels")
        try:
            return super().compose_node(parent, index)
        finally:
            self._depth -= 1


def _check_file(path: Path, file_path: str | Path) -> None:
    if not path.exists():
        raise FileNotFoundError(f"File not found: {file_path}")
    file_size_mb = path.stat().st_size / (1024 * 1024)
    if file_size_mb > settings.max_file_size_mb:
        raise ValueError(
            f"File size ({file_size_mb:.1f}MB) exceeds maximum ({settings.max_file_size_mb}MB)"
        )


def load_yaml_or_json(file_path: str | Path) -> dict[str, Any]:
    """
    Load a YAML or JSON file and return its contents as a dictionary.

    Args:
        file_path: Path to the file (can be .yaml, .yml, or .json)

    Returns:
        Dictionary representation of the file contents

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If the file format is unsupported or invalid
    """
    path = Path(file_path)
    _check_file(path, file_path)
    suffix = path.suffix.lower()

    try:
        with open(path, encoding="utf-8") as f:
            if suffix in [".yaml", ".yml"]:
                data = yaml.load(f, Loader=SafeYAMLLoader)
            elif suffix == ".json":
                data = json.load(f)
            else:
                raise ValueError(f"Unsupported file format: {suffix}. Use .yaml, .yml, or .json")
    except yaml.YAMLError as e:
        raise ValueError(f"Invalid YAML in {file_path}: {e}")
    except json.JSONDecodeError as e:
        raise ValueError(f"Invalid JSON in {file_path}: {e}")

    if not isinstance(data, dict):
        raise ValueError(f"Expected dictionary in {file_path}, got {type(data)}")
    return data


def load_experiment_config(file_path: str | Path, **overrides: Any) -> ExperimentConfig:
    """
    Load an experiment grid from a YAML or JSON file.

    Keyword overrides (typically CLI flags) replace file values; None values
    are ignored.

    Example:
        cfg = load_experiment_config("grids/k3.yaml", trials=20)
    """
    data = load_yaml_or_json(file_path)
    data.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return ExperimentConfig(**data)
    except Exception as e:
        raise ValueError(f"Failed to load experiment config from {file_path}: {e}")


def load_bound_config(file_path: str | Path) -> BoundConfig:
    """Load a BoundConfig from a YAML or JSON file."""
    data = load_yaml_or_json(file_path)
    try:
        return BoundConfig(**data)
    except Exception as e:
        raise ValueError(f"Failed to load bound config from {file_path}: {e}")


def load_examples_csv(
    file_path: str | Path, tiebreak_seed: int = 0, with_tiebreaks: bool = False
) -> ExampleSet:
    """
    Load an example sequence from a headerless CSV.

    Each line holds the input coordinates followed by an integer label. Tie-break
    values are drawn uniformly from a generator seeded with `tiebreak_seed`;
    with `with_tiebreaks`, each line carries its tie-break value after the label
    instead. Row order is the sequence order; blank lines are skipped.

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If a row is malformed or rows differ in width
    """
    path = Path(file_path)
    _check_file(path, file_path)
    trailing = 2 if with_tiebreaks else 1
    try:
        with open(path, encoding="utf-8", newline="") as f:
            rows = [row for row in csv.reader(f) if row and any(cell.strip() for cell in row)]
        if not rows:
            raise ValueError("no examples")
        width = len(rows[0])
        if width <= trailing:
            raise ValueError(f"expected input columns before the label, got {width} column(s)")
        for line, row in enumerate(rows, start=1):
            if len(row) != width:
                raise ValueError(f"row {line} has {len(row)} columns, expected {width}")
        dim = width - trailing
        inputs = np.array([[float(cell) for cell in row[:dim]] for row in rows])
        labels = np.array([int(row[dim]) for row in rows])
        if with_tiebreaks:
            tiebreaks = np.array([float(row[dim + 1]) for row in rows])
        else:
            tiebreaks = np.random.default_rng(tiebreak_seed).random(len(rows))
        return ExampleSet(inputs=inputs.reshape(len(rows), dim), labels=labels, tiebreaks=tiebreaks)
    except Exception as e:
        raise ValueError(f"Failed to load examples from {file_path}: {e}")
