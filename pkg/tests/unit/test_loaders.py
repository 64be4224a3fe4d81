"""
Tests for YAML/JSON and CSV loading utilities.

This module tests file loading, parsing, and validation for experiment configs,
bound configs, and example sequences.
"""

import json

import numpy as np
import pytest
import yaml

from knnbound.models.bounds import BoundVariant
from knnbound.utils.loaders import (
    load_bound_config,
    load_examples_csv,
    load_experiment_config,
    load_yaml_or_json,
)

# ============================================================================
# Test Fixtures
# ============================================================================


@pytest.fixture
def temp_dir(tmp_path):
    """Provide a temporary directory for test files."""
    return tmp_path


@pytest.fixture
def grid_dict():
    """A small experiment grid as a dictionary."""
    return {
        "n": 2000,
        "k": 3,
        "trials": 5,
        "m_fractions": [0.05, 0.1],
        "r_values": [2, 3],
        "d_values": [1, 2],
        "test_size": 1000,
        "seed": 7,
        "variant": "test",
    }


# ============================================================================
# load_yaml_or_json() Tests
# ============================================================================


class TestLoadYamlOrJson:
    """Tests for load_yaml_or_json function."""

    def test_loads_yaml_file(self, temp_dir, grid_dict):
        """Test loading a valid YAML file."""
        yaml_file = temp_dir / "grid.yaml"
        yaml_file.write_text(yaml.dump(grid_dict))
        assert load_yaml_or_json(yaml_file) == grid_dict

    def test_loads_json_file(self, temp_dir, grid_dict):
        """Test loading a valid JSON file."""
        json_file = temp_dir / "grid.json"
        json_file.write_text(json.dumps(grid_dict))
        assert load_yaml_or_json(str(json_file)) == grid_dict

    def test_raises_error_for_nonexistent_file(self, temp_dir):
        """Test that FileNotFoundError is raised for missing files."""
        with pytest.raises(FileNotFoundError, match="File not found"):
            load_yaml_or_json(temp_dir / "nonexistent.yaml")

    def test_raises_error_for_unsupported_format(self, temp_dir):
        """Test that ValueError is raised for unsupported file formats."""
        txt_file = temp_dir / "grid.txt"
        txt_file.write_text("n: 10")
        with pytest.raises(ValueError, match="Unsupported file format"):
            load_yaml_or_json(txt_file)

    def test_raises_error_for_invalid_json(self, temp_dir):
        """Test that ValueError is raised for malformed JSON."""
        json_file = temp_dir / "broken.json"
        json_file.write_text('{"n": 10,')
        with pytest.raises(ValueError, match="Invalid JSON"):
            load_yaml_or_json(json_file)

    def test_raises_error_for_yaml_scalar(self, temp_dir):
        """Test that ValueError is raised when YAML contains scalar content."""
        yaml_file = temp_dir / "scalar.yaml"
        yaml_file.write_text("just a string")
        with pytest.raises(ValueError, match="Expected dictionary"):
            load_yaml_or_json(yaml_file)

    def test_excessive_alias_uses_rejected(self, temp_dir):
        """Test YAML with too many alias uses is rejected."""
        yaml_file = temp_dir / "many_alias_uses.yaml"
        content = "base: &base 0.05\n"
        for i in range(150):
            content += f"item_{i}: *base\n"
        yaml_file.write_text(content)
        with pytest.raises((yaml.YAMLError, ValueError)):
            load_yaml_or_json(yaml_file)

    def test_excessive_depth_rejected(self, temp_dir):
        """Test deeply nested YAML is rejected."""
        yaml_file = temp_dir / "deep.yaml"
        yaml_file.write_text("nested: " + "[" * 30 + "]" * 30 + "\n")
        with pytest.raises(ValueError, match="Invalid YAML"):
            load_yaml_or_json(yaml_file)


# ============================================================================
# Config Loader Tests
# ============================================================================


class TestLoadExperimentConfig:
    """Tests for load_experiment_config function."""

    def test_loads_grid(self, temp_dir, grid_dict):
        """Test loading a grid from YAML."""
        yaml_file = temp_dir / "grid.yaml"
        yaml_file.write_text(yaml.dump(grid_dict))
        cfg = load_experiment_config(yaml_file)
        assert cfg.n == 2000
        assert cfg.r_values == [2, 3]
        assert cfg.variant == BoundVariant.TEST

    def test_overrides_win(self, temp_dir, grid_dict):
        """Test that keyword overrides replace file values and None is ignored."""
        yaml_file = temp_dir / "grid.yaml"
        yaml_file.write_text(yaml.dump(grid_dict))
        cfg = load_experiment_config(yaml_file, trials=2, seed=None)
        assert cfg.trials == 2
        assert cfg.seed == 7

    def test_invalid_grid(self, temp_dir, grid_dict):
        """Test that an invalid grid raises ValueError."""
        grid_dict["k"] = 4
        json_file = temp_dir / "grid.json"
        json_file.write_text(json.dumps(grid_dict))
        with pytest.raises(ValueError, match="Failed to load experiment config"):
            load_experiment_config(json_file)


class TestLoadBoundConfig:
    """Tests for load_bound_config function."""

    def test_loads_config(self, temp_dir):
        """Test loading a bound config."""
        yaml_file = temp_dir / "bound.yaml"
        yaml_file.write_text("k: 3\nr: 3\nm: 3125\nw: 3125\ndepth: 2\nvariant: test\n")
        cfg = load_bound_config(yaml_file)
        assert cfg.d == 2
        assert cfg.sizes == (3125, 3125, 3125)

    def test_invalid_config(self, temp_dir):
        """Test that a missing required field raises ValueError."""
        yaml_file = temp_dir / "bound.yaml"
        yaml_file.write_text("k: 3\n")
        with pytest.raises(ValueError, match="Failed to load bound config"):
            load_bound_config(yaml_file)


# ============================================================================
# load_examples_csv() Tests
# ============================================================================


class TestLoadExamplesCsv:
    """Tests for load_examples_csv function."""

    def test_loads_headerless_rows(self, temp_dir):
        """Test that each line reads as inputs followed by the label."""
        csv_file = temp_dir / "data.csv"
        csv_file.write_text("0.5,0.25,1\n-0.5,0.75,0\n0.1,-0.2,1\n")
        examples = load_examples_csv(csv_file)
        assert examples.inputs.tolist() == [[0.5, 0.25], [-0.5, 0.75], [0.1, -0.2]]
        assert examples.labels.tolist() == [1, 0, 1]
        assert examples.dim == 2

    def test_draws_tiebreaks_from_seed(self, temp_dir):
        """Test that tie-break values are drawn from the seed."""
        csv_file = temp_dir / "data.csv"
        csv_file.write_text("0.1,0\n0.2,1\n0.3,1\n")
        first = load_examples_csv(csv_file, tiebreak_seed=5)
        second = load_examples_csv(csv_file, tiebreak_seed=5)
        other = load_examples_csv(csv_file, tiebreak_seed=6)
        assert np.array_equal(first.tiebreaks, second.tiebreaks)
        assert not np.array_equal(first.tiebreaks, other.tiebreaks)
        assert np.all((first.tiebreaks >= 0) & (first.tiebreaks <= 1))

    def test_loads_with_tiebreak_column(self, temp_dir):
        """Test that the opt-in trailing column is read as the tie-break."""
        csv_file = temp_dir / "data.csv"
        csv_file.write_text("0.5,-0.5,0,0.25\n-1,1,1,0.75\n")
        examples = load_examples_csv(csv_file, with_tiebreaks=True)
        assert examples.inputs.tolist() == [[0.5, -0.5], [-1.0, 1.0]]
        assert examples.labels.tolist() == [0, 1]
        assert examples.tiebreaks.tolist() == [0.25, 0.75]

    def test_skips_blank_lines(self, temp_dir):
        """Test that blank lines are ignored."""
        csv_file = temp_dir / "data.csv"
        csv_file.write_text("0.1,0\n\n0.2,1\n")
        assert len(load_examples_csv(csv_file)) == 2

    def test_header_row_rejected(self, temp_dir):
        """Test that a header line fails to parse as an example."""
        csv_file = temp_dir / "data.csv"
        csv_file.write_text("x,label\n0.1,0\n")
        with pytest.raises(ValueError, match="Failed to load examples"):
            load_examples_csv(csv_file)

    def test_label_only_rows(self, temp_dir):
        """Test that rows without input columns are rejected."""
        csv_file = temp_dir / "data.csv"
        csv_file.write_text("1\n0\n")
        with pytest.raises(ValueError, match="input columns"):
            load_examples_csv(csv_file)

    def test_ragged_rows(self, temp_dir):
        """Test that rows of different widths are rejected."""
        csv_file = temp_dir / "data.csv"
        csv_file.write_text("0.1,0.2,0\n0.3,1\n")
        with pytest.raises(ValueError, match="row 2"):
            load_examples_csv(csv_file)

    def test_empty_file(self, temp_dir):
        """Test that a file without examples is rejected."""
        csv_file = temp_dir / "data.csv"
        csv_file.write_text("\n")
        with pytest.raises(ValueError, match="no examples"):
            load_examples_csv(csv_file)

    def test_non_binary_label(self, temp_dir):
        """Test that labels other than 0 and 1 are rejected."""
        csv_file = temp_dir / "data.csv"
        csv_file.write_text("0.1,2\n")
        with pytest.raises(ValueError, match="Failed to load examples"):
            load_examples_csv(csv_file)

    def test_nonexistent_file(self, temp_dir):
        """Test that a missing file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_examples_csv(temp_dir / "missing.csv")
