"""
Tests for export utilities.

This module tests exporting reports to YAML/JSON and records, summaries, and
example sequences to CSV.
"""

import csv
import json

import pytest
import yaml

from knnbound.models.bounds import BoundDirection, BoundReport, BoundVariant
from knnbound.models.experiment import CSV_COLUMNS, CellSummary, TrialRecord
from knnbound.utils.exporters import (
    SUMMARY_COLUMNS,
    export_examples_to_csv,
    export_summary_to_csv,
    export_to_json,
    export_to_yaml,
    export_trials_to_csv,
    summary_path_for,
    to_json_string,
    to_yaml_string,
)
from knnbound.utils.loaders import load_examples_csv

# ============================================================================
# Test Fixtures
# ============================================================================


@pytest.fixture
def report():
    """A hand-built upper-bound report."""
    return BoundReport(
        variant=BoundVariant.TEST,
        direction=BoundDirection.UPPER,
        estimate=0.12,
        epsilon_v=0.03,
        epsilon_w=0.01,
        final_bound=0.16,
        upper_bound=0.16,
        failure_prob=0.05,
        n=50000,
        k=3,
        r=3,
        m=3125,
        w=3125,
        d=2,
        w_hits=4,
    )


@pytest.fixture
def records():
    """Two trial records of one cell."""
    return [
        TrialRecord(
            trial=t,
            n=50000,
            k=3,
            r=3,
            d=2,
            m=3125,
            w=3125,
            variant=BoundVariant.TEST,
            bound=0.16 + t / 100,
            test_error=0.12,
            gap=0.16 + t / 100 - 0.12,
            seed=1000 + t,
            runtime_s=0.0,
        )
        for t in range(2)
    ]


# ============================================================================
# Report Export Tests
# ============================================================================


class TestReportExport:
    """Tests for YAML and JSON export of reports."""

    def test_yaml_file(self, report, tmp_path):
        """Test exporting to a YAML file with enum values as strings."""
        path = tmp_path / "out" / "bound.yaml"
        export_to_yaml(report, path)
        data = yaml.safe_load(path.read_text())
        assert data["variant"] == "test"
        assert data["final_bound"] == 0.16
        assert data["lower_bound"] is None

    def test_json_file(self, report, tmp_path):
        """Test exporting to a JSON file."""
        path = tmp_path / "bound.json"
        export_to_json(report, path)
        data = json.loads(path.read_text())
        assert data["direction"] == "upper"
        assert data["w_hits"] == 4

    def test_strings(self, report):
        """Test string conversions."""
        assert yaml.safe_load(to_yaml_string(report))["r"] == 3
        assert json.loads(to_json_string(report))["m"] == 3125


# ============================================================================
# CSV Export Tests
# ============================================================================


class TestCsvExport:
    """Tests for CSV exporters."""

    def test_trials_csv(self, records, tmp_path):
        """Test the fixed column order and one row per record."""
        path = tmp_path / "trials.csv"
        export_trials_to_csv(records, path)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert rows[1][CSV_COLUMNS.index("variant")] == "test"
        assert float(rows[2][CSV_COLUMNS.index("bound")]) == pytest.approx(0.17)

    def test_identical_records_identical_bytes(self, records, tmp_path):
        """Test that writing the same records twice gives the same bytes."""
        export_trials_to_csv(records, tmp_path / "a.csv")
        export_trials_to_csv(records, tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_summary_csv(self, tmp_path):
        """Test the summary columns."""
        summary = CellSummary(
            r=3,
            d=2,
            m=3125,
            fraction=0.0625,
            trials=2,
            mean_gap=0.045,
            std_gap=0.007,
            std_mean=0.005,
            mean_bound=0.165,
            mean_test_error=0.12,
        )
        path = tmp_path / "grid.summary.csv"
        export_summary_to_csv([summary], path)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert tuple(rows[0]) == SUMMARY_COLUMNS
        assert rows[1][:3] == ["3", "2", "3125"]

    def test_summary_path(self):
        """Test the companion summary path."""
        assert summary_path_for("out/grid.csv").name == "grid.summary.csv"
        assert summary_path_for("out/grid").name == "grid.summary.csv"

    def test_examples_headerless(self, small_examples, tmp_path):
        """Test that examples are written as inputs then label, without a header."""
        path = tmp_path / "examples.csv"
        export_examples_to_csv(small_examples, path)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert len(rows) == len(small_examples)
        assert len(rows[0]) == small_examples.dim + 1
        assert float(rows[0][0]) == float(small_examples.inputs[0][0])
        assert int(rows[0][-1]) == int(small_examples.labels[0])

    def test_examples_round_trip(self, small_examples, tmp_path):
        """Test that exported examples load back unchanged."""
        path = tmp_path / "examples.csv"
        export_examples_to_csv(small_examples, path)
        loaded = load_examples_csv(path)
        assert loaded.inputs.tolist() == small_examples.inputs.tolist()
        assert loaded.labels.tolist() == small_examples.labels.tolist()

    def test_examples_round_trip_with_tiebreaks(self, small_examples, tmp_path):
        """Test that the opt-in tie-break column survives a round trip."""
        path = tmp_path / "examples.csv"
        export_examples_to_csv(small_examples, path, include_tiebreaks=True)
        loaded = load_examples_csv(path, with_tiebreaks=True)
        assert loaded.labels.tolist() == small_examples.labels.tolist()
        assert loaded.tiebreaks.tolist() == small_examples.tiebreaks.tolist()
