"""
Utilities for exporting reports, records, and datasets to files.

Reports go to YAML or JSON; trial records, cell summaries, and example
sequences go to CSV.
"""

import csv
import json
from pathlib import Path

import yaml
from pydantic import BaseModel

from knnbound.models.dataset import ExampleSet
from knnbound.models.experiment import CSV_COLUMNS, CellSummary, TrialRecord

SUMMARY_COLUMNS = (
    "r",
    "d",
    "m",
    "fraction",
    "trials",
    "mean_gap",
    "std_gap",
    "std_mean",
    "mean_bound",
    "mean_test_error",
)


def export_to_yaml(obj: BaseModel, file_path: str | Path) -> None:
    """
    Export a model object to a YAML file.

    Raises:
        IOError: If the file cannot be written

    Example:
        export_to_yaml(report, "output/bound.yaml")
    """
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = obj.model_dump(mode="json", exclude_none=False)
    try:
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False, indent=2)
    except Exception as e:
        raise OSError(f"Failed to write YAML to {file_path}: {e}")


def export_to_json(obj: BaseModel, file_path: str | Path, indent: int = 2) -> None:
    """
    Export a model object to a JSON file.

    Raises:
        IOError: If the file cannot be written

    Example:
        export_to_json(identity_report, "output/identity.json")
    """
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = obj.model_dump(mode="json")
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=indent, ensure_ascii=False)
    except Exception as e:
        raise OSError(f"Failed to write JSON to {file_path}: {e}")


def to_yaml_string(obj: BaseModel) -> str:
    """Convert a model object to a YAML string."""
    data = obj.model_dump(mode="json", exclude_none=False)
    return yaml.safe_dump(data, default_flow_style=False, sort_keys=False, indent=2)


def to_json_string(obj: BaseModel, indent: int = 2) -> str:
    """Convert a model object to a JSON string."""
    return json.dumps(obj.model_dump(mode="json"), indent=indent, ensure_ascii=False)


def _write_rows(
    file_path: str | Path, header: tuple[str, ...] | None, rows: list[list[object]]
) -> None:
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            if header is not None:
                writer.writerow(header)
            writer.writerows(rows)
    except Exception as e:
        raise OSError(f"Failed to write CSV to {file_path}: {e}")


def export_trials_to_csv(records: list[TrialRecord], file_path: str | Path) -> None:
    """
    Write trial records with the fixed column order and a header row.

    Floats are written with repr, so identical records give identical bytes.
    """
    _write_rows(file_path, CSV_COLUMNS, [record.to_row() for record in records])


def export_summary_to_csv(summaries: list[CellSummary], file_path: str | Path) -> None:
    """Write per-cell gap statistics."""
    rows = [[getattr(summary, column) for column in SUMMARY_COLUMNS] for summary in summaries]
    _write_rows(file_path, SUMMARY_COLUMNS, rows)


def summary_path_for(file_path: str | Path) -> Path:
    """Companion summary path: results.csv -> results.summary.csv."""
    path = Path(file_path)
    return path.with_name(f"{path.stem}.summary{path.suffix or '.csv'}")


def export_examples_to_csv(
    examples: ExampleSet, file_path: str | Path, include_tiebreaks: bool = False
) -> None:
    """
    Write an example sequence as headerless lines of inputs then label.

    With `include_tiebreaks`, each line ends with the example's tie-break value;
    load such a file with `load_examples_csv(..., with_tiebreaks=True)`.
    """
    rows = []
    for i in range(len(examples)):
        row: list[object] = [*map(float, examples.inputs[i]), int(examples.labels[i])]
        if include_tiebreaks:
            row.append(float(examples.tiebreaks[i]))
        rows.append(row)
    _write_rows(file_path, None, rows)
