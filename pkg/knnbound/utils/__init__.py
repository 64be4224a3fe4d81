"""
Utility functions for loading and exporting knnbound configs, data, and reports.
"""

from knnbound.utils.exporters import (
    export_examples_to_csv,
    export_summary_to_csv,
    export_to_json,
    export_to_yaml,
    export_trials_to_csv,
    to_json_string,
    to_yaml_string,
)
from knnbound.utils.loaders import (
    load_bound_config,
    load_examples_csv,
    load_experiment_config,
    load_yaml_or_json,
)

__all__ = [
    # Loaders
    "load_yaml_or_json",
    "load_experiment_config",
    "load_bound_config",
    "load_examples_csv",
    # Exporters
    "export_to_yaml",
    "export_to_json",
    "to_yaml_string",
    "to_json_string",
    "export_trials_to_csv",
    "export_summary_to_csv",
    "export_examples_to_csv",
]
