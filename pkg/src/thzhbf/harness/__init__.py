"""Experiment configuration, Monte Carlo execution and result emission."""

from .config import (
    METHODS,
    SWEEP_AXES,
    ExperimentConfig,
    IciSpec,
    SweepPoint,
    SweepSpec,
    config_from_dict,
    config_to_dict,
    load_config,
)
from .presets import PRESETS, load_preset, preset_dict, preset_names
from .runner import (
    CSV_HEADER,
    ResultRow,
    ResultTable,
    format_csv,
    run_experiment,
    timing_comparison,
    write_csv,
    write_precoder_csv,
)

__all__ = [
    "METHODS", "SWEEP_AXES", "ExperimentConfig", "IciSpec", "SweepPoint", "SweepSpec",
    "config_from_dict", "config_to_dict", "load_config",
    "PRESETS", "load_preset", "preset_dict", "preset_names",
    "CSV_HEADER", "ResultRow", "ResultTable", "run_experiment", "timing_comparison",
    "format_csv",     "write_csv", "write_precoder_csv",
]
