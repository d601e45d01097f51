"""Experiment runner, report emitters, model files and the CLI."""

from .config import ALGORITHMS, CorpusSource, ExperimentConfig, load_config, parse_config
from .experiment import (
    ExperimentResult,
    MarginEntry,
    ResultsTable,
    SweepSeries,
    run_experiment,
)
from .persistence import FORMAT_VERSION, SavedModel, load_bundle, load_model, save_model
from .reports import emit_margins, emit_summary, emit_sweep, emit_table, write_reports

__all__ = [
    "ALGORITHMS",
    "FORMAT_VERSION",
    "CorpusSource",
    "ExperimentConfig",
    "ExperimentResult",
    "MarginEntry",
    "ResultsTable",
    "SavedModel",
    "SweepSeries",
    "emit_margins",
    "emit_summary",
    "emit_sweep",
    "emit_table",
    "load_bundle",
    "load_config",
    "load_model",
    "parse_config",
    "run_experiment",
    "save_model",
    "write_reports",
]
