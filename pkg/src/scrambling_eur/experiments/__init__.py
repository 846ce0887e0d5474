"""Config-driven sweeps, figure reproductions, and demos."""

from .checks import InstanceCheck, check_random_instances, random_instance, summarize
from .config import (
    ConfigError,
    ExperimentConfig,
    OutputConfig,
    ProtocolConfig,
    SweepConfig,
    config_from_dict,
    fig4_config,
    load_config,
    reference_config,
)
from .output import CSV_COLUMNS, emit, format_float, metadata_path, read_csv
from .sweep import (
    QubitDemoRecord,
    SweepContext,
    SweepRecord,
    estimate_t_star,
    evaluate_point,
    run_fig4,
    run_kfold_demo,
    run_qubit_weakvalue_demo,
    run_sweep,
)

__all__ = [
    "CSV_COLUMNS",
    "ConfigError",
    "ExperimentConfig",
    "InstanceCheck",
    "OutputConfig",
    "ProtocolConfig",
    "QubitDemoRecord",
    "SweepConfig",
    "SweepContext",
    "SweepRecord",
    "check_random_instances",
    "config_from_dict",
    "emit",
    "estimate_t_star",
    "evaluate_point",
    "fig4_config",
    "format_float",
    "load_config",
    "metadata_path",
    "reference_config",
    "random_instance",
    "read_csv",
    "run_fig4",
    "run_kfold_demo",
    "run_qubit_weakvalue_demo",
    "run_sweep",
    "summarize",
]
