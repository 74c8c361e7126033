from .config import ConfigError, DEFAULT_CONFIG, load_config, resolve_out_dir
from .experiments import EXPERIMENTS, run_all, run_experiment
from .mcem import MCEMResult, mcem_missing_data
from .reporting import CheckResult, Report, emit_curves, write_report_json

__all__ = [
    "CheckResult",
    "ConfigError",
    "DEFAULT_CONFIG",
    "EXPERIMENTS",
    "MCEMResult",
    "Report",
    "emit_curves",
    "load_config",
    "mcem_missing_data",
    "resolve_out_dir",
    "run_all",
    "run_experiment",
    "write_report_json",
]
