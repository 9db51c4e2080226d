from .batteries import COMMANDS, ExperimentConfig, hamiltonian_param, run, trial_seed
from .report import Check, Report, emit_csv, parse_csv, wilson_interval

__all__ = [
    "COMMANDS",
    "Check",
    "ExperimentConfig",
    "Report",
    "emit_csv",
    "hamiltonian_param",
    "parse_csv",
    "run",
    "trial_seed",
    "wilson_interval",
]
