from .config import MODES, ExperimentConfig, ExperimentRecord, trial_seed
from .fitting import LineFit, cell_means, fit_line, fit_scaling_exponent
from .plotting import PlotSpec, emit_plot
from .sweep import (
    Trial,
    as_dict,
    header_for,
    iter_sweep,
    plan_trials,
    run_sweep,
    sweep_csv_text,
)

__all__ = [
    "MODES", "ExperimentConfig", "ExperimentRecord", "LineFit", "PlotSpec", "Trial", "as_dict",
    "cell_means", "emit_plot", "fit_line", "fit_scaling_exponent", "header_for",
    "iter_sweep", "plan_trials", "run_sweep", "sweep_csv_text", "trial_seed",
]
