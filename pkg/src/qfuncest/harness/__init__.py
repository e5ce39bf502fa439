"""Sweep orchestration, fits and the command line."""

from .config import ExperimentConfig, OutputPaths
from .fit import BoundCheck, ScalingFit, check_bounds, fit_scaling
from .sweep import run_sweep, run_trial

__all__ = ["ExperimentConfig", "OutputPaths", "BoundCheck", "ScalingFit", "check_bounds",
           "fit_scaling", "run_sweep", "run_trial"]
