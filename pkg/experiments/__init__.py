"""
Experiment Pipeline Package

Reproducible experiments for the election defense solvers.

Main components:
- config.py: Experiment configuration dataclasses and seed derivation
- generator.py: Synthetic instance generation
- runners.py: Gap tables, budget sweeps and the preference-uncertainty comparison
- cli.py: Command-line interface
"""

from .config import ExperimentConfig, GeneratorConfig, derive_seed
from .generator import generate_instance
from .runners import ResultTable, run_budget_sweep, run_gap_table, run_uncertainty_suite

__version__ = "1.0.0"

__all__ = [
    "ExperimentConfig",
    "GeneratorConfig",
    "derive_seed",
    "generate_instance",
    "ResultTable",
    "run_budget_sweep",
    "run_gap_table",
    "run_uncertainty_suite",
]
