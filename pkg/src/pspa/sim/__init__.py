"""Monte Carlo studies for predicted labels and predicted covariates."""
from .dgp import (
    SCENARIOS,
    SimConfig,
    SimDraw,
    generate,
    generate_x_scenario,
    generate_y_scenario,
    noise_variances,
    truth_coefficient,
)
from .predictors import PREDICTORS, RidgePredictor, make_predictor
from .study import MethodSummary, SimReport, aggregate, replicate_rng, run_replicate, run_study

__all__ = [
    "SCENARIOS",
    "PREDICTORS",
    "SimConfig",
    "SimDraw",
    "SimReport",
    "MethodSummary",
    "RidgePredictor",
    "aggregate",
    "generate",
    "generate_x_scenario",
    "generate_y_scenario",
    "make_predictor",
    "noise_variances",
    "replicate_rng",
    "run_replicate",
    "run_study",
    "truth_coefficient",
]
