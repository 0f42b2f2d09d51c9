"""Post-prediction adaptive inference for estimating-equation parameters."""
from ._accel import BACKEND
from .baselines import classical, eif_star, naive_imputation, ppi, ppi_pp
from .data import Dataset
from .errors import ConfigError, DataError, ModeError, PSPAError, SingularMatrixError
from .estimator import (
    InferenceResult,
    WeightVector,
    infer,
    one_step_update,
    optimal_weights,
    pspa_score,
)
from .models import EEModel, average_psi, get_model, logistic_model, mean_model, ols_model
from .moments import MomentSet, estimate_moments, sandwich, sigma_jj

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "DataError",
    "Dataset",
    "EEModel",
    "InferenceResult",
    "ModeError",
    "MomentSet",
    "PSPAError",
    "SingularMatrixError",
    "WeightVector",
    "average_psi",
    "classical",
    "eif_star",
    "estimate_moments",
    "get_model",
    "infer",
    "logistic_model",
    "mean_model",
    "naive_imputation",
    "ols_model",
    "one_step_update",
    "optimal_weights",
    "ppi",
    "ppi_pp",
    "pspa_score",
    "sandwich",
    "sigma_jj",
]
