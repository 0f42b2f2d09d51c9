"""Comparison estimators expressed as constrained weight choices.

classical  w = 0
PPI        w = 1
EIF*       w = N / (N + n) in every coordinate
PPI++      one shared scalar minimising the trace of the coordinate variances

plus the naive imputation fit used as a strawman with predicted covariates.
"""
from dataclasses import replace

import numpy as np

from .data import Dataset
from .errors import ModeError
from .estimator import WeightVector, infer
from .moments import estimate_moments, variance_coefficients

__all__ = ["LABELS_ONLY", "check_method_mode", "classical", "ppi", "eif_star", "ppi_pp", "naive_imputation", "shared_weight", "METHODS"]


LABELS_ONLY = ("ppi", "eif-star", "ppi-pp")


def check_method_mode(method, mode):
    if method in LABELS_ONLY and mode != "labels":
        raise ModeError(f"{method} targets predicted labels; mode {mode!r} is unsupported")


def _labels_only(data, method):
    check_method_mode(method, data.mode)


def classical(model, data, alpha=0.05):
    return infer(model, data, alpha, omega=0.0, method="classical")


def ppi(model, data, alpha=0.05):
    _labels_only(data, "ppi")
    return infer(model, data, alpha, omega=1.0, method="ppi")


def eif_star(model, data, alpha=0.05):
    _labels_only(data, "eif-star")
    w = data.N / (data.N + data.n)
    return infer(model, data, alpha, omega=w, method="eif-star")


def shared_weight(moments):
    """Scalar w minimising sum_j (a_j w^2 - 2 b_j w + c_j), capped at 1."""
    a, b, _ = variance_coefficients(moments)
    total_a = float(np.sum(a))
    if not np.isfinite(total_a) or total_a <= 0:
        return 0.0
    return min(float(np.sum(b)) / total_a, 1.0)


def ppi_pp(model, data, alpha=0.05):
    _labels_only(data, "ppi-pp")
    gy, gX = data.gold()
    model.validate_outcome(gy)
    theta_c = model.solve(gy, gX)
    w = shared_weight(estimate_moments(model, data, theta_c))
    res = infer(model, data, alpha, omega=w, method="ppi-pp")
    weights = WeightVector(omega=res.omega.omega, mode=data.mode, events=(f"shared weight {w:.6g}",))
    return replace(res, omega=weights, events=weights.events)


def naive_imputation(model, data, alpha=0.05):
    """Treat the unlabeled predictions as if they were measured and pool all rows.

    Predicted covariates: rows (y, qhat) are appended to (y, X). Predicted
    labels: rows (fhat, X). The classical sandwich on the pooled sample is
    reported with n + N as the sample size. This ignores prediction error
    and is generally invalid.
    """
    if data.mode == "covariates":
        y = np.concatenate([data.y, data.y_unlabeled])
        X = np.vstack([data.X, data.qhat_unlabeled])
    elif data.mode == "labels":
        y = np.concatenate([data.y, data.fhat_unlabeled])
        X = np.vstack([data.X, data.X_unlabeled])
    else:
        raise ModeError("naive imputation needs predictions for only one of y or x")
    # the pooled fit is a labeled-only problem; fhat is a placeholder that w = 0 never reads
    pooled = Dataset(mode="labels", y=y, X=X, fhat=y)
    return infer(_lenient(model), pooled, alpha, omega=0.0, method="imputation")


def _lenient(model):
    # pooled predicted outcomes are not 0/1
    if getattr(model, "strict", False):
        return type(model)(model.d, strict=False)
    return model


METHODS = {
    "classical": classical,
    "ppi": ppi,
    "eif-star": eif_star,
    "ppi-pp": ppi_pp,
    "pspa": lambda model, data, alpha=0.05: infer(model, data, alpha, method="pspa"),
}
