"""Black-box predictors fitted on the simulation hold-out set."""
import numpy as np

from ..errors import ConfigError
from .forest import RegressionForest


class RidgePredictor:
    """Linear least squares with an unpenalised intercept and an L2 penalty."""

    def __init__(self, penalty=1.0):
        self.penalty = penalty

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        mx = X.mean(axis=0)
        my = y.mean()
        Xc = X - mx
        G = Xc.T @ Xc + self.penalty * np.eye(X.shape[1])
        self.coef_ = np.linalg.solve(G, Xc.T @ (y - my))
        self.intercept_ = my - mx @ self.coef_
        return self

    def predict(self, X):
        return np.asarray(X, dtype=np.float64) @ self.coef_ + self.intercept_


PREDICTORS = ("ridge", "forest")


def make_predictor(name, rng):
    if name == "ridge":
        return RidgePredictor()
    if name == "forest":
        return RegressionForest(rng=rng)
    raise ConfigError(f"unknown predictor {name!r}; choose from {PREDICTORS}")
