"""Data-generating processes for the predicted-label and predicted-covariate studies.

Predicted labels (d = 50):
    X_1..X_50, Z ~ N(0, 1),  theta_1..theta_10 = 0.1/sqrt(10), rest 0
    Y = X theta + r Z + eps,  Var(Y) = 1
    fhat = predictor(X, Z) fitted on an independent hold-out

Predicted covariates (d = 10):
    X_1..X_10 ~ N(0, 1),  theta_1 = 0.1, rest 0
    Y = X theta + eps,  Var(Y) = 1
    Z = 0.1 Y + r X_1 + delta,  Var(Z) = 1
    qhat = (predictor(Z), X_2, ..., X_10)

The logistic variants replace Y by 1(Y > median(Y)). The target is always the
coefficient on X_1.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from ..data import Dataset
from ..errors import ConfigError
from ..models import LogisticModel, OLSModel
from .predictors import PREDICTORS, make_predictor

SCENARIOS = ("y-linear", "y-logistic", "x-linear", "x-logistic")
Y_DIM = 50
X_DIM = 10
# population truths come from one fixed stream, shared by every study seed
TRUTH_SEED = 20240101
TRUTH_STREAM = 2**31 - 1


@dataclass(frozen=True)
class SimConfig:
    scenario: str = "y-linear"
    n: int = 200
    N_unlabeled: int = 1000
    r: float = 0.8
    reps: int = 500
    alpha: float = 0.05
    seed: int = 20240101
    predictor: str = "ridge"
    truth_samples: int = 50_000
    holdout: int = 1000
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if self.N_unlabeled < 1:
            raise ConfigError("the unlabeled size must be >= 1")
        if not 0.0 <= self.r <= 1.0:
            raise ConfigError(f"r must lie in [0, 1], got {self.r}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.predictor not in PREDICTORS:
            raise ConfigError(f"predictor must be one of {PREDICTORS}")
        noise_variances(self.scenario, self.r)

    @property
    def kind(self):
        return self.scenario.split("-")[0]

    @property
    def logistic(self):
        return self.scenario.endswith("logistic")

    @property
    def d(self):
        return Y_DIM if self.kind == "y" else X_DIM

    def model(self):
        return LogisticModel(self.d) if self.logistic else OLSModel(self.d)

    def paper_scale(self):
        """n = 500 labeled rows and 1000 replications."""
        return replace(self, n=500, reps=1000)


def coefficients(kind):
    if kind == "y":
        theta = np.zeros(Y_DIM)
        theta[:10] = 0.1 / np.sqrt(10.0)
    else:
        theta = np.zeros(X_DIM)
        theta[0] = 0.1
    return theta


def noise_variances(scenario, r):
    """(Var eps, Var delta) that make Var(Y) = 1 (and Var(Z) = 1)."""
    kind = scenario.split("-")[0]
    theta = coefficients(kind)
    signal = float(theta @ theta)
    if kind == "y":
        v_eps = 1.0 - signal - r * r
        if v_eps < 0:
            raise ConfigError(f"infeasible variance budget: sum theta^2 + r^2 = {signal + r * r:.4g} > 1")
        return v_eps, None
    v_eps = 1.0 - signal
    # Var(0.1 Y + r X_1) = 0.01 + r^2 + 2 * 0.1 * r * Cov(Y, X_1)
    v_z = 0.01 + r * r + 0.2 * r * theta[0]
    v_delta = 1.0 - v_z
    if v_delta < 0:
        raise ConfigError(f"infeasible variance budget: Var(0.1 Y + r X_1) = {v_z:.4g} > 1")
    return v_eps, v_delta


def _draw_y(rng, m, r, v_eps):
    theta = coefficients("y")
    X = rng.standard_normal((m, Y_DIM))
    Z = rng.standard_normal(m)
    Y = X @ theta + r * Z + np.sqrt(v_eps) * rng.standard_normal(m)
    return X, Z, Y


def _draw_x(rng, m, r, v_eps, v_delta):
    theta = coefficients("x")
    X = rng.standard_normal((m, X_DIM))
    Y = X @ theta + np.sqrt(v_eps) * rng.standard_normal(m)
    Z = 0.1 * Y + r * X[:, 0] + np.sqrt(v_delta) * rng.standard_normal(m)
    return X, Z, Y


def _threshold(*ys):
    med = np.median(np.concatenate(ys))
    return [(y > med).astype(np.float64) for y in ys]


@dataclass(frozen=True, eq=False)
class SimDraw:
    data: Dataset
    truth: float
    target: int = 0


def generate_y_scenario(config, rng):
    """Predicted-labels replicate: hold-out fit, then labeled and unlabeled draws."""
    if config.kind != "y":
        raise ConfigError(f"{config.scenario} is not a predicted-labels scenario")
    v_eps, _ = noise_variances(config.scenario, config.r)
    Xh, Zh, Yh = _draw_y(rng, config.holdout, config.r, v_eps)
    X, Z, Y = _draw_y(rng, config.n, config.r, v_eps)
    Xu, Zu, Yu = _draw_y(rng, config.N_unlabeled, config.r, v_eps)
    if config.logistic:
        Yh, Y, Yu = _threshold(Yh, Y, Yu)
    predictor = make_predictor(config.predictor, rng).fit(np.column_stack([Xh, Zh]), Yh)
    data = Dataset(
        mode="labels", y=Y, X=X,
        fhat=predictor.predict(np.column_stack([X, Z])),
        X_unlabeled=Xu,
        fhat_unlabeled=predictor.predict(np.column_stack([Xu, Zu])),
    )
    return SimDraw(data=data, truth=truth_coefficient(config))


def generate_x_scenario(config, rng):
    """Predicted-covariates replicate: X_1 is replaced by its prediction from Z."""
    if config.kind != "x":
        raise ConfigError(f"{config.scenario} is not a predicted-covariates scenario")
    v_eps, v_delta = noise_variances(config.scenario, config.r)
    Xh, Zh, Yh = _draw_x(rng, config.holdout, config.r, v_eps, v_delta)
    X, Z, Y = _draw_x(rng, config.n, config.r, v_eps, v_delta)
    Xu, Zu, Yu = _draw_x(rng, config.N_unlabeled, config.r, v_eps, v_delta)
    if config.logistic:
        _, Y, Yu = _threshold(Yh, Y, Yu)
    predictor = make_predictor(config.predictor, rng).fit(Zh[:, None], Xh[:, 0])
    Q = X.copy()
    Q[:, 0] = predictor.predict(Z[:, None])
    Qu = Xu.copy()
    Qu[:, 0] = predictor.predict(Zu[:, None])
    data = Dataset(mode="covariates", y=Y, X=X, qhat=Q, y_unlabeled=Yu, qhat_unlabeled=Qu)
    return SimDraw(data=data, truth=truth_coefficient(config))


def generate(config, rng):
    return generate_y_scenario(config, rng) if config.kind == "y" else generate_x_scenario(config, rng)


def truth_rng(seed=TRUTH_SEED):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(TRUTH_STREAM,))))


def truth_coefficient(config):
    """Population coefficient on X_1: analytic for the linear scenarios,
    otherwise a fit on ``truth_samples`` fresh rows."""
    if not config.logistic:
        return float(coefficients(config.kind)[0])
    return _fitted_truth(config.scenario, config.r, config.truth_samples)


@lru_cache(maxsize=64)
def _fitted_truth(scenario, r, samples):
    rng = truth_rng()
    v_eps, v_delta = noise_variances(scenario, r)
    if scenario.startswith("y"):
        X, _, Y = _draw_y(rng, samples, r, v_eps)
    else:
        X, _, Y = _draw_x(rng, samples, r, v_eps, v_delta)
    if scenario.endswith("logistic"):
        (Y,) = _threshold(Y)
        model = LogisticModel(X.shape[1])
    else:
        model = OLSModel(X.shape[1])
    return float(model.solve(Y, X)[0])
