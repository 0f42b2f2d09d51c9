"""Estimating-equation models.

A model supplies the score psi(y, x; theta) and its Jacobian d psi / d theta.
Row-level ``psi``/``jacobian`` are the reference definitions; ``scores`` and
``mean_jacobian`` are the batched forms the estimators actually call, and
subclasses override them with vectorised versions.

The Jacobian is taken exactly as written (no sign flip), so for the mean and
least-squares models ``A = E[d psi / d theta]`` is negative definite.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .errors import DataError, SingularMatrixError

__all__ = [
    "EEModel",
    "MeanModel",
    "OLSModel",
    "LogisticModel",
    "mean_model",
    "ols_model",
    "logistic_model",
    "get_model",
    "MODELS",
    "average_psi",
    "mean_score",
]

COND_LIMIT = 1e12


def _as_theta(theta, q):
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    if theta.shape[0] != q:
        raise DataError(f"theta has length {theta.shape[0]}, model expects {q}")
    if not np.all(np.isfinite(theta)):
        raise DataError("theta must be finite")
    return theta


def checked_solve(M, b, what="matrix"):
    """Solve ``M z = b`` after a condition-number guard."""
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrixError(
            f"{what} is singular or ill-conditioned (condition number {cond:.3g} > {COND_LIMIT:.0e})"
        )
    return np.linalg.solve(M, b)


class EEModel:
    """Base class for an estimating equation E[psi(Y, X; theta)] = 0.

    Subclasses must set ``name``, ``q`` and ``d`` and implement ``psi`` and
    ``jacobian``. The batched methods fall back to row loops, so a custom
    model only needs the two row-level functions.
    """

    name = "custom"
    q = 0
    d = 0

    def psi(self, y, x, theta):
        raise NotImplementedError

    def jacobian(self, y, x, theta):
        raise NotImplementedError

    def validate_outcome(self, y):
        """Check gold-standard outcomes; surrogate outcomes are never checked."""

    def scores(self, y, X, theta):
        """Row-wise scores, shape (m, q)."""
        y = np.asarray(y, dtype=np.float64)
        X = np.asarray(X, dtype=np.float64).reshape(len(y), -1)
        return np.array([self.psi(y[i], X[i], theta) for i in range(len(y))]).reshape(len(y), self.q)

    def mean_jacobian(self, y, X, theta):
        """Sample mean of the row Jacobians, shape (q, q)."""
        y = np.asarray(y, dtype=np.float64)
        X = np.asarray(X, dtype=np.float64).reshape(len(y), -1)
        out = np.zeros((self.q, self.q))
        for i in range(len(y)):
            out += self.jacobian(y[i], X[i], theta)
        return out / len(y)

    def solve(self, y, X, theta0=None, tol=1e-10, max_iter=100):
        """Root of the sample-mean score by damped Newton iteration."""
        theta = np.zeros(self.q) if theta0 is None else _as_theta(theta0, self.q)
        g = mean_score(self, y, X, theta)
        for _ in range(max_iter):
            step = checked_solve(self.mean_jacobian(y, X, theta), g, "mean Jacobian")
            t = 1.0
            gnorm = np.linalg.norm(g)
            while True:
                cand = theta - t * step
                gc = mean_score(self, y, X, cand)
                if np.linalg.norm(gc) < gnorm or t < 1e-8:
                    break
                t *= 0.5
            theta, g = cand, gc
            if np.max(np.abs(t * step)) < tol or np.linalg.norm(g) < tol:
                return theta
        raise SingularMatrixError(f"{self.name}: Newton solve did not converge in {max_iter} iterations")

    def __repr__(self):
        return f"{type(self).__name__}(q={self.q}, d={self.d})"


class MeanModel(EEModel):
    """psi(y, x; theta) = y - theta. Covariates are ignored."""

    name = "mean"
    q = 1
    d = 0

    def psi(self, y, x, theta):
        theta = _as_theta(theta, 1)
        return np.array([float(y) - theta[0]])

    def jacobian(self, y, x, theta):
        return np.array([[-1.0]])

    def scores(self, y, X, theta):
        theta = _as_theta(theta, 1)
        return (np.asarray(y, dtype=np.float64) - theta[0])[:, None]

    def mean_jacobian(self, y, X, theta):
        return np.array([[-1.0]])

    def solve(self, y, X, theta0=None, tol=1e-10, max_iter=100):
        return np.array([np.mean(np.asarray(y, dtype=np.float64))])


class OLSModel(EEModel):
    """psi(y, x; theta) = x (y - x^T theta), Jacobian -x x^T."""

    name = "ols"

    def __init__(self, d):
        if int(d) < 1:
            raise DataError("ols model needs d >= 1")
        self.d = self.q = int(d)

    def psi(self, y, x, theta):
        theta = _as_theta(theta, self.q)
        x = np.asarray(x, dtype=np.float64).reshape(self.d)
        return x * (float(y) - x @ theta)

    def jacobian(self, y, x, theta):
        x = np.asarray(x, dtype=np.float64).reshape(self.d)
        return -np.outer(x, x)

    def scores(self, y, X, theta):
        theta = _as_theta(theta, self.q)
        X = np.asarray(X, dtype=np.float64)
        return X * (np.asarray(y, dtype=np.float64) - X @ theta)[:, None]

    def mean_jacobian(self, y, X, theta):
        X = np.asarray(X, dtype=np.float64)
        return -kernels.weighted_gram(X, np.ones(X.shape[0]))

    def solve(self, y, X, theta0=None, tol=1e-10, max_iter=100):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        G = X.T @ X / X.shape[0]
        return checked_solve(G, X.T @ y / X.shape[0], "X^T X / n")


class LogisticModel(EEModel):
    """psi(y, x; theta) = -x y + x gamma(x^T theta), Jacobian x x^T gamma (1 - gamma).

    With ``strict=True`` gold-standard outcomes must be 0 or 1. Surrogate
    outcomes (predicted probabilities or scores) may be any real number.
    """

    name = "logistic"

    def __init__(self, d, strict=True):
        if int(d) < 1:
            raise DataError("logistic model needs d >= 1")
        self.d = self.q = int(d)
        self.strict = strict

    def validate_outcome(self, y):
        if not self.strict:
            return
        y = np.asarray(y, dtype=np.float64)
        bad = ~((y == 0.0) | (y == 1.0))
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise DataError(f"logistic outcome must be 0 or 1; row {i + 1} has {y.reshape(-1)[i]!r}")

    def psi(self, y, x, theta):
        self.validate_outcome(y)
        return self.scores(np.array([y], dtype=np.float64), np.reshape(x, (1, self.d)), theta)[0]

    def jacobian(self, y, x, theta):
        return self.mean_jacobian(np.array([y], dtype=np.float64), np.reshape(x, (1, self.d)), theta)

    def scores(self, y, X, theta):
        theta = _as_theta(theta, self.q)
        X = np.asarray(X, dtype=np.float64)
        gamma, _ = kernels.logistic_terms(X @ theta)
        return X * (gamma - np.asarray(y, dtype=np.float64))[:, None]

    def mean_jacobian(self, y, X, theta):
        theta = _as_theta(theta, self.q)
        X = np.asarray(X, dtype=np.float64)
        _, dgamma = kernels.logistic_terms(X @ theta)
        return kernels.weighted_gram(X, dgamma)

    def solve(self, y, X, theta0=None, tol=1e-10, max_iter=100):
        """Newton-Raphson on the mean negative log-likelihood with backtracking."""
        y = np.asarray(y, dtype=np.float64)
        X = np.asarray(X, dtype=np.float64)
        self.validate_outcome(y)
        theta = np.zeros(self.q) if theta0 is None else _as_theta(theta0, self.q)

        def nll(t):
            eta = X @ t
            return float(np.mean(np.logaddexp(0.0, eta) - y * eta))

        f = nll(theta)
        for _ in range(max_iter):
            g = mean_score(self, y, X, theta)
            step = checked_solve(self.mean_jacobian(y, X, theta), g, "logistic Hessian")
            t = 1.0
            while True:
                cand = theta - t * step
                fc = nll(cand)
                if fc <= f + 1e-4 * t * float(g @ (-step)) or t < 1e-10:
                    break
                t *= 0.5
            theta, f = cand, fc
            if np.max(np.abs(t * step)) < tol:
                return theta
        raise SingularMatrixError(
            f"logistic solve did not converge in {max_iter} iterations (possible separation)"
        )


def mean_model():
    return MeanModel()


def ols_model(d):
    return OLSModel(d)


def logistic_model(d, strict=True):
    return LogisticModel(d, strict=strict)


MODELS = {
    "mean": lambda d=0: MeanModel(),
    "ols": OLSModel,
    "logistic": LogisticModel,
}


def get_model(name, d=0):
    """Look up a built-in model by name; ``d`` is ignored for ``mean``."""
    try:
        factory = MODELS[name]
    except KeyError:
        raise DataError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
    return factory(d)


def mean_score(model, y, X, theta):
    """Sample mean of ``model.scores`` over the rows of (y, X)."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] == 0:
        raise DataError("cannot average a score over zero rows")
    return model.scores(y, X, theta).mean(axis=0)


def average_psi(model, rows, theta):
    """Average of ``model.psi`` over a sequence of (y, x) pairs."""
    rows = list(rows)
    if not rows:
        raise DataError("average_psi needs at least one row")
    total = np.zeros(model.q)
    for y, x in rows:
        total += model.psi(y, x, theta)
    return total / len(rows)
