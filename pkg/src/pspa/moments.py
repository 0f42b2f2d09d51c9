"""Plug-in moment matrices and sandwich covariances.

Notation follows the usual M-estimation layout: ``A`` is the mean Jacobian
of the gold-standard score, ``M1`` its covariance, ``M2``/``M3`` the
covariances of the surrogate score on the labeled and unlabeled rows and
``M4`` the labeled cross-covariance Cov(gold, surrogate). The surrogate
score is psi(fhat, x) with predicted labels, psi(y, qhat) with predicted
covariates and psi(fhat, qhat) when both are predicted.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import DataError, SingularMatrixError
from .models import COND_LIMIT

__all__ = [
    "MomentSet",
    "estimate_moments",
    "variance_coefficients",
    "sandwich",
    "sigma_jj",
]


def _sym(M):
    return 0.5 * (M + M.T)


@dataclass(frozen=True, eq=False)
class MomentSet:
    A: np.ndarray
    M1: np.ndarray
    M2: np.ndarray
    M3: np.ndarray
    M4: np.ndarray
    rho: float
    theta: np.ndarray | None = None
    n: int = 0
    N: int = 0
    # mean surrogate Jacobians, used by the eigenvalue bound and the Newton step
    J_surr_labeled: np.ndarray | None = None
    J_surr_unlabeled: np.ndarray | None = None

    @property
    def q(self):
        return self.A.shape[0]

    @cached_property
    def Ainv(self):
        cond = np.linalg.cond(self.A)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularMatrixError(
                f"mean Jacobian A is singular (condition number {cond:.3g}); the parameter is not identified"
            )
        return np.linalg.inv(self.A)

    @cached_property
    def surrogate_var(self):
        """M2 + rho * M3; infinite when there is no unlabeled data."""
        if not np.isfinite(self.rho):
            return np.full_like(self.M2, np.inf)
        return self.M2 + self.rho * self.M3


def estimate_moments(model, data, theta):
    """Sample analogs of A, M1..M4 at ``theta`` (1/(m-1) covariance divisors)."""
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    if theta.shape[0] != model.q or not np.all(np.isfinite(theta)):
        raise DataError(f"theta must be a finite vector of length {model.q}")
    if data.n < 2:
        raise DataError("need at least 2 labeled rows to estimate covariances")
    q = model.q
    gy, gX = data.gold()
    model.validate_outcome(gy)
    G = model.scores(gy, gX, theta)
    A = model.mean_jacobian(gy, gX, theta)
    M1 = _sym(kernels.cross_cov(G, G))

    zeros = np.zeros((q, q))
    M2 = M3 = M4 = zeros
    J_L = J_U = None
    has_surrogate = (data.fhat is not None) if data.mode == "labels" else (data.qhat is not None)
    if has_surrogate:
        sy, sX = data.surrogate_labeled()
        S = model.scores(sy, sX, theta)
        M2 = _sym(kernels.cross_cov(S, S))
        M4 = kernels.cross_cov(G, S)
        J_L = model.mean_jacobian(sy, sX, theta)
        if data.N > 0:
            uy, uX = data.surrogate_unlabeled()
            U = model.scores(uy, uX, theta)
            M3 = _sym(kernels.cross_cov(U, U))
            J_U = model.mean_jacobian(uy, uX, theta)

    moments = MomentSet(
        A=A, M1=M1, M2=M2, M3=M3, M4=M4, rho=data.rho, theta=theta,
        n=data.n, N=data.N, J_surr_labeled=J_L, J_surr_unlabeled=J_U,
    )
    moments.Ainv  # singularity guard
    return moments


def variance_coefficients(moments):
    """Per-coordinate coefficients (a, b, c) of Sigma_jj(w) = a w^2 - 2 b w + c.

    a = [A^-1 (M2 + rho M3) A^-T]_jj, b = [A^-1 M4 A^-T]_jj and
    c = [A^-1 M1 A^-T]_jj.
    """
    Ai = moments.Ainv
    a = np.einsum("ij,jk,ik->i", Ai, moments.surrogate_var, Ai) if np.isfinite(moments.rho) \
        else np.full(moments.q, np.inf)
    b = np.einsum("ij,jk,ik->i", Ai, moments.M4, Ai)
    c = np.einsum("ij,jk,ik->i", Ai, moments.M1, Ai)
    return a, b, c


def sandwich(moments, omega):
    """Asymptotic covariance of sqrt(n)(theta_hat - theta) for a fixed weight vector.

    Returns A^-1 V A^-T with
    V = M1 + D (M2 + rho M3) D - M4 D - D M4^T and D = diag(omega),
    symmetrised. With a symmetric M4 (every labels-mode model here) the
    cross term equals -2 D M4 after symmetrisation.
    """
    omega = np.asarray(omega, dtype=np.float64).reshape(-1)
    if omega.shape[0] != moments.q:
        raise DataError(f"omega has length {omega.shape[0]}, expected {moments.q}")
    Ai = moments.Ainv
    if not np.isfinite(moments.rho):
        if np.any(omega != 0):
            raise DataError("nonzero weights need unlabeled data (N > 0)")
        return _sym(Ai @ moments.M1 @ Ai.T)
    D = np.diag(omega)
    V = moments.M1 + D @ moments.surrogate_var @ D - moments.M4 @ D - D @ moments.M4.T
    return _sym(Ai @ V @ Ai.T)


def sigma_jj(moments, j, omega_j):
    """Coordinate-j variance as the separable quadratic in omega_j (0-based j)."""
    if not 0 <= j < moments.q:
        raise IndexError(f"coordinate {j} out of range for q={moments.q}")
    a, b, c = variance_coefficients(moments)
    if omega_j == 0:
        return float(c[j])
    return float(omega_j * omega_j * a[j] - 2.0 * omega_j * b[j] + c[j])
