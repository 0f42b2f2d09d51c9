"""Adaptive post-prediction estimator: weights, one-step update, inference.

The augmented score for weight vector w is

    Psi_w(theta) = mean_L psi(gold) + diag(w) [mean_U psi(surr) - mean_L psi(surr)]

and the estimate is a single Newton step on Psi_w from the classical root.
Weights are picked per coordinate to minimise the coordinate's asymptotic
variance, then clipped: at 1 with predicted labels, to
[0, lambda_min+(A) / lambda_max(J_surr)] with predicted covariates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DataError, SingularMatrixError
from .models import COND_LIMIT
from .moments import estimate_moments, sandwich, variance_coefficients

__all__ = [
    "WeightVector",
    "InferenceResult",
    "OneStep",
    "pspa_score",
    "pspa_jacobian",
    "eigen_bound",
    "optimal_weights",
    "one_step_update",
    "admissibility_margin",
    "infer",
    "wald_summary",
]

EIG_TOL = 1e-10
MAX_HALVINGS = 10


@dataclass(frozen=True, eq=False)
class WeightVector:
    omega: np.ndarray
    mode: str
    ratio: np.ndarray | None = None
    bound: float | None = None
    degenerate: np.ndarray | None = None
    events: tuple = ()

    @property
    def q(self):
        return self.omega.shape[0]


@dataclass(frozen=True, eq=False)
class InferenceResult:
    theta: np.ndarray
    se: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    pvalue: np.ndarray
    omega: WeightVector
    sigma: np.ndarray
    method: str
    n: int
    N: int
    alpha: float
    theta_classical: np.ndarray | None = None
    admissible: bool | None = None
    events: tuple = field(default=())

    @property
    def rho(self):
        return self.n / self.N if self.N else float("inf")

    @property
    def width(self):
        return self.ci_upper - self.ci_lower


class OneStep(NamedTuple):
    theta: np.ndarray
    omega: np.ndarray
    halvings: int


def _omega_array(omega, q):
    w = np.asarray(omega, dtype=np.float64)
    if w.ndim == 0:
        w = np.full(q, float(w))
    w = w.reshape(-1)
    if w.shape[0] != q:
        raise DataError(f"omega has length {w.shape[0]}, expected {q}")
    if not np.all(np.isfinite(w)):
        raise DataError("omega must be finite")
    return w


def pspa_score(model, data, theta, omega):
    """Augmented estimating function for the dataset's prediction mode."""
    omega = _omega_array(omega, model.q)
    gy, gX = data.gold()
    score = model.scores(gy, gX, theta).mean(axis=0)
    if not np.any(omega):
        return score
    if data.N == 0:
        raise DataError("nonzero weights need unlabeled data (N > 0)")
    sy, sX = data.surrogate_labeled()
    uy, uX = data.surrogate_unlabeled()
    aug = model.scores(uy, uX, theta).mean(axis=0) - model.scores(sy, sX, theta).mean(axis=0)
    return score + omega * aug


def pspa_jacobian(model, data, theta, omega):
    """d Psi_w / d theta, differentiated term by term."""
    omega = _omega_array(omega, model.q)
    gy, gX = data.gold()
    J = model.mean_jacobian(gy, gX, theta)
    if not np.any(omega):
        return J
    sy, sX = data.surrogate_labeled()
    uy, uX = data.surrogate_unlabeled()
    dJ = model.mean_jacobian(uy, uX, theta) - model.mean_jacobian(sy, sX, theta)
    return J + omega[:, None] * dJ


def _orientation(A):
    # Gram-matrix orientation: least squares Jacobians are negative definite,
    # logistic ones positive.
    return -1.0 if np.trace(A) < 0 else 1.0


def eigen_bound(A_gold, J_surr):
    """lambda_min+(s A_gold) / lambda_max(s J_surr), s orienting A_gold to PSD.

    lambda_min+ is the smallest eigenvalue above ``EIG_TOL`` of the
    symmetrised matrix. Returns inf when the surrogate Jacobian has no
    positive eigenvalue and 0 when the gold one has none.
    """
    s = _orientation(A_gold)
    ev_gold = np.linalg.eigvalsh(0.5 * s * (A_gold + A_gold.T))
    ev_surr = np.linalg.eigvalsh(0.5 * s * (J_surr + J_surr.T))
    pos = ev_gold[ev_gold > EIG_TOL]
    if pos.size == 0:
        return 0.0
    lam_max = ev_surr[-1]
    if lam_max <= EIG_TOL:
        return float("inf")
    return float(pos[0] / lam_max)


def optimal_weights(moments, mode):
    """Per-coordinate variance-minimising weights with the mode's clipping rule."""
    a, b, c = variance_coefficients(moments)
    q = moments.q
    events = []
    with np.errstate(divide="ignore", invalid="ignore"):
        degenerate = ~np.isfinite(a) | (a <= 1e-14 * np.maximum(np.abs(c), np.finfo(float).tiny))
        ratio = np.where(degenerate, 0.0, b / np.where(degenerate, 1.0, a))
    for j in np.flatnonzero(degenerate):
        events.append(f"omega[{j + 1}]: zero surrogate variance, set to 0")

    bound = None
    if mode == "labels":
        omega = np.minimum(ratio, 1.0)
        for j in np.flatnonzero(ratio > 1.0):
            events.append(f"omega[{j + 1}]: ratio {ratio[j]:.6g} capped at 1")
    elif mode in ("covariates", "both"):
        if moments.J_surr_labeled is None:
            raise DataError("surrogate Jacobian missing from moments")
        bound = eigen_bound(moments.A, moments.J_surr_labeled)
        omega = np.where(ratio > 0, np.minimum(ratio, bound), 0.0)
        for j in range(q):
            if ratio[j] > bound:
                events.append(f"omega[{j + 1}]: ratio {ratio[j]:.6g} capped at eigenvalue bound {bound:.6g}")
            elif ratio[j] < 0:
                events.append(f"omega[{j + 1}]: negative ratio {ratio[j]:.6g} floored at 0")
    else:
        raise DataError(f"unknown mode {mode!r}")
    return WeightVector(
        omega=omega, mode=mode, ratio=ratio, bound=bound, degenerate=degenerate, events=tuple(events)
    )


def _newton_matrix_ok(J):
    cond = np.linalg.cond(J)
    return np.isfinite(cond) and cond <= COND_LIMIT


def one_step_update(model, data, theta_start, omega, iterate=False, tol=1e-10, max_iter=100):
    """Newton step(s) on Psi_w from ``theta_start``.

    A singular d Psi_w is handled by halving the weights (at most
    ``MAX_HALVINGS`` times) before giving up. ``iterate=True`` keeps stepping
    until the step is below ``tol``; the default is the single step.
    """
    theta0 = np.asarray(theta_start, dtype=np.float64).reshape(-1)
    omega = _omega_array(omega, model.q)
    if not np.any(omega):
        return OneStep(theta0.copy(), omega, 0)
    halvings = 0
    while True:
        J = pspa_jacobian(model, data, theta0, omega)
        if _newton_matrix_ok(J):
            break
        if halvings == MAX_HALVINGS:
            raise SingularMatrixError(
                f"d Psi is singular even after halving the weights {MAX_HALVINGS} times"
            )
        omega = omega / 2.0
        halvings += 1
    theta = theta0 - np.linalg.solve(J, pspa_score(model, data, theta0, omega))
    if iterate:
        for _ in range(max_iter):
            J = pspa_jacobian(model, data, theta, omega)
            if not _newton_matrix_ok(J):
                raise SingularMatrixError("d Psi became singular during Newton iteration")
            step = np.linalg.solve(J, pspa_score(model, data, theta, omega))
            theta = theta - step
            if np.max(np.abs(step)) < tol:
                break
        else:
            raise SingularMatrixError(f"Newton iteration did not converge in {max_iter} steps")
    return OneStep(theta, omega, halvings)


def admissibility_margin(moments, omega):
    """Smallest eigenvalue of the symmetrised, gram-oriented matrix

        A - diag(w) J_surr,L + J_surr,U

    relative to its spectral scale. Non-negative (up to rounding) means the
    augmented equation has a positive semi-definite derivative.
    """
    omega = _omega_array(omega, moments.q)
    if moments.J_surr_labeled is None:
        raise DataError("surrogate Jacobians are missing from moments")
    J_U = moments.J_surr_unlabeled if moments.J_surr_unlabeled is not None else 0.0
    s = _orientation(moments.A)
    M = s * (moments.A - omega[:, None] * moments.J_surr_labeled + J_U)
    ev = np.linalg.eigvalsh(0.5 * (M + M.T))
    scale = max(1.0, float(np.max(np.abs(ev))))
    return float(ev[0] / scale)


def wald_summary(theta, sigma, n, alpha):
    """Standard errors, symmetric normal CIs and two-sided p-values."""
    if not 0.0 < alpha < 1.0:
        raise DataError(f"alpha must lie in (0, 1), got {alpha}")
    diag = np.diag(sigma)
    se = np.sqrt(np.maximum(diag, 0.0) / n)
    z = float(ndtri(1.0 - alpha / 2.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.abs(theta) / se
    t = np.where(se > 0, t, np.where(theta == 0, 0.0, np.inf))
    pvalue = np.clip(2.0 * ndtr(-t), 0.0, 1.0)
    return se, theta - z * se, theta + z * se, pvalue


def infer(model, data, alpha=0.05, *, omega=None, method="pspa", iterate=False):
    """Full estimation pipeline.

    classical root -> moments at the root -> weights -> Newton update ->
    moments at the update -> sandwich covariance -> Wald summary.
    ``omega`` forces a weight vector (scalar or length q) and skips the
    weight estimation step; the baselines are built this way.
    """
    gy, gX = data.gold()
    model.validate_outcome(gy)
    theta_c = model.solve(gy, gX)
    moments_c = estimate_moments(model, data, theta_c)

    if omega is None:
        weights = optimal_weights(moments_c, data.mode)
    else:
        w = _omega_array(omega, model.q)
        weights = WeightVector(omega=w, mode=data.mode, events=("omega forced",))
    if data.N == 0 and np.any(weights.omega):
        raise DataError("nonzero weights need unlabeled data (N > 0)")

    admissible = None
    if data.mode != "labels" and moments_c.J_surr_labeled is not None:
        admissible = admissibility_margin(moments_c, weights.omega) >= -EIG_TOL

    step = one_step_update(model, data, theta_c, weights.omega, iterate=iterate)
    events = list(weights.events)
    if step.halvings:
        events.append(f"d Psi singular: weights halved {step.halvings} time(s)")
        weights = WeightVector(
            omega=step.omega, mode=weights.mode, ratio=weights.ratio, bound=weights.bound,
            degenerate=weights.degenerate, events=tuple(events),
        )

    moments = estimate_moments(model, data, step.theta) if np.any(step.omega) else moments_c
    sigma = sandwich(moments, step.omega)
    se, lo, hi, p = wald_summary(step.theta, sigma, data.n, alpha)
    return InferenceResult(
        theta=step.theta, se=se, ci_lower=lo, ci_upper=hi, pvalue=p, omega=weights,
        sigma=sigma, method=method, n=data.n, N=data.N, alpha=alpha,
        theta_classical=theta_c, admissible=admissible, events=tuple(events),
    )
