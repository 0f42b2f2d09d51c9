"""Row-reduction kernels shared by the moment and score code.

Each kernel has a numba version and a numpy version with the same contract.
The module-level names (``cross_cov``, ``weighted_gram``, ``logistic_terms``)
are bound to whichever backend :mod:`pspa._accel` selected; the ``*_numpy``
and ``*_numba`` variants stay importable so the benchmark and the
backend-agreement tests can call both in one process.
"""
import numpy as np

from ._accel import HAVE_NUMBA, BACKEND, njit

__all__ = [
    "BACKEND",
    "cross_cov",
    "weighted_gram",
    "logistic_terms",
]


# ---------------------------------------------------------------- numpy

def cross_cov_numpy(a, b):
    """Sample cross-covariance of the columns of ``a`` and ``b``.

    ``a`` is (m, p) and ``b`` is (m, r); returns (p, r) with the 1/(m-1)
    divisor. Fewer than two rows gives a zero matrix.
    """
    m = a.shape[0]
    if m < 2:
        return np.zeros((a.shape[1], b.shape[1]))
    ac = a - a.mean(axis=0)
    bc = b - b.mean(axis=0)
    return (ac.T @ bc) / (m - 1)


def weighted_gram_numpy(X, w):
    """(1/m) * sum_i w_i x_i x_i^T."""
    m = X.shape[0]
    return (X.T @ (X * w[:, None])) / m


def logistic_terms_numpy(eta):
    """Stable sigmoid of ``eta`` and its derivative gamma * (1 - gamma)."""
    gamma = np.empty_like(eta)
    pos = eta >= 0
    gamma[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    gamma[~pos] = e / (1.0 + e)
    return gamma, gamma * (1.0 - gamma)


# ---------------------------------------------------------------- numba

@njit(cache=True)
def _center_transposed(a):
    m, p = a.shape
    out = np.empty((p, m))
    for j in range(p):
        s = 0.0
        for i in range(m):
            s += a[i, j]
        mu = s / m
        for i in range(m):
            out[j, i] = a[i, j] - mu
    return out


@njit(cache=True)
def _center(a):
    m, p = a.shape
    out = np.empty((m, p))
    mu = np.zeros(p)
    for i in range(m):
        for j in range(p):
            mu[j] += a[i, j]
    for j in range(p):
        mu[j] /= m
    for i in range(m):
        for j in range(p):
            out[i, j] = a[i, j] - mu[j]
    return out


@njit(cache=True)
def cross_cov_numba(a, b):
    m = a.shape[0]
    if m < 2:
        return np.zeros((a.shape[1], b.shape[1]))
    act = _center_transposed(a)
    bc = _center(b)
    return np.dot(act, bc) / (m - 1)


@njit(cache=True)
def weighted_gram_numba(X, w):
    m, p = X.shape
    xt = np.empty((p, m))
    xw = np.empty((m, p))
    for i in range(m):
        for j in range(p):
            xt[j, i] = X[i, j]
            xw[i, j] = X[i, j] * w[i]
    return np.dot(xt, xw) / m


@njit(cache=True)
def logistic_terms_numba(eta):
    m = eta.shape[0]
    gamma = np.empty(m)
    dgamma = np.empty(m)
    for i in range(m):
        t = eta[i]
        if t >= 0:
            g = 1.0 / (1.0 + np.exp(-t))
        else:
            e = np.exp(t)
            g = e / (1.0 + e)
        gamma[i] = g
        dgamma[i] = g * (1.0 - g)
    return gamma, dgamma


def _contig(a):
    return np.ascontiguousarray(a, dtype=np.float64)


if HAVE_NUMBA:

    def cross_cov(a, b):
        return cross_cov_numba(_contig(a), _contig(b))

    def weighted_gram(X, w):
        return weighted_gram_numba(_contig(X), _contig(w))

    def logistic_terms(eta):
        return logistic_terms_numba(_contig(eta))

else:
    cross_cov = cross_cov_numpy
    weighted_gram = weighted_gram_numpy
    logistic_terms = logistic_terms_numpy

cross_cov.__doc__ = cross_cov_numpy.__doc__
weighted_gram.__doc__ = weighted_gram_numpy.__doc__
logistic_terms.__doc__ = logistic_terms_numpy.__doc__
