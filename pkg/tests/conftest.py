import numpy as np
import pytest

from pspa import Dataset


def random_labels_data(rng, n=None, N=None, d=None, quality=None):
    """Random OLS fixture with predicted labels of random quality."""
    n = n or int(rng.integers(20, 80))
    N = N or int(rng.integers(20, 200))
    d = d or int(rng.integers(1, 7))
    quality = rng.uniform(0, 1) if quality is None else quality
    beta = rng.standard_normal(d)

    def draw(m):
        X = rng.standard_normal((m, d)) * rng.uniform(0.5, 2, size=d)
        y = X @ beta + rng.standard_normal(m)
        f = quality * y + (1 - quality) * rng.standard_normal(m) + 0.3 * X[:, 0]
        return X, y, f

    X, y, f = draw(n)
    Xu, _, fu = draw(N)
    return Dataset(mode="labels", y=y, X=X, fhat=f, X_unlabeled=Xu, fhat_unlabeled=fu)


def random_covariates_data(rng, n=None, N=None, d=None, noise=None):
    """Random OLS fixture where the first covariate is replaced by a noisy copy."""
    n = n or int(rng.integers(30, 100))
    N = N or int(rng.integers(30, 300))
    d = d or int(rng.integers(1, 6))
    noise = rng.uniform(0.1, 1.0) if noise is None else noise
    beta = rng.standard_normal(d)

    def draw(m):
        X = rng.standard_normal((m, d))
        y = X @ beta + rng.standard_normal(m)
        Q = X.copy()
        Q[:, 0] = X[:, 0] + noise * rng.standard_normal(m)
        return X, y, Q

    X, y, Q = draw(n)
    _, yu, Qu = draw(N)
    return Dataset(mode="covariates", y=y, X=X, qhat=Q, y_unlabeled=yu, qhat_unlabeled=Qu)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria report: one line per criterion, printed after the run
ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
