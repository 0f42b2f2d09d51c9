import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_covariates_data, random_labels_data
from oracles import FIXTURE_F, FIXTURE_FU, FIXTURE_Y, mean_oracle, ols_closed_form
from pspa import (
    DataError,
    Dataset,
    MomentSet,
    SingularMatrixError,
    classical,
    estimate_moments,
    infer,
    mean_model,
    ols_model,
    one_step_update,
    optimal_weights,
    pspa_score,
)
from pspa.estimator import admissibility_margin, eigen_bound, pspa_jacobian, wald_summary
from pspa.models import LogisticModel


def test_score_hand_example():
    d = Dataset(mode="labels", y=[1.0, 3.0], X=None, fhat=[2.0, 2.0], fhat_unlabeled=[4.0, 4.0])
    np.testing.assert_array_equal(pspa_score(mean_model(), d, [2.0], [1.0]), [2.0])


def test_zero_weight_score_is_classical(rng):
    data = random_labels_data(rng)
    m = ols_model(data.d)
    theta = rng.standard_normal(data.d)
    np.testing.assert_array_equal(pspa_score(m, data, theta, 0.0), m.scores(*data.gold(), theta).mean(axis=0))


def test_balanced_surrogate_means_cancel():
    d = Dataset(mode="labels", y=[1.0, 2.0, 6.0], X=None, fhat=[1.0, 3.0, 5.0], fhat_unlabeled=[2.0, 4.0, 3.0, 3.0])
    for w in (-2.0, 0.3, 1.0, 7.0):
        assert pspa_score(mean_model(), d, [1.5], [w])[0] == pytest.approx(3.0 - 1.5, abs=1e-14)


def _scalar_set(M1, M2, M3, M4, rho):
    f = lambda v: np.array([[float(v)]])  # noqa: E731
    return MomentSet(A=f(-1), M1=f(M1), M2=f(M2), M3=f(M3), M4=f(M4), rho=rho)


def test_uncorrelated_prediction_gets_zero_weight():
    assert optimal_weights(_scalar_set(2.0, 1.0, 1.0, 0.0, 0.3), "labels").omega[0] == 0.0


def test_scalar_ratio_formula(rng):
    y = rng.standard_normal(40)
    f = 0.6 * y + rng.standard_normal(40)
    fu = rng.standard_normal(90) * 1.3
    d = Dataset(mode="labels", y=y, X=None, fhat=f, fhat_unlabeled=fu)
    w = optimal_weights(estimate_moments(mean_model(), d, [y.mean()]), "labels")
    expected = np.cov(y, f)[0, 1] / (np.var(f, ddof=1) + 40 / 90 * np.var(fu, ddof=1))
    assert w.ratio[0] == pytest.approx(expected, rel=1e-10)


def test_labels_clipping_rules():
    w = optimal_weights(_scalar_set(2.0, 1.0, 0.5, 3.0, 1.0), "labels")
    assert w.omega[0] == 1.0 and w.ratio[0] == pytest.approx(2.0)
    assert any("capped at 1" in e for e in w.events)
    # negative ratios are kept with predicted labels
    w = optimal_weights(_scalar_set(2.0, 1.0, 0.5, -0.6, 1.0), "labels")
    assert w.omega[0] == pytest.approx(-0.4)


def test_eigen_bound_examples():
    # least-squares orientation: both Jacobians negative definite
    assert eigen_bound(-np.diag([1.0, 2.0]), -np.diag([4.0, 1.0])) == pytest.approx(0.25)
    # logistic orientation: positive definite
    assert eigen_bound(np.diag([0.2, 0.5]), np.diag([0.1, 0.4])) == pytest.approx(0.5)
    assert eigen_bound(np.zeros((2, 2)), -np.eye(2)) == 0.0


def test_covariates_weights_respect_bound(rng):
    for _ in range(30):
        data = random_covariates_data(rng)
        m = ols_model(data.d)
        mom = estimate_moments(m, data, m.solve(*data.gold()))
        w = optimal_weights(mom, "covariates")
        assert np.all(w.omega >= 0)
        assert np.all(w.omega <= w.bound + 1e-15)


def test_admissibility_under_eigen_bound(rng):
    worst = np.inf
    for _ in range(200):
        data = random_covariates_data(rng)
        m = ols_model(data.d)
        mom = estimate_moments(m, data, m.solve(*data.gold()))
        w = optimal_weights(mom, "covariates")
        worst = min(worst, admissibility_margin(mom, w.omega))
    assert worst >= -1e-10


def test_mean_one_step_closed_form(rng):
    y = rng.standard_normal(30)
    f = y + rng.standard_normal(30)
    fu = rng.standard_normal(70)
    d = Dataset(mode="labels", y=y, X=None, fhat=f, fhat_unlabeled=fu)
    for w in (0.0, 0.4, 1.0):
        step = one_step_update(mean_model(), d, [y.mean()], [w])
        assert step.theta[0] == pytest.approx(y.mean() + w * (fu.mean() - f.mean()), abs=1e-14)


@pytest.mark.parametrize("maker", [random_labels_data, random_covariates_data])
def test_ols_one_step_equals_closed_form(rng, maker):
    for _ in range(25):
        data = maker(rng)
        m = ols_model(data.d)
        res = infer(m, data)
        oracle = ols_closed_form(
            (data.X, data.y), data.surrogate_labeled()[::-1], data.surrogate_unlabeled()[::-1], res.omega.omega
        )
        np.testing.assert_allclose(res.theta, oracle, rtol=1e-8, atol=1e-10)
        # affine score: the single step lands on the root
        assert np.linalg.norm(pspa_score(m, data, res.theta, res.omega.omega)) <= 1e-8


def test_one_step_from_root_with_zero_weight(rng):
    data = random_labels_data(rng)
    theta0 = rng.standard_normal(data.d)
    step = one_step_update(ols_model(data.d), data, theta0, 0.0)
    np.testing.assert_array_equal(step.theta, theta0)
    assert step.halvings == 0


def test_jacobian_is_derivative_of_score(rng):
    data = random_labels_data(rng, d=3)
    m = LogisticModel(3, strict=False)
    theta = 0.3 * rng.standard_normal(3)
    w = rng.uniform(0, 1, 3)
    J = pspa_jacobian(m, data, theta, w)
    h = 1e-6
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        fd = (pspa_score(m, data, theta + e, w) - pspa_score(m, data, theta - e, w)) / (2 * h)
        np.testing.assert_allclose(J[:, k], fd, rtol=1e-6, atol=1e-8)


def _singular_fixture():
    # G_L = I and G_U = diag(2, 1): with w = (-1, 0) the Newton matrix is diag(0, -1)
    XL = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)
    XU = np.array([[2, 1], [2, -1], [0, 1], [0, -1]], dtype=float)
    return Dataset(mode="labels", y=[1.0, 0.0, 2.0, 1.0], X=XL, fhat=[1.0, 1.0, 1.0, 1.0],
                   X_unlabeled=XU, fhat_unlabeled=[0.0, 1.0, 2.0, 3.0])


def test_singular_update_halves_weights():
    d = _singular_fixture()
    step = one_step_update(ols_model(2), d, np.zeros(2), [-1.0, 0.0])
    assert step.halvings == 1
    np.testing.assert_array_equal(step.omega, [-0.5, 0.0])


def test_singular_update_gives_up():
    XL = np.array([[1, 0], [2, 0], [3, 0]], dtype=float)
    d = Dataset(mode="labels", y=[1.0, 2.0, 3.0], X=XL, fhat=[1.0, 2.0, 2.0], X_unlabeled=XL, fhat_unlabeled=[1, 2, 3])
    with pytest.raises(SingularMatrixError, match="halving"):
        one_step_update(ols_model(2), d, np.zeros(2), [0.5, 0.5])


def test_logistic_iterated_update_solves_augmented_equation(rng):
    X = rng.standard_normal((150, 2))
    y = (X @ [0.8, -0.4] + rng.logistic(size=150) > 0).astype(float)
    f = 1 / (1 + np.exp(-(X @ [0.7, -0.3])))
    Xu = rng.standard_normal((400, 2))
    fu = 1 / (1 + np.exp(-(Xu @ [0.7, -0.3])))
    d = Dataset(mode="labels", y=y, X=X, fhat=f, X_unlabeled=Xu, fhat_unlabeled=fu)
    m = LogisticModel(2)
    one = infer(m, d)
    full = infer(m, d, iterate=True)
    assert np.linalg.norm(pspa_score(m, d, full.theta, full.omega.omega)) < 1e-10
    # the single step is already close to the root
    np.testing.assert_allclose(one.theta, full.theta, atol=0.5 * one.se.max())


def test_pure_noise_prediction_degenerates(rng):
    n = 3000
    y = rng.standard_normal(n) + 1.0
    d = Dataset(mode="labels", y=y, X=None, fhat=rng.standard_normal(n), fhat_unlabeled=rng.standard_normal(3 * n))
    res = infer(mean_model(), d)
    base = classical(mean_model(), d)
    w = np.linalg.norm(res.omega.omega)
    assert w < 0.1
    assert abs(res.theta[0] - base.theta[0]) <= 2 * base.se[0] * w + 1e-15


def test_perfect_prediction_reduces_se(rng):
    y = rng.standard_normal(100)
    d = Dataset(mode="labels", y=y, X=None, fhat=y, fhat_unlabeled=rng.standard_normal(500))
    assert infer(mean_model(), d).se[0] < classical(mean_model(), d).se[0]


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), c=st.floats(0.01, 100.0))
def test_scale_equivariance(seed, c):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(20)
    f = y + rng.standard_normal(20)
    fu = rng.standard_normal(35)
    base = infer(mean_model(), Dataset(mode="labels", y=y, X=None, fhat=f, fhat_unlabeled=fu))
    scaled = infer(mean_model(), Dataset(mode="labels", y=c * y, X=None, fhat=c * f, fhat_unlabeled=c * fu))
    assert scaled.theta[0] == pytest.approx(c * base.theta[0], rel=1e-10, abs=1e-12)
    assert scaled.omega.omega[0] == pytest.approx(base.omega.omega[0], rel=1e-10, abs=1e-12)


def test_four_point_pipeline_matches_oracle():
    o = mean_oracle(FIXTURE_Y, FIXTURE_F, FIXTURE_FU)
    d = Dataset(mode="labels", y=FIXTURE_Y, X=None, fhat=FIXTURE_F, fhat_unlabeled=FIXTURE_FU)
    res = infer(mean_model(), d)
    assert res.omega.omega[0] == pytest.approx(float(o["omega"]), abs=1e-12)
    assert res.theta[0] == pytest.approx(float(o["theta"]), abs=1e-12)
    assert res.sigma[0, 0] == pytest.approx(float(o["sigma"]), abs=1e-12)
    assert res.se[0] == pytest.approx(np.sqrt(float(o["sigma"]) / 4), abs=1e-12)


def test_wald_summary_values():
    se, lo, hi, p = wald_summary(np.array([1.0, 0.0]), np.diag([4.0, 0.0]), 16, 0.05)
    np.testing.assert_allclose(se, [0.5, 0.0])
    z = 1.959963984540054
    np.testing.assert_allclose(lo, [1 - z * 0.5, 0.0], rtol=1e-14)
    np.testing.assert_allclose(hi, [1 + z * 0.5, 0.0], rtol=1e-14)
    assert p[0] == pytest.approx(0.04550026389635842, rel=1e-12)  # two-sided tail at |t| = 2
    assert p[1] == 1.0
    with pytest.raises(DataError):
        wald_summary(np.zeros(1), np.eye(1), 4, 1.5)


def test_no_unlabeled_data_falls_back_to_classical():
    d = Dataset(mode="labels", y=[1.0, 2.0, 4.0], X=None, fhat=[1.0, 2.0, 3.0])
    res = infer(mean_model(), d)
    base = classical(mean_model(), d)
    assert res.omega.omega[0] == 0.0
    np.testing.assert_array_equal(res.theta, base.theta)
    np.testing.assert_array_equal(res.se, base.se)
    with pytest.raises(DataError):
        infer(mean_model(), d, omega=0.5)


def test_forced_omega_validation(rng):
    data = random_labels_data(rng, d=2)
    with pytest.raises(DataError, match="length"):
        infer(ols_model(2), data, omega=[0.1, 0.2, 0.3])
    with pytest.raises(DataError, match="finite"):
        infer(ols_model(2), data, omega=[np.nan, 0.2])
