import numpy as np
import pytest

from dstls.battery import arx_from_ecm
from dstls.estimators import (
    EstimationError,
    RlsState,
    UninformativeSegment,
    build_regression,
    rls_step,
    svd,
    tls_solve,
)

THETA = np.array(arx_from_ecm(1e-3, 0.5e-3, 1e4, 1.0))


def arx_series(theta, current):
    v = np.zeros(len(current))
    for k in range(1, len(current)):
        v[k] = theta[0] * v[k - 1] + theta[1] * current[k] + theta[2] * current[k - 1]
    return v


def prior_batch(x, y, p0_diag=1e6):
    """Batch solution that RLS with lambda=1 reproduces exactly: the P0 prior acts as a ridge."""
    a = x.T @ x + np.eye(x.shape[1]) / p0_diag
    return np.linalg.solve(a, x.T @ y)


# -- RLS ---------------------------------------------------------------------


def test_rls_hand_step():
    st = rls_step(RlsState(np.zeros(3), np.eye(3)), 1.0, [1.0, 0.0, 0.0], 1.0)
    np.testing.assert_allclose(st.theta_hat, [0.5, 0, 0])
    assert st.p[0, 0] == pytest.approx(0.5)


def test_rls_zero_innovation_keeps_theta():
    st0 = RlsState(np.array([0.2, 0.1, -0.1]), np.eye(3) * 5)
    phi = np.array([1.0, 2.0, 3.0])
    st = rls_step(st0, float(st0.theta_hat @ phi), phi, 0.99)
    np.testing.assert_array_equal(st.theta_hat, st0.theta_hat)
    assert not np.allclose(st.p, st0.p)


def test_rls_rejects_bad_lambda():
    with pytest.raises(EstimationError):
        rls_step(RlsState.initial(), 0.0, [1, 1, 1], 0.0)


def test_rls_tracks_batch_oracle(rng):
    x = rng.normal(size=(200, 3))
    y = x @ rng.normal(size=3) + 0.1 * rng.normal(size=200)
    st = RlsState.initial()
    for k in range(200):
        st = rls_step(st, y[k], x[k], 1.0)
        ref = prior_batch(x[: k + 1], y[: k + 1])
        assert np.max(np.abs(st.theta_hat - ref)) <= 1e-6 * np.max(np.abs(ref))


def test_rls_on_noiseless_arx_data(rng):
    cur = rng.normal(0, 20, 501)
    v = arx_series(THETA, cur)
    x = np.column_stack([v[:-1], cur[1:], cur[:-1]])
    st = RlsState.initial()
    for k in range(1, 501):
        st = rls_step(st, v[k], x[k - 1], 1.0)
    ref = prior_batch(x, v[1:])
    np.testing.assert_allclose(st.theta_hat, ref, rtol=1e-6)
    # the P0 prior biases the tiny-scale overpotential column slightly
    np.testing.assert_allclose(st.theta_hat, THETA, rtol=1e-3)


def test_rls_covariance_stays_positive_definite(rng):
    st = RlsState.initial()
    for _ in range(10_000):
        phi = rng.normal(size=3) * rng.choice([1e-3, 1.0, 10.0], size=3)
        st = rls_step(st, float(rng.normal()), phi, 0.999)
    np.testing.assert_array_equal(st.p, st.p.T)
    np.linalg.cholesky(st.p)


# -- regression --------------------------------------------------------------


def test_regression_layout():
    vbar = np.array([10.0, 11, 12, 13, 14])
    cur = np.array([20.0, 21, 22, 23, 24])
    reg = build_regression(vbar, cur)
    np.testing.assert_array_equal(reg.y, [14, 13, 12, 11])
    np.testing.assert_array_equal(reg.x, [[13, 24, 23], [12, 23, 22], [11, 22, 21], [10, 21, 20]])


def test_regression_identity(rng):
    cur = rng.normal(0, 10, 40)
    v = arx_series(THETA, cur)
    reg = build_regression(v, cur)
    np.testing.assert_allclose(reg.x @ THETA, reg.y, rtol=0, atol=1e-15)


def test_regression_too_short():
    with pytest.raises(EstimationError):
        build_regression(np.zeros(4), np.zeros(4))


# -- SVD ---------------------------------------------------------------------


def check_svd(h):
    u, s, v = svd(h)
    scale = np.linalg.norm(h)
    assert np.linalg.norm(u * s @ v.T - h) <= 1e-10 * max(scale, 1e-300)
    n = h.shape[1]
    assert np.max(np.abs(u.T @ u - np.eye(n))) <= 1e-10
    assert np.max(np.abs(v.T @ v - np.eye(n))) <= 1e-10
    assert np.all(s >= 0) and np.all(np.diff(s) <= 0)
    return s


def test_svd_diagonal_padded():
    h = np.zeros((4, 4))
    h[0, 0], h[1, 1] = 3.0, 4.0
    np.testing.assert_array_equal(check_svd(h), [4, 3, 0, 0])


def test_svd_identity():
    np.testing.assert_allclose(check_svd(np.eye(4)), 1.0, rtol=0, atol=1e-15)


def test_svd_random_against_numpy(rng):
    h = rng.normal(size=(50, 4))
    s = check_svd(h)
    np.testing.assert_allclose(s, np.linalg.svd(h, compute_uv=False), rtol=1e-12)


def test_svd_row_permutation_invariance(rng):
    h = rng.normal(size=(30, 4)) * [1, 1e-3, 10, 1e-2]
    s1 = svd(h).sigma
    s2 = svd(h[rng.permutation(30)]).sigma
    assert np.max(np.abs(s1 - s2)) <= 1e-10 * s1[0]


def test_svd_rank_deficient(rng):
    h = rng.normal(size=(20, 2)) @ rng.normal(size=(2, 4))
    s = check_svd(h)
    assert s[2] < 1e-12 * s[0]


def test_svd_rejects_bad_input():
    with pytest.raises(EstimationError):
        svd(np.full((5, 4), np.nan))
    with pytest.raises(EstimationError):
        svd(np.zeros((3, 4)))


# -- TLS ---------------------------------------------------------------------


def test_tls_exact_recovery(rng):
    cur = rng.normal(0, 10, 60)
    v = arx_series(THETA, cur)
    np.testing.assert_allclose(tls_solve(build_regression(v, cur)), THETA, rtol=1e-9)


def test_tls_exact_recovery_under_scaling(rng):
    for _ in range(20):
        th = np.array(arx_from_ecm(*rng.uniform(1e-4, 5e-3, 2), rng.uniform(1e3, 1e5), 1.0))
        cur = rng.normal(0, 10, 80) * rng.uniform(0.1, 10)
        v = arx_series(th, cur)
        np.testing.assert_allclose(tls_solve(build_regression(v, cur)), th, rtol=1e-9)


def test_tls_uninformative_constant_data():
    with pytest.raises(UninformativeSegment):
        tls_solve(build_regression(np.full(30, 0.01), np.full(30, 5.0)))


def test_tls_less_biased_than_rls_under_noise():
    wins = 0
    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        cur = rng.normal(0, 20, 120)
        v = arx_series(THETA, cur)
        cur_n = cur + rng.normal(0, 0.02, 120)
        v_n = v + rng.normal(0, 0.002, 120)
        tls = tls_solve(build_regression(v_n, cur_n))
        st = RlsState.initial()
        for k in range(1, 120):
            st = rls_step(st, v_n[k], [v_n[k - 1], cur_n[k], cur_n[k - 1]], 0.999)
        wins += abs(tls[0] - THETA[0]) < abs(st.theta_hat[0] - THETA[0])
    assert wins >= 8
