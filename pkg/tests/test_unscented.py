import numpy as np
import pytest

from common.errors import FilterDivergenceError, ParameterError
from ukf_ident import (
    UkfConfig,
    UkfState,
    UnscentedKalmanFilter,
    generate_sigma_points,
    ukf_predict,
    ukf_update,
    ut_weights,
)


def random_spd(rng, n, floor=0.1):
    B = rng.normal(size=(n, n))
    return B @ B.T + floor * np.eye(n)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0])
def test_weights_sum_to_one(alpha):
    cfg = UkfConfig(alpha=alpha)
    wm, wc = ut_weights(4, cfg)

    assert wm.shape == wc.shape == (9,)
    assert wm.sum() == pytest.approx(1.0, abs=1e-12)
    assert wc[0] - wm[0] == pytest.approx(1 - alpha**2 + 2.0)


def test_sigma_points_reproduce_mean_and_covariance():
    rng = np.random.default_rng(3)
    P = random_spd(rng, 4)
    x = rng.normal(size=4)
    sigma = generate_sigma_points(UkfState(x, P), UkfConfig())

    mean = sigma.weighted_mean()
    deviation = sigma.points - mean
    covariance = (sigma.cov_weights[:, None] * deviation).T @ deviation
    np.testing.assert_allclose(mean, x, atol=1e-10)
    np.testing.assert_allclose(covariance, P, atol=1e-9)
    np.testing.assert_array_equal(sigma.points[0], x)


def test_predict_through_identity_adds_process_noise():
    Q = np.diag([0.1, 0.2])
    cfg = UkfConfig(process_noise=Q, observation_noise=[[1.0]], alpha=1.0)
    state = UkfState([1.0, -2.0], np.eye(2))

    predicted, _ = ukf_predict(state, lambda points: points, cfg)

    np.testing.assert_allclose(predicted.mean, [1.0, -2.0], atol=1e-12)
    np.testing.assert_allclose(predicted.covariance, np.eye(2) + Q, atol=1e-12)


@pytest.mark.parametrize("alpha", [0.1, 1.0])
def test_ukf_matches_kalman_filter_on_linear_system(alpha):
    rng = np.random.default_rng(11)
    n, m = 4, 2
    orthogonal, _ = np.linalg.qr(rng.normal(size=(n, n)))
    A = 0.95 * orthogonal
    H = rng.normal(size=(m, n))
    Q = random_spd(rng, n, 0.01) * 0.01
    R = random_spd(rng, m, 0.1) * 0.1
    cfg = UkfConfig(alpha=alpha, process_noise=Q, observation_noise=R)

    x_true = rng.normal(size=n)
    x_kf, P_kf = np.zeros(n), np.eye(n)
    ukf = UnscentedKalmanFilter(UkfState(np.zeros(n), np.eye(n)), cfg)

    for _ in range(100):
        x_true = A @ x_true + rng.multivariate_normal(np.zeros(n), Q)
        z = H @ x_true + rng.multivariate_normal(np.zeros(m), R)

        x_kf = A @ x_kf
        P_kf = A @ P_kf @ A.T + Q
        S = H @ P_kf @ H.T + R
        K = P_kf @ H.T @ np.linalg.inv(S)
        x_kf = x_kf + K @ (z - H @ x_kf)
        P_kf = P_kf - K @ S @ K.T

        ukf.step(lambda points: points @ A.T, lambda points: points @ H.T, z)

        np.testing.assert_allclose(ukf.state.mean, x_kf, rtol=0, atol=1e-8)
        np.testing.assert_allclose(ukf.state.covariance, P_kf, rtol=0, atol=1e-8)


def scalar_update(prior_var, noise_var, z):
    cfg = UkfConfig(alpha=1.0, process_noise=[[0.0]], observation_noise=[[noise_var]])
    prior = UkfState([0.0], [[prior_var]])
    sigma = generate_sigma_points(prior, cfg)
    return ukf_update(prior, sigma, lambda points: points, z, cfg)


def test_scalar_update_weights_by_the_variances():
    posterior = scalar_update(2.0, 1.0, 3.0)

    assert posterior.mean[0] == pytest.approx(2.0 / 3.0 * 3.0, rel=1e-12)
    assert posterior.covariance[0, 0] == pytest.approx(2.0 - 4.0 / 3.0, rel=1e-12)


def test_huge_observation_noise_ignores_the_measurement():
    posterior = scalar_update(2.0, 1e12, 3.0)

    assert abs(posterior.mean[0]) < 1e-10
    assert posterior.covariance[0, 0] == pytest.approx(2.0, rel=1e-10)


def test_posterior_is_no_wider_than_the_prior():
    rng = np.random.default_rng(8)
    H = rng.normal(size=(2, 4))
    cfg = UkfConfig(process_noise=np.zeros((4, 4)), observation_noise=random_spd(rng, 2))
    prior = UkfState(rng.normal(size=4), random_spd(rng, 4))

    posterior = ukf_update(
        prior, generate_sigma_points(prior, cfg), lambda points: points @ H.T, [0.5, -1.0], cfg
    )

    shrink = np.linalg.eigvalsh(prior.covariance - posterior.covariance)
    assert shrink.min() >= -1e-9
    assert np.trace(posterior.covariance) < np.trace(prior.covariance)


def test_covariance_stays_symmetric_and_psd():
    rng = np.random.default_rng(5)
    cfg = UkfConfig(process_noise=np.diag([1e-3, 1e-3]), observation_noise=[[0.01]])
    ukf = UnscentedKalmanFilter(UkfState([0.0, 1.0], np.eye(2)), cfg)

    def transition(points):
        return np.column_stack([points[:, 0] + 0.1 * np.sin(points[:, 1]), points[:, 1]])

    for _ in range(50):
        ukf.step(transition, lambda points: points[:, :1] ** 2, rng.normal())
        assert ukf.state.asymmetry <= 1e-9
        assert ukf.state.min_eigenvalue >= -1e-12


def test_singular_covariance_is_rescued_by_jitter():
    sigma = generate_sigma_points(UkfState([1.0, 2.0], np.zeros((2, 2))), UkfConfig())
    np.testing.assert_allclose(sigma.points, np.tile([1.0, 2.0], (5, 1)), atol=1e-4)


def test_indefinite_covariance_diverges():
    with pytest.raises(FilterDivergenceError):
        generate_sigma_points(UkfState([0.0, 0.0], -np.eye(2)), UkfConfig())


def test_non_finite_transition_diverges():
    cfg = UkfConfig(process_noise=np.eye(1) * 1e-3, observation_noise=[[1.0]])
    state = UkfState([0.0], [[1.0]])
    with pytest.raises(FilterDivergenceError):
        ukf_predict(state, lambda points: points * np.inf, cfg)


def test_config_validation():
    with pytest.raises(ParameterError):
        UkfConfig(alpha=0.0)
    with pytest.raises(ParameterError):
        UkfConfig(process_noise=[[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ParameterError):
        UkfConfig(observation_noise=[[0.0]])
    with pytest.raises(ParameterError):
        UkfConfig(max_epochs=0)
    with pytest.raises(ParameterError):
        UkfConfig.for_identification(sensor_sigma=0.0)


def test_config_from_yaml_section():
    section = {"alpha": 0.2, "sensor_sigma": 0.5, "process_noise": [1e-8, 1e-8, 1e-4, 1e-6]}
    cfg = UkfConfig.from_config(section, tol=1e-3, beta=None)

    assert cfg.alpha == 0.2
    assert cfg.beta == 2.0
    assert cfg.tol == 1e-3
    np.testing.assert_allclose(cfg.observation_noise, [[0.25]])
    with pytest.raises(ParameterError):
        UkfConfig.from_config({"gamma": 1.0})


def test_update_requires_prediction():
    cfg = UkfConfig(process_noise=np.eye(1), observation_noise=[[1.0]])
    ukf = UnscentedKalmanFilter(UkfState([0.0], [[1.0]]), cfg)
    with pytest.raises(RuntimeError):
        ukf.update(lambda points: points, 1.0)
