"""
Unscented Kalman filter with additive process and observation noise.

State transitions and observation maps are batch callables: they receive the
sigma points as rows of a (2n+1, n) array and return one row per point.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from common.errors import FilterDivergenceError, ParameterError

logger = logging.getLogger(__name__)

CHOLESKY_JITTER = 1e-9
SYMMETRY_TOLERANCE = 1e-9


def _matrix(values, name):
    matrix = np.array(values, dtype=float)
    if matrix.ndim == 0:
        matrix = matrix.reshape(1, 1)
    elif matrix.ndim == 1:
        matrix = np.diag(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ParameterError(f"{name} must be a square matrix.")
    if not np.all(np.isfinite(matrix)):
        raise ParameterError(f"{name} must be finite.")
    if not np.allclose(matrix, matrix.T, rtol=0.0, atol=SYMMETRY_TOLERANCE):
        raise ParameterError(f"{name} must be symmetric.")
    matrix.setflags(write=False)
    return matrix


def symmetrize(matrix):
    return 0.5 * (matrix + matrix.T)


def floor_eigenvalues(matrix):
    """Symmetrize and clip negative eigenvalues to zero."""
    matrix = symmetrize(matrix)
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    if eigenvalues[0] >= 0.0:
        return matrix
    eigenvalues = np.maximum(eigenvalues, 0.0)
    return symmetrize((eigenvectors * eigenvalues) @ eigenvectors.T)


@dataclass(frozen=True, eq=False)
class UkfConfig:
    alpha: float = 0.1
    beta: float = 2.0
    kappa: float = 0.0
    process_noise: np.ndarray = field(
        default_factory=lambda: np.diag([1e-8, 1e-8, 1e-4, 1e-6])
    )
    observation_noise: np.ndarray = field(
        default_factory=lambda: np.array([[0.1**2]])
    )
    max_epochs: int = 100
    tol: float = 1e-4
    redraw_sigma_points: bool = True
    initial_std_fraction_omega: float = 0.25
    initial_std_zeta: float = 0.05
    initial_std_velocity: float = 1.0

    def __post_init__(self):
        if not (0.0 < float(self.alpha) <= 1.0):
            raise ParameterError(f"alpha must lie in (0, 1], got {self.alpha}.")
        Q = _matrix(self.process_noise, "process_noise")
        R = _matrix(self.observation_noise, "observation_noise")
        if np.linalg.eigvalsh(Q)[0] < -SYMMETRY_TOLERANCE:
            raise ParameterError("process_noise must be positive semidefinite.")
        if np.linalg.eigvalsh(R)[0] <= 0.0:
            raise ParameterError("observation_noise must be positive definite.")
        if int(self.max_epochs) != self.max_epochs or self.max_epochs < 1:
            raise ParameterError("max_epochs must be an integer >= 1.")
        if not self.tol > 0:
            raise ParameterError("tol must be > 0.")
        for name in (
            "initial_std_fraction_omega",
            "initial_std_zeta",
            "initial_std_velocity",
        ):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0.")
        object.__setattr__(self, "process_noise", Q)
        object.__setattr__(self, "observation_noise", R)
        object.__setattr__(self, "max_epochs", int(self.max_epochs))

    @classmethod
    def for_identification(cls, sensor_sigma=0.1, **overrides) -> "UkfConfig":
        """Config for the [y, y', omega_n, zeta] state with R = sensor_sigma^2."""
        if not sensor_sigma > 0:
            raise ParameterError("sensor_sigma must be > 0 mm.")
        return cls(observation_noise=np.array([[sensor_sigma**2]]), **overrides)

    @classmethod
    def from_config(cls, section: dict, **overrides) -> "UkfConfig":
        """Build from the ``ukf`` section of config.yaml; None overrides are ignored."""
        values = dict(section)
        values.update({k: v for k, v in overrides.items() if v is not None})
        sensor_sigma = values.pop("sensor_sigma", 0.1)
        known = set(cls.__dataclass_fields__) - {"observation_noise"}
        unknown = set(values) - known
        if unknown:
            raise ParameterError(f"Unknown ukf settings: {', '.join(sorted(unknown))}.")
        return cls.for_identification(sensor_sigma, **values)

    def scaling(self, n: int) -> float:
        """lambda = alpha^2 (n + kappa) - n; requires n + lambda > 0."""
        lam = self.alpha**2 * (n + self.kappa) - n
        if n + lam <= 0:
            raise ParameterError(
                f"n + lambda must be > 0 (n={n}, alpha={self.alpha}, "
                f"kappa={self.kappa})."
            )
        return lam


@dataclass(frozen=True, eq=False)
class UkfState:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        covariance = np.array(self.covariance, dtype=float)
        if mean.ndim != 1 or covariance.shape != (mean.size, mean.size):
            raise ParameterError(
                "UkfState needs an n-vector mean and an n x n covariance."
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(covariance))):
            raise FilterDivergenceError("Filter state became non-finite.")
        mean.setflags(write=False)
        covariance.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", covariance)

    @property
    def n(self) -> int:
        return self.mean.size

    @property
    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.covariance - self.covariance.T)))

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(symmetrize(self.covariance))[0])


@dataclass(frozen=True, eq=False)
class SigmaSet:
    points: np.ndarray
    mean_weights: np.ndarray
    cov_weights: np.ndarray

    def weighted_mean(self) -> np.ndarray:
        return self.mean_weights @ self.points


def ut_weights(n: int, cfg: UkfConfig):
    if n < 1:
        raise ParameterError("State dimension must be >= 1.")
    lam = cfg.scaling(n)
    wm = np.full(2 * n + 1, 1.0 / (2.0 * (n + lam)))
    wc = wm.copy()
    wm[0] = lam / (n + lam)
    wc[0] = lam / (n + lam) + (1.0 - cfg.alpha**2 + cfg.beta)

    return wm, wc


def _cholesky(matrix):
    return scipy.linalg.cholesky(matrix, lower=True, check_finite=True)


def generate_sigma_points(s: UkfState, cfg: UkfConfig) -> SigmaSet:
    n = s.n
    wm, wc = ut_weights(n, cfg)
    spread = n + cfg.scaling(n)

    try:
        L = _cholesky(spread * s.covariance)
    except (np.linalg.LinAlgError, ValueError):
        logger.debug("Cholesky failed, retrying with %.0e jitter.", CHOLESKY_JITTER)
        try:
            L = _cholesky(spread * (s.covariance + CHOLESKY_JITTER * np.eye(n)))
        except (np.linalg.LinAlgError, ValueError):
            raise FilterDivergenceError(
                "Covariance is not positive definite even after jitter; the "
                "filter diverged."
            )

    # column i of L gives points i and i + n
    points = np.vstack([s.mean, s.mean + L.T, s.mean - L.T])

    return SigmaSet(points, wm, wc)


def _weighted_covariance(weights, a, b):
    return (weights[:, None] * a).T @ b


def ukf_predict(s: UkfState, transition, cfg: UkfConfig):
    """Propagate the sigma points through the transition and add Q."""
    sigma = generate_sigma_points(s, cfg)
    Q = cfg.process_noise
    if Q.shape != (s.n, s.n):
        raise ParameterError(
            f"process_noise is {Q.shape}, the state has dimension {s.n}."
        )

    propagated = np.asarray(transition(sigma.points), dtype=float)
    if propagated.shape != sigma.points.shape:
        raise ParameterError(
            f"transition returned shape {propagated.shape}, "
            f"expected {sigma.points.shape}."
        )
    if not np.all(np.isfinite(propagated)):
        raise FilterDivergenceError("State transition produced non-finite values.")

    mean = sigma.mean_weights @ propagated
    deviation = propagated - mean
    covariance = _weighted_covariance(sigma.cov_weights, deviation, deviation) + Q

    predicted = UkfState(mean, symmetrize(covariance))
    return predicted, SigmaSet(propagated, sigma.mean_weights, sigma.cov_weights)


def ukf_update(predicted: UkfState, propagated: SigmaSet, observe, z, cfg: UkfConfig):
    """
    Measurement update. With ``cfg.redraw_sigma_points`` the observation
    sigma points are drawn afresh from the predicted mean and covariance
    (so Q is reflected in the innovation covariance); otherwise the
    propagated points are observed as they are.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if not np.all(np.isfinite(z)):
        raise ParameterError("Measurement must be finite.")

    if cfg.redraw_sigma_points:
        sigma = generate_sigma_points(predicted, cfg)
    else:
        sigma = propagated
    points = sigma.points
    wm, wc = sigma.mean_weights, sigma.cov_weights

    Z = np.asarray(observe(points), dtype=float).reshape(points.shape[0], -1)
    R = cfg.observation_noise
    if Z.shape[1] != z.size or R.shape != (z.size, z.size):
        raise ParameterError(
            f"Observation dimension mismatch: H gives {Z.shape[1]}, "
            f"z has {z.size}, R is {R.shape}."
        )

    z_hat = wm @ Z
    dZ = Z - z_hat
    dX = points - predicted.mean
    S = symmetrize(_weighted_covariance(wc, dZ, dZ) + R)
    Pxz = _weighted_covariance(wc, dX, dZ)

    try:
        gain = np.linalg.solve(S, Pxz.T).T
    except np.linalg.LinAlgError:
        raise FilterDivergenceError("Innovation covariance is singular.")
    if not np.all(np.isfinite(gain)):
        raise FilterDivergenceError("Kalman gain is non-finite.")

    mean = predicted.mean + gain @ (z - z_hat)
    covariance = floor_eigenvalues(predicted.covariance - gain @ S @ gain.T)

    return UkfState(mean, covariance)


class UnscentedKalmanFilter:
    """
    Stateful wrapper around the predict/update operations. One instance per
    estimation run; not meant to be shared between threads.
    """

    def __init__(self, state: UkfState, cfg: UkfConfig):
        self.state = state
        self.cfg = cfg
        self._propagated = None

    def predict(self, transition):
        self.state, self._propagated = ukf_predict(self.state, transition, self.cfg)
        return self.state

    def update(self, observe, z):
        if self._propagated is None:
            raise RuntimeError("update() called before predict().")
        self.state = ukf_update(self.state, self._propagated, observe, z, self.cfg)
        self._propagated = None
        return self.state

    def step(self, transition, observe, z=None):
        self.predict(transition)
        if z is not None:
            self.update(observe, z)
        return self.state
