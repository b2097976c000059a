"""
Data-driven identification of (omega_n, zeta) with a joint-state UKF.

The filter state is [y, y', omega_n, zeta]: plant dynamics on the kinematic
pair, random walk on the parameters, and the displacement as the only
observation. One epoch is one filter pass over the trace followed by a
score of the refined estimate against the training measurements.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from common.errors import ParameterError
from dynamics import (
    SecondOrderParams,
    TimeSeries,
    simulate_response,
    step_second_order,
    substeps_for,
)

from .unscented import UkfConfig, UkfState, UnscentedKalmanFilter

logger = logging.getLogger(__name__)

OMEGA_FLOOR = 0.01
ZETA_MAX = 0.99
MIN_SAMPLES = 10


@dataclass(frozen=True)
class AugmentedPlantState:
    y: float
    y_dot: float
    omega_n: float
    zeta: float

    def to_vector(self) -> np.ndarray:
        return np.array([self.y, self.y_dot, self.omega_n, self.zeta])

    @classmethod
    def from_vector(cls, vector) -> "AugmentedPlantState":
        return cls(*(float(v) for v in vector))

    def clamped(self):
        """Return the state with parameters inside their bounds and whether
        any bound was hit."""
        omega_n = max(self.omega_n, OMEGA_FLOOR)
        zeta = min(max(self.zeta, 0.0), ZETA_MAX)
        hit = omega_n != self.omega_n or zeta != self.zeta
        return AugmentedPlantState(self.y, self.y_dot, omega_n, zeta), hit

    def params(self) -> SecondOrderParams:
        return SecondOrderParams(self.omega_n, self.zeta)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    error: float
    omega_n: float
    zeta: float
    clamped: bool = False


@dataclass
class IdentificationResult:
    params: SecondOrderParams
    history: list
    stop_reason: str
    warnings: list = field(default_factory=list)
    initial_error: float = None

    @property
    def errors(self) -> list:
        return [record.error for record in self.history]

    @property
    def epochs(self) -> int:
        return len(self.history)


def training_error(measurements, predictions) -> float:
    """Sum over the set of the norms of measurement minus prediction."""
    measurements = np.asarray(measurements, dtype=float)
    predictions = np.asarray(predictions, dtype=float)
    if measurements.shape != predictions.shape:
        raise ParameterError(
            f"Length mismatch: {measurements.shape} measurements vs "
            f"{predictions.shape} predictions."
        )
    if measurements.size == 0:
        raise ParameterError("training_error needs at least one measurement.")

    residual = measurements - predictions
    if residual.ndim == 1:
        return float(np.sum(np.abs(residual)))

    return float(np.sum(np.linalg.norm(residual.reshape(residual.shape[0], -1), axis=1)))


def prepare_inputs(data: TimeSeries, command: TimeSeries = None, train_indices=None):
    """
    Command samples aligned with the data (zeros for free vibration) and the
    sorted measurement indices used for training. Index 0 anchors the
    kinematic state and is never a training measurement.
    """
    n = len(data)
    if n < MIN_SAMPLES:
        raise ParameterError(
            f"Identification needs at least {MIN_SAMPLES} samples, got {n}."
        )

    if command is None:
        u = np.zeros(n)
    else:
        if len(command) < n:
            raise ParameterError(
                f"Command has {len(command)} samples, data has {n}."
            )
        if abs(command.dt - data.dt) > 1e-12 * data.dt:
            raise ParameterError("Command and data must share the same dt.")
        u = np.asarray(command.samples[:n], dtype=float)

    if train_indices is None:
        train = np.arange(1, n)
    else:
        train = np.unique(np.asarray(train_indices, dtype=int))
        if train.size and (train[0] < 0 or train[-1] >= n):
            raise ParameterError("train_indices out of range.")
        train = train[train > 0]
    if train.size == 0:
        raise ParameterError("No training measurements after index 0.")

    return u, train


def replay(params: SecondOrderParams, data: TimeSeries, u) -> np.ndarray:
    """Model displacement from the reinitialized kinematic state (y0, 0)."""
    command = TimeSeries(data.t0, data.dt, u)
    return simulate_response(params, command, float(data.samples[0]), 0.0).samples


def _plant_transition(points, u, dt):
    omega_n = np.maximum(points[:, 2], OMEGA_FLOOR)
    zeta = np.clip(points[:, 3], 0.0, ZETA_MAX)
    substeps = substeps_for(dt, omega_n)
    kinematic = step_second_order(points[:, :2], omega_n, zeta, u, dt, substeps)

    return np.column_stack([kinematic, points[:, 2:]])


def _observe_displacement(points):
    return points[:, :1]


def _filter_pass(data, u, train, estimate, param_cov, cfg, monitor=None):
    """One UKF sweep over the trace; returns (estimate, param_cov, clamped)."""
    measured = np.zeros(len(data), dtype=bool)
    measured[train] = True

    P0 = np.zeros((4, 4))
    P0[0, 0] = cfg.observation_noise[0, 0]
    P0[1, 1] = cfg.initial_std_velocity**2
    P0[2:, 2:] = param_cov
    x0 = AugmentedPlantState(float(data.samples[0]), 0.0, estimate.omega_n, estimate.zeta)

    ukf = UnscentedKalmanFilter(UkfState(x0.to_vector(), P0), cfg)
    clamped = False
    for k in range(len(data) - 1):
        uk = u[k]
        ukf.predict(lambda points: _plant_transition(points, uk, data.dt))
        if not measured[k + 1]:
            continue
        ukf.update(_observe_displacement, data.samples[k + 1])
        state, clamped = AugmentedPlantState.from_vector(ukf.state.mean).clamped()
        if clamped:
            ukf.state = UkfState(state.to_vector(), ukf.state.covariance)
        if monitor is not None:
            monitor(ukf.state)

    final = AugmentedPlantState.from_vector(ukf.state.mean)
    return final.params(), np.array(ukf.state.covariance[2:, 2:]), clamped


def identify_parameters(
    data: TimeSeries,
    initial_guess: SecondOrderParams,
    cfg: UkfConfig = None,
    command: TimeSeries = None,
    train_indices=None,
    monitor=None,
) -> IdentificationResult:
    """
    Identify (omega_n, zeta) from a displacement trace.

    The initial guess is scored once before any filtering; if that error is
    already below ``cfg.tol`` the guess is returned without a pass. Each
    epoch then runs one filter pass over the trace, carrying the parameter
    covariance forward and restarting the kinematic state, and records the
    training error of the refined estimate. The loop stops when that error
    is below ``cfg.tol``, when it improved by less than ``cfg.tol`` over the
    previous score, or after ``cfg.max_epochs`` passes.

    Scores come from replaying the command through the plant with the
    estimate from the reinitialized kinematic state, not from the filter's
    one-step predictions during the pass.

    :param command: input that produced the trace; None means free vibration
    :param train_indices: measurement indices used for updates and scoring;
        other samples are predicted through without an update
    :param monitor: called with the filter state after every update
    """
    cfg = cfg or UkfConfig.for_identification()
    if cfg.process_noise.shape != (4, 4) or cfg.observation_noise.shape != (1, 1):
        raise ParameterError(
            "Identification needs a 4x4 process noise and a 1x1 observation noise."
        )
    u, train = prepare_inputs(data, command, train_indices)
    measurements = data.samples[train]

    def score(params):
        return training_error(measurements, replay(params, data, u)[train])

    estimate = initial_guess
    param_cov = np.diag(
        [
            (cfg.initial_std_fraction_omega * initial_guess.omega_n) ** 2,
            cfg.initial_std_zeta**2,
        ]
    )
    initial_error = score(estimate)
    logger.debug("initial guess: error=%.6g", initial_error)
    history = []
    warnings = []
    if initial_error < cfg.tol:
        return IdentificationResult(
            estimate, history, "error-below-tol", warnings, initial_error
        )

    previous = initial_error
    stop_reason = "max-epochs"
    for epoch in range(1, cfg.max_epochs + 1):
        estimate, param_cov, clamped = _filter_pass(
            data, u, train, estimate, param_cov, cfg, monitor
        )
        error = score(estimate)
        history.append(
            EpochRecord(epoch, error, estimate.omega_n, estimate.zeta, clamped)
        )
        logger.debug(
            "epoch %d: error=%.6g omega_n=%.6g zeta=%.6g",
            epoch,
            error,
            estimate.omega_n,
            estimate.zeta,
        )

        if error < cfg.tol:
            stop_reason = "error-below-tol"
            break
        if previous - error < cfg.tol:
            stop_reason = "improvement-below-tol"
            break
        previous = error

    if history[-1].clamped:
        message = (
            f"Estimate omega_n={estimate.omega_n:.6g}, zeta={estimate.zeta:.6g} "
            f"sits on a parameter bound; it may be non-physical."
        )
        logger.warning(message)
        warnings.append(message)

    return IdentificationResult(estimate, history, stop_reason, warnings, initial_error)
