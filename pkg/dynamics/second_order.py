"""
Underdamped second-order plant

    G(s) = omega_n^2 / (s^2 + 2 zeta omega_n s + omega_n^2)

with the value types shared by every other package: modal parameters, a
uniformly sampled signal and an impulse train, plus the residual vibration
quantities of an impulse train applied to the plant.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from common.errors import ParameterError, ResolutionError

from .integrator import (
    MAX_STEP_OMEGA,
    integrate_second_order,
    substeps_for,
)

logger = logging.getLogger(__name__)

SUM_TOLERANCE = 1e-12


def _readonly(values, name, ndim=1):
    array = np.array(values, dtype=float)
    if array.ndim != ndim:
        raise ParameterError(f"{name} must be {ndim}-dimensional.")
    if not np.all(np.isfinite(array)):
        raise ParameterError(f"{name} must contain only finite values.")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SecondOrderParams:
    omega_n: float
    zeta: float

    def __post_init__(self):
        try:
            omega_n = float(self.omega_n)
            zeta = float(self.zeta)
        except (TypeError, ValueError):
            raise ParameterError("omega_n and zeta must be real numbers.")
        if not math.isfinite(omega_n) or omega_n <= 0:
            raise ParameterError(f"omega_n must be > 0 rad/s, got {omega_n}.")
        if not (math.isfinite(zeta) and 0.0 <= zeta < 1.0):
            raise ParameterError(
                f"zeta must satisfy 0 <= zeta < 1 (underdamped), got {zeta}."
            )
        object.__setattr__(self, "omega_n", omega_n)
        object.__setattr__(self, "zeta", zeta)

    def scaled(self, omega_factor: float) -> "SecondOrderParams":
        return SecondOrderParams(self.omega_n * omega_factor, self.zeta)

    def to_dict(self) -> dict:
        return {"omega_n": self.omega_n, "zeta": self.zeta}


@dataclass(frozen=True, eq=False)
class TimeSeries:
    t0: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        dt = float(self.dt)
        t0 = float(self.t0)
        if not (math.isfinite(dt) and dt > 0):
            raise ParameterError(f"dt must be > 0 s, got {dt}.")
        if not math.isfinite(t0):
            raise ParameterError("t0 must be finite.")
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "samples", _readonly(self.samples, "samples"))

    def __len__(self):
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) * self.dt

    def with_samples(self, samples) -> "TimeSeries":
        return TimeSeries(self.t0, self.dt, samples)

    def truncate(self, n: int) -> "TimeSeries":
        return TimeSeries(self.t0, self.dt, self.samples[:n])


@dataclass(frozen=True, eq=False)
class ImpulseTrain:
    amplitudes: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        amplitudes = _readonly(self.amplitudes, "amplitudes")
        times = _readonly(self.times, "times")
        if amplitudes.size == 0:
            raise ParameterError("An impulse train needs at least one impulse.")
        if amplitudes.size != times.size:
            raise ParameterError("amplitudes and times must have equal length.")
        if times[0] != 0.0:
            raise ParameterError("The first impulse must be at t = 0.")
        if np.any(np.diff(times) <= 0):
            raise ParameterError("Impulse times must be strictly increasing.")
        if abs(float(np.sum(amplitudes)) - 1.0) > SUM_TOLERANCE:
            raise ParameterError(
                f"Impulse amplitudes must sum to 1 (got {np.sum(amplitudes)!r})."
            )
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "times", times)

    @classmethod
    def from_pairs(cls, pairs) -> "ImpulseTrain":
        amplitudes, times = zip(*pairs)
        return cls(amplitudes, times)

    @classmethod
    def identity(cls) -> "ImpulseTrain":
        """The unshaped baseline: a single unit impulse at t = 0."""
        return cls([1.0], [0.0])

    @property
    def impulses(self) -> list:
        return list(zip(self.amplitudes.tolist(), self.times.tolist()))

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    def __len__(self):
        return self.amplitudes.size


@dataclass(frozen=True)
class VibrationTerms:
    c_term: float
    s_term: float
    phase: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "phase", math.atan2(self.s_term, self.c_term))

    @property
    def magnitude(self) -> float:
        return math.hypot(self.c_term, self.s_term)


def damped_frequency(p: SecondOrderParams) -> float:
    return p.omega_n * math.sqrt(1.0 - p.zeta**2)


def simulate_response(
    p: SecondOrderParams,
    input: TimeSeries,
    initial_position: float = 0.0,
    initial_velocity: float = 0.0,
    substeps: int = None,
) -> TimeSeries:
    """
    Response of the plant to a zero-order-held input sequence, integrated
    with fixed-step RK4.

    :param substeps: internal RK4 steps per sample. None picks the smallest
        count keeping step * omega_n <= 0.1.
    :raises ResolutionError: an explicit substep count leaves
        step * omega_n above 0.5
    """
    if substeps is None:
        substeps = substeps_for(input.dt, p.omega_n)
    else:
        substeps = int(substeps)
        if substeps < 1:
            raise ParameterError("substeps must be >= 1.")
        if input.dt / substeps * p.omega_n > MAX_STEP_OMEGA:
            raise ResolutionError(
                f"Step too coarse: dt*omega_n/substeps = "
                f"{input.dt / substeps * p.omega_n:.3g} > {MAX_STEP_OMEGA}. "
                f"Use at least {substeps_for(input.dt, p.omega_n)} substeps "
                f"or leave substeps unset for automatic substepping."
            )

    displacement = integrate_second_order(
        p.omega_n,
        p.zeta,
        input.samples,
        input.dt,
        initial_position,
        initial_velocity,
        substeps,
    )

    return TimeSeries(input.t0, input.dt, displacement)


def _phasor_sums(omega_n, zeta, train: ImpulseTrain):
    """
    C and S of every omega_n in the (array) argument, each scaled by
    exp(-zeta omega_n t_N) so large exponents never overflow.
    """
    omega_n = np.asarray(omega_n, dtype=float)[..., None]
    omega_d = omega_n * math.sqrt(1.0 - zeta**2)
    t = train.times
    weights = train.amplitudes * np.exp(-zeta * omega_n * (t[-1] - t))
    c = np.sum(weights * np.cos(omega_d * t), axis=-1)
    s = np.sum(weights * np.sin(omega_d * t), axis=-1)

    return c, s


def vibration_terms(p: SecondOrderParams, train: ImpulseTrain) -> VibrationTerms:
    omega_d = damped_frequency(p)
    decay = np.exp(p.zeta * p.omega_n * train.times)
    c = float(np.sum(train.amplitudes * decay * np.cos(omega_d * train.times)))
    s = float(np.sum(train.amplitudes * decay * np.sin(omega_d * train.times)))

    return VibrationTerms(c, s)


def residual_vibration_ratio(p: SecondOrderParams, train: ImpulseTrain) -> float:
    c, s = _phasor_sums(p.omega_n, p.zeta, train)
    return float(np.hypot(c, s))


def impulse_train_response(
    p: SecondOrderParams, train: ImpulseTrain, times
) -> np.ndarray:
    """
    Analytic response to the impulse train. For t >= t_N this is the
    composite single-sinusoid form

        omega_n / sqrt(1 - zeta^2) exp(-zeta omega_n t) sqrt(C^2 + S^2)
            sin(omega_d t - phase)

    and before the last impulse the sum of the impulses already applied.
    """
    times = np.asarray(times, dtype=float)
    omega_d = damped_frequency(p)
    scale = p.omega_n / math.sqrt(1.0 - p.zeta**2)

    tau = times[..., None] - train.times
    active = tau >= 0
    partial = np.sum(
        np.where(
            active,
            train.amplitudes
            * np.exp(-p.zeta * p.omega_n * np.where(active, tau, 0.0))
            * np.sin(omega_d * tau),
            0.0,
        ),
        axis=-1,
    )

    terms = vibration_terms(p, train)
    composite = (
        np.exp(-p.zeta * p.omega_n * times)
        * terms.magnitude
        * np.sin(omega_d * times - terms.phase)
    )

    return scale * np.where(times >= train.duration, composite, partial)


def sensitivity_curve(
    train: ImpulseTrain,
    nominal: SecondOrderParams,
    ratio_range=(0.5, 1.5),
    npoints: int = 201,
) -> np.ndarray:
    """
    Residual vibration ratio over actual/nominal frequency ratios with zeta
    held at its nominal value.

    :return: array of shape (npoints, 2) holding (ratio, V) rows
    """
    lo, hi = (float(r) for r in ratio_range)
    if not (0 < lo < hi):
        raise ParameterError(f"ratio_range must satisfy 0 < lo < hi, got {ratio_range}.")
    if int(npoints) < 2:
        raise ParameterError("npoints must be >= 2.")

    ratios = np.linspace(lo, hi, int(npoints))
    c, s = _phasor_sums(ratios * nominal.omega_n, nominal.zeta, train)

    return np.column_stack([ratios, np.hypot(c, s)])


def insensitivity_bandwidth(
    train: ImpulseTrain,
    nominal: SecondOrderParams,
    threshold: float = 0.05,
    ratio_range=(0.25, 1.75),
    npoints: int = 6001,
) -> float:
    """
    Width of the contiguous frequency-ratio interval around 1.0 on which the
    residual vibration ratio stays at or below ``threshold``.
    """
    curve = sensitivity_curve(train, nominal, ratio_range, npoints)
    ratios, v = curve[:, 0], curve[:, 1]
    center = int(np.argmin(np.abs(ratios - 1.0)))
    if v[center] > threshold:
        return 0.0

    def edge(inside, outside):
        # linear crossing between the last inside and first outside point
        frac = (threshold - v[inside]) / (v[outside] - v[inside])
        return ratios[inside] + frac * (ratios[outside] - ratios[inside])

    left = center
    while left > 0 and v[left - 1] <= threshold:
        left -= 1
    right = center
    while right < ratios.size - 1 and v[right + 1] <= threshold:
        right += 1

    lo = ratios[0] if left == 0 else edge(left, left - 1)
    hi = ratios[-1] if right == ratios.size - 1 else edge(right, right + 1)
    if left == 0 or right == ratios.size - 1:
        logger.warning(
            "Insensitive band reaches the edge of ratio_range %s; the "
            "bandwidth is truncated.",
            ratio_range,
        )

    return float(hi - lo)
