"""
Input shaping
=============

Zero-vibration shapers for a single underdamped mode and the convolution of
a command with their impulse trains.

- ZV: 2 impulses, zero residual vibration at the nominal frequency.
- ZVD: 3 impulses, additionally zero derivative with respect to frequency.
- ZVDD: 4 impulses, zero second derivative as well.

Impulses sit at multiples of the damped half period pi / omega_d and their
amplitudes follow the binomial pattern in the damping factor
K = exp(-zeta pi / sqrt(1 - zeta^2)), normalized by (1 + K)^order.
"""
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from common.errors import ParameterError
from dynamics import (
    ImpulseTrain,
    SecondOrderParams,
    TimeSeries,
    damped_frequency,
)

# Impulse positions this close to a sample index are treated as on-grid.
GRID_SNAP = 1e-9


class ShaperKind(str, Enum):
    ZV = "zv"
    ZVD = "zvd"
    ZVDD = "zvdd"

    @property
    def impulse_count(self) -> int:
        return {"zv": 2, "zvd": 3, "zvdd": 4}[self.value]

    @classmethod
    def parse(cls, name: str) -> "ShaperKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ParameterError(
                f"Unknown shaper '{name}'. Choose one of "
                f"{', '.join(k.value for k in cls)}."
            )


@dataclass(frozen=True, eq=False)
class ShaperDesign:
    kind: ShaperKind
    params: SecondOrderParams
    train: ImpulseTrain
    k_factor: float

    def __post_init__(self):
        if not (0.0 < self.k_factor <= 1.0):
            raise ParameterError(f"K must lie in (0, 1], got {self.k_factor}.")
        if len(self.train) != self.kind.impulse_count:
            raise ParameterError(
                f"A {self.kind.value.upper()} shaper has "
                f"{self.kind.impulse_count} impulses, got {len(self.train)}."
            )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "params": self.params.to_dict(),
            "k_factor": self.k_factor,
            "amplitudes": self.train.amplitudes.tolist(),
            "times": self.train.times.tolist(),
        }


def damping_factor(p: SecondOrderParams) -> float:
    return math.exp(-p.zeta * math.pi / math.sqrt(1.0 - p.zeta**2))


def design_shaper(kind: ShaperKind, p: SecondOrderParams) -> ShaperDesign:
    kind = ShaperKind.parse(kind)
    K = damping_factor(p)
    half_period = math.pi / damped_frequency(p)
    order = kind.impulse_count - 1

    coefficients = np.array(
        [math.comb(order, i) * K**i for i in range(order + 1)]
    )
    amplitudes = coefficients / (1.0 + K) ** order
    times = np.arange(order + 1) * half_period

    return ShaperDesign(kind, p, ImpulseTrain(amplitudes, times), K)


def _delayed(x, k, total):
    """x delayed by k samples, zero before the start, cut to total samples."""
    out = np.zeros(total)
    out[k:] = x[: total - k]
    return out


def shape_command(input: TimeSeries, train: ImpulseTrain) -> TimeSeries:
    """
    Convolve a command with an impulse train.

    Delays that fall between samples are split linearly across the two
    neighbouring samples. The command is zero before its first sample and
    holds its last value after its end; the output is longer than the input
    by ceil(t_N / dt) samples so the final level is reached.
    """
    if len(input) == 0:
        raise ParameterError("Cannot shape an empty command.")

    positions = train.times / input.dt
    nearest = np.round(positions)
    positions = np.where(np.abs(positions - nearest) < GRID_SNAP, nearest, positions)

    extension = int(math.ceil(positions[-1]))
    total = len(input) + extension
    padded = np.concatenate(
        [input.samples, np.full(extension, input.samples[-1])]
    )

    shaped = np.zeros(total)
    for amplitude, position in zip(train.amplitudes, positions):
        k = int(math.floor(position))
        frac = position - k
        shaped += amplitude * (1.0 - frac) * _delayed(padded, k, total)
        if frac > 0:
            shaped += amplitude * frac * _delayed(padded, k + 1, total)

    return input.with_samples(shaped)
