"""
Parameter identifiers behind a common interface so the evaluation pipeline
can swap the UKF for a grid search or a fixed prior.
"""
import logging
import math
from abc import ABC, abstractmethod

import numpy as np

from common.errors import ParameterError
from dynamics import SecondOrderParams, TimeSeries, integrate_second_order, substeps_for

from .identification import (
    IdentificationResult,
    EpochRecord,
    identify_parameters,
    prepare_inputs,
    ZETA_MAX,
)
from .unscented import UkfConfig

logger = logging.getLogger(__name__)


class ParameterIdentifier(ABC):
    name = "identifier"

    @abstractmethod
    def identify(
        self,
        data: TimeSeries,
        command: TimeSeries = None,
        train_indices=None,
        reference: SecondOrderParams = None,
    ) -> IdentificationResult:
        """
        Estimate the plant parameters from ``data``.

        :param reference: the best known parameters of the plant; only the
            fixed identifier uses them
        """


class UkfIdentifier(ParameterIdentifier):
    """Joint-state UKF; without an initial guess it starts from a coarse grid."""

    name = "ukf"

    def __init__(self, cfg: UkfConfig = None, initial_guess: SecondOrderParams = None):
        self.cfg = cfg or UkfConfig.for_identification()
        self.initial_guess = initial_guess

    def identify(self, data, command=None, train_indices=None, reference=None):
        guess = self.initial_guess
        if guess is None:
            coarse = GridSearchIdentifier(n_omega=40, n_zeta=16, refinements=1)
            guess = coarse.identify(data, command, train_indices).params
            logger.debug("UKF seeded from coarse grid: %s", guess)

        return identify_parameters(data, guess, self.cfg, command, train_indices)


class GridSearchIdentifier(ParameterIdentifier):
    """
    Brute-force fit of the replayed response over an (omega_n, zeta) grid.
    The first level is log-spaced in omega_n; every refinement shrinks the
    grid around the best cell to its neighbours.
    """

    name = "grid"

    def __init__(
        self,
        omega_range=(0.5, 100.0),
        zeta_range=(0.0, 0.3),
        n_omega=60,
        n_zeta=31,
        refinements=3,
    ):
        lo, hi = (float(v) for v in omega_range)
        zlo, zhi = (float(v) for v in zeta_range)
        if not 0 < lo < hi:
            raise ParameterError(f"omega_range must satisfy 0 < lo < hi, got {omega_range}.")
        if not 0 <= zlo < zhi <= ZETA_MAX:
            raise ParameterError(
                f"zeta_range must lie within [0, {ZETA_MAX}], got {zeta_range}."
            )
        if n_omega < 3 or n_zeta < 3 or refinements < 0:
            raise ParameterError("Grid needs n_omega, n_zeta >= 3 and refinements >= 0.")
        self.omega_range = (lo, hi)
        self.zeta_range = (zlo, zhi)
        self.n_omega = int(n_omega)
        self.n_zeta = int(n_zeta)
        self.refinements = int(refinements)

    @classmethod
    def from_config(cls, grid: dict) -> "GridSearchIdentifier":
        return cls(
            omega_range=tuple(grid["omega_range"]),
            zeta_range=tuple(grid["zeta_range"]),
            n_omega=grid["n_omega"],
            n_zeta=grid["n_zeta"],
            refinements=grid["refinements"],
        )

    def _errors(self, omegas, zetas, data, u, train):
        omega_grid, zeta_grid = np.meshgrid(omegas, zetas, indexing="ij")
        substeps = substeps_for(data.dt, omegas[-1])
        y = integrate_second_order(
            omega_grid, zeta_grid, u, data.dt, float(data.samples[0]), 0.0, substeps
        )
        return np.sum(np.abs(y[..., train] - data.samples[train]), axis=-1)

    def identify(self, data, command=None, train_indices=None, reference=None):
        u, train = prepare_inputs(data, command, train_indices)

        omegas = np.geomspace(*self.omega_range, self.n_omega)
        zetas = np.linspace(*self.zeta_range, self.n_zeta)
        history = []
        for level in range(self.refinements + 1):
            errors = self._errors(omegas, zetas, data, u, train)
            i, j = np.unravel_index(int(np.argmin(errors)), errors.shape)
            best = SecondOrderParams(omegas[i], zetas[j])
            history.append(
                EpochRecord(level + 1, float(errors[i, j]), best.omega_n, best.zeta)
            )

            omegas = np.linspace(
                omegas[max(i - 1, 0)], omegas[min(i + 1, omegas.size - 1)], self.n_omega
            )
            zetas = np.linspace(
                zetas[max(j - 1, 0)], zetas[min(j + 1, zetas.size - 1)], self.n_zeta
            )

        return IdentificationResult(best, history, "grid-exhausted")


class FixedIdentifier(ParameterIdentifier):
    """
    No identification: returns preset parameters, or the reference scaled by
    ``omega_factor`` to model a mistuned prior.
    """

    name = "fixed"

    def __init__(self, params: SecondOrderParams = None, omega_factor: float = 1.0):
        if not (math.isfinite(omega_factor) and omega_factor > 0):
            raise ParameterError("omega_factor must be > 0.")
        self.params = params
        self.omega_factor = float(omega_factor)

    def identify(self, data, command=None, train_indices=None, reference=None):
        if self.params is not None:
            params = self.params
        elif reference is not None:
            params = reference.scaled(self.omega_factor)
        else:
            raise ParameterError("FixedIdentifier needs preset params or a reference.")

        return IdentificationResult(
            params, [EpochRecord(1, math.nan, params.omega_n, params.zeta)], "fixed"
        )
