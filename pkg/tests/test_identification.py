import numpy as np
import pytest

from common.errors import ParameterError
from data_io import Excitation, generate_synthetic, substream
from dynamics import SecondOrderParams, TimeSeries
from ukf_ident import (
    AugmentedPlantState,
    FixedIdentifier,
    GridSearchIdentifier,
    UkfConfig,
    UkfIdentifier,
    identify_parameters,
    training_error,
)

TRUTH = SecondOrderParams(8.0, 0.05)
GUESS = SecondOrderParams(6.0, 0.10)


def step_dataset(noise_fraction=0.0, seed=0, duration=4.0, rate=100.0):
    # peak of the unit step response is 1 + K
    peak = 1.0 + np.exp(-TRUTH.zeta * np.pi / np.sqrt(1 - TRUTH.zeta**2))
    return generate_synthetic(
        TRUTH, Excitation("step", 1.0), duration, rate, noise_fraction * peak, seed
    )


def test_training_error_sums_absolute_residuals():
    assert training_error([1.0, -2.0, 0.5], [0.0, 0.0, 0.5]) == 3.0
    assert training_error([[3.0, 4.0]], [[0.0, 0.0]]) == 5.0
    with pytest.raises(ParameterError):
        training_error([1.0], [1.0, 2.0])
    with pytest.raises(ParameterError):
        training_error([], [])


def test_clamping_keeps_parameters_physical():
    state, hit = AugmentedPlantState(0.1, 0.2, -3.0, 1.4).clamped()
    assert (state.omega_n, state.zeta) == (0.01, 0.99)
    assert (state.y, state.y_dot) == (0.1, 0.2)
    assert hit

    state, hit = AugmentedPlantState(0.0, 0.0, 8.0, 0.05).clamped()
    assert not hit


def test_exact_guess_on_clean_data_needs_no_filter_pass():
    dataset = step_dataset()
    result = identify_parameters(dataset.series, TRUTH, command=dataset.command())

    assert result.epochs == 0
    assert result.history == []
    assert result.initial_error == 0.0
    assert result.stop_reason == "error-below-tol"
    assert result.params == TRUTH


def test_free_vibration_with_exact_guess():
    dataset = generate_synthetic(TRUTH, Excitation("free", 2.0), 3.0, 100.0, 0.0, 1)
    result = identify_parameters(dataset.series, TRUTH, command=dataset.command())

    assert dataset.series.samples[0] == 2.0
    assert result.stop_reason == "error-below-tol"


def test_epoch_errors_decrease_until_termination():
    dataset = step_dataset(0.01, seed=1)
    cfg = UkfConfig.for_identification(sensor_sigma=0.02, max_epochs=8)
    result = identify_parameters(dataset.series, GUESS, cfg, command=dataset.command())

    errors = [result.initial_error] + result.errors
    assert 1 <= result.epochs <= 8
    assert result.stop_reason in ("error-below-tol", "improvement-below-tol", "max-epochs")
    for earlier, later in zip(errors[:-2], errors[1:-1]):
        assert earlier - later >= cfg.tol
    if result.stop_reason == "improvement-below-tol":
        assert errors[-2] - errors[-1] < cfg.tol


def test_max_epochs_bounds_the_loop():
    dataset = step_dataset(0.01, seed=2)
    cfg = UkfConfig.for_identification(sensor_sigma=0.02, max_epochs=2)
    result = identify_parameters(dataset.series, GUESS, cfg, command=dataset.command())

    assert result.epochs <= 2
    assert [r.epoch for r in result.history] == list(range(1, result.epochs + 1))


def test_single_epoch_runs_one_filter_pass():
    dataset = step_dataset(0.01, seed=2)
    cfg = UkfConfig.for_identification(sensor_sigma=0.02, max_epochs=1)
    result = identify_parameters(dataset.series, GUESS, cfg, command=dataset.command())

    assert result.epochs == 1
    assert result.history[0].epoch == 1
    assert result.params != GUESS
    assert (result.history[0].omega_n, result.history[0].zeta) == (
        result.params.omega_n,
        result.params.zeta,
    )
    assert result.history[0].error < result.initial_error


def test_identification_is_deterministic():
    dataset = step_dataset(0.01, seed=4)
    cfg = UkfConfig.for_identification(sensor_sigma=0.02, max_epochs=3)

    a = identify_parameters(dataset.series, GUESS, cfg, command=dataset.command())
    b = identify_parameters(dataset.series, GUESS, cfg, command=dataset.command())

    assert a.history == b.history
    assert a.params == b.params
    assert a.initial_error == b.initial_error


def test_pure_noise_terminates_within_the_epoch_cap():
    noise = TimeSeries(0.0, 0.01, substream(17).normal(0.0, 1.0, 400))
    cfg = UkfConfig.for_identification(sensor_sigma=1.0)

    result = identify_parameters(noise, GUESS, cfg)

    assert 1 <= result.epochs <= cfg.max_epochs == 100
    assert result.stop_reason in ("improvement-below-tol", "max-epochs")
    assert all(np.isfinite(result.errors))


def test_covariance_stays_healthy_during_identification():
    dataset = step_dataset(0.01, seed=3)
    cfg = UkfConfig.for_identification(sensor_sigma=0.02, max_epochs=2)
    seen = []

    def monitor(state):
        seen.append((state.asymmetry, state.min_eigenvalue))

    identify_parameters(dataset.series, GUESS, cfg, command=dataset.command(), monitor=monitor)

    assert seen
    assert max(a for a, _ in seen) <= 1e-9
    assert min(e for _, e in seen) >= -1e-10


def test_recovers_parameters_from_noisy_step():
    dataset = step_dataset(0.01, seed=0)
    peak = dataset.series.samples.max()
    cfg = UkfConfig.for_identification(sensor_sigma=0.01 * peak)

    result = identify_parameters(dataset.series, GUESS, cfg, command=dataset.command())

    assert result.params.omega_n == pytest.approx(TRUTH.omega_n, rel=0.02)
    assert result.params.zeta == pytest.approx(TRUTH.zeta, rel=0.3)
    assert result.epochs <= 100


@pytest.mark.slow
def test_recovers_parameters_for_most_seeds():
    hits = 0
    for seed in range(10):
        dataset = step_dataset(0.01, seed=seed)
        cfg = UkfConfig.for_identification(sensor_sigma=0.01 * 1.85)
        result = identify_parameters(dataset.series, GUESS, cfg, command=dataset.command())
        omega_ok = abs(result.params.omega_n / TRUTH.omega_n - 1) <= 0.01
        zeta_ok = abs(result.params.zeta / TRUTH.zeta - 1) <= 0.15
        hits += omega_ok and zeta_ok

    assert hits >= 9


def test_training_subset_skips_other_measurements():
    dataset = step_dataset()
    train = np.arange(0, len(dataset), 3)
    result = identify_parameters(
        dataset.series, TRUTH, command=dataset.command(), train_indices=train
    )
    assert result.initial_error == 0.0
    assert result.errors == []


def test_input_validation():
    dataset = step_dataset()
    with pytest.raises(ParameterError):
        identify_parameters(dataset.series.truncate(5), GUESS)
    with pytest.raises(ParameterError):
        identify_parameters(dataset.series, GUESS, train_indices=[0])
    with pytest.raises(ParameterError):
        identify_parameters(dataset.series, GUESS, train_indices=[len(dataset)])
    with pytest.raises(ParameterError):
        identify_parameters(dataset.series, GUESS, cfg=UkfConfig(process_noise=np.eye(2) * 1e-3))


def test_grid_search_finds_clean_parameters():
    dataset = step_dataset(duration=3.0)
    grid = GridSearchIdentifier(n_omega=40, n_zeta=21, refinements=3)

    result = grid.identify(dataset.series, command=dataset.command())

    assert result.params.omega_n == pytest.approx(TRUTH.omega_n, rel=0.01)
    assert result.params.zeta == pytest.approx(TRUTH.zeta, abs=0.01)
    assert result.stop_reason == "grid-exhausted"
    assert result.epochs == 4


def test_grid_rejects_bad_ranges():
    with pytest.raises(ParameterError):
        GridSearchIdentifier(omega_range=(10.0, 1.0))
    with pytest.raises(ParameterError):
        GridSearchIdentifier(zeta_range=(0.0, 1.0))


def test_fixed_identifier_scales_the_reference():
    dataset = step_dataset()
    result = FixedIdentifier(omega_factor=1.2).identify(dataset.series, reference=TRUTH)
    assert result.params == SecondOrderParams(9.6, 0.05)

    preset = FixedIdentifier(params=GUESS).identify(dataset.series)
    assert preset.params == GUESS

    with pytest.raises(ParameterError):
        FixedIdentifier().identify(dataset.series)


def test_ukf_identifier_with_guess_delegates():
    dataset = step_dataset()
    result = UkfIdentifier(initial_guess=TRUTH).identify(
        dataset.series, command=dataset.command()
    )
    assert result.params == TRUTH
    assert result.epochs == 0
