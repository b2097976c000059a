import numpy as np
import pytest

from common.errors import DatasetFormatError, NonuniformTimestampsError, ParameterError
from data_io import (
    Dataset,
    Excitation,
    find_datasets,
    generate_synthetic,
    load_dataset,
    write_dataset,
)
from dynamics import SecondOrderParams, TimeSeries, simulate_response
from shapers import ShaperKind, design_shaper

P = SecondOrderParams(8.0, 0.05)


def write_text(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_write_then_load_is_bitwise_identical(tmp_path):
    dataset = generate_synthetic(
        P,
        Excitation("pulse", 2.5, 0.3),
        duration=2.0,
        sample_rate=100.0,
        noise_sigma=0.05,
        seed=4,
        meta={"label": "d1", "payload_kg": 0.125, "beam_m": 0.35},
    )
    path = tmp_path / "d1.csv"
    write_dataset(dataset, path)
    loaded = load_dataset(path)

    np.testing.assert_array_equal(loaded.series.samples, dataset.series.samples)
    assert loaded.series.dt == dataset.series.dt == 0.01
    assert loaded.series.t0 == 0.0
    assert loaded.ground_truth == P
    assert loaded.label == "d1"
    assert loaded.meta["payload_kg"] == 0.125
    assert loaded.meta["beam_m"] == 0.35
    assert loaded.excitation.kind == "pulse"
    np.testing.assert_array_equal(loaded.command().samples, dataset.command().samples)


def test_file_layout(tmp_path):
    dataset = Dataset(TimeSeries(0.0, 0.5, [0.0, 0.1]), {"label": "tiny"})
    path = tmp_path / "tiny.csv"
    write_dataset(dataset, path)

    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.decode("utf-8").splitlines() == [
        "# rate_hz=2",
        "# dt_s=0.5",
        "# label=tiny",
        "time_s,displacement_mm",
        "0,0",
        "0.5,0.10000000000000001",
    ]


def test_shaped_excitation_survives_the_round_trip(tmp_path):
    train = design_shaper(ShaperKind.ZVD, P).train
    dataset = generate_synthetic(P, Excitation("step", 1.0, train=train), 3.0, 100.0, 0.0, 0)
    path = tmp_path / "shaped.csv"
    write_dataset(dataset, path)
    loaded = load_dataset(path)

    np.testing.assert_array_equal(loaded.excitation.train.amplitudes, train.amplitudes)
    np.testing.assert_array_equal(loaded.excitation.train.times, train.times)
    np.testing.assert_array_equal(loaded.command().samples, dataset.command().samples)


def test_dt_inferred_from_timestamps(tmp_path):
    path = write_text(tmp_path / "plain.csv", "time_s,displacement_mm\n0,0\n0.01,1\n0.02,2\n")
    dataset = load_dataset(path)

    assert dataset.series.dt == pytest.approx(0.01)
    assert dataset.label == "plain"
    assert dataset.ground_truth is None
    assert dataset.excitation is None
    np.testing.assert_array_equal(dataset.command().samples, 0.0)


def test_gap_in_timestamps_names_the_first_bad_row(tmp_path):
    path = write_text(
        tmp_path / "gap.csv",
        "# rate_hz=100\ntime_s,displacement_mm\n0,0\n0.01,1\n0.03,2\n0.04,3\n",
    )
    with pytest.raises(NonuniformTimestampsError) as info:
        load_dataset(path)
    assert info.value.row == 5


def test_non_numeric_cell_names_the_line(tmp_path):
    path = write_text(
        tmp_path / "text.csv", "time_s,displacement_mm\n0,0\n0.01,abc\n0.02,2\n"
    )
    with pytest.raises(DatasetFormatError, match="Line 3"):
        load_dataset(path)


@pytest.mark.parametrize(
    "text",
    [
        "",
        "# rate_hz=100\n",
        "# rate_hz=100\ntime_s,displacement_mm\n",
        "time,displacement\n0,0\n",
        "# rate_hz\ntime_s,displacement_mm\n0,0\n",
        "# rate_hz=fast\ntime_s,displacement_mm\n0,0\n",
        "time_s,displacement_mm\n0,0\n",
    ],
)
def test_malformed_files(tmp_path, text):
    path = write_text(tmp_path / "bad.csv", text)
    with pytest.raises(DatasetFormatError):
        load_dataset(path)


def test_missing_file_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path / "missing.csv")


def test_noiseless_synthetic_equals_simulation():
    dataset = generate_synthetic(P, Excitation("step", 1.0), 2.0, 200.0, 0.0, 9)
    command = TimeSeries(0.0, 1.0 / 200.0, np.ones(400))

    np.testing.assert_array_equal(
        dataset.series.samples, simulate_response(P, command).samples
    )
    assert dataset.ground_truth == P


def test_same_seed_gives_identical_data():
    a = generate_synthetic(P, Excitation("step", 1.0), 2.0, 100.0, 0.1, 123)
    b = generate_synthetic(P, Excitation("step", 1.0), 2.0, 100.0, 0.1, 123)
    c = generate_synthetic(P, Excitation("step", 1.0), 2.0, 100.0, 0.1, 124)

    np.testing.assert_array_equal(a.series.samples, b.series.samples)
    assert not np.array_equal(a.series.samples, c.series.samples)


def test_noise_has_the_requested_spread():
    clean = generate_synthetic(P, Excitation("step", 1.0), 10.0, 1000.0, 0.0, 1)
    noisy = generate_synthetic(P, Excitation("step", 1.0), 10.0, 1000.0, 0.5, 1)

    residual = noisy.series.samples - clean.series.samples
    assert residual.size == 10_000
    assert np.std(residual, ddof=1) == pytest.approx(0.5, rel=0.1)


@pytest.mark.parametrize(
    "duration, rate, noise",
    [(0.0, 100.0, 0.0), (1.0, 0.0, 0.0), (1.0, 1500.0, 0.0), (1.0, 100.0, -0.1)],
)
def test_invalid_generation_arguments(duration, rate, noise):
    with pytest.raises(ParameterError):
        generate_synthetic(P, Excitation("step", 1.0), duration, rate, noise, 0)


def test_excitation_commands():
    pulse = Excitation("pulse", 2.0, 0.045).to_command(10, 0.0, 0.01)
    np.testing.assert_array_equal(pulse.samples, [2.0] * 5 + [0.0] * 5)

    free = Excitation("free", 3.0).to_command(4, 0.0, 0.01)
    np.testing.assert_array_equal(free.samples, 0.0)

    with pytest.raises(ParameterError):
        Excitation("ramp")


def test_find_datasets_expands_directories(tmp_path):
    (tmp_path / "b").mkdir()
    for name in ("a.csv", "b/c.csv", "b/convergence_a.csv", "notes.txt"):
        write_text(tmp_path / name, "time_s,displacement_mm\n0,0\n0.01,0\n")

    found = find_datasets(tmp_path, tmp_path / "a.csv")

    assert found == [tmp_path / "a.csv", tmp_path / "b" / "c.csv"]
    with pytest.raises(FileNotFoundError):
        find_datasets(tmp_path / "nowhere")
