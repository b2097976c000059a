import numpy as np
import pytest

from common.errors import ParameterError
from data_io import derived_seed, make_trial_splits, splitmix64, substream


def test_splitmix64_reference_value():
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_substreams_are_independent_and_reproducible():
    a = substream(7, 0).normal(size=5)
    b = substream(7, 0).normal(size=5)
    c = substream(7, 1).normal(size=5)

    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_default_protocol_shape():
    splits = make_trial_splits(2000, seed=3)

    assert len(splits) == 10
    for trial, split in enumerate(splits):
        assert split.trial_index == trial
        assert split.sample_indices.size == 400
        assert split.train_indices.size == 360
        assert split.test_indices.size == 40
        assert np.all(np.diff(split.sample_indices) > 0)
        assert split.sample_indices.min() >= 0
        assert split.sample_indices.max() < 2000

        train, test = set(split.train_indices), set(split.test_indices)
        assert not train & test
        assert train | test == set(range(400))
        np.testing.assert_array_equal(
            split.train_samples, split.sample_indices[split.train_indices]
        )


def test_trials_draw_different_samples():
    splits = make_trial_splits(2000, seed=0)
    first = splits[0].train_samples

    assert any(not np.array_equal(first, split.train_samples) for split in splits[1:])


def test_splits_are_deterministic_per_seed():
    a = make_trial_splits(1000, seed=11)
    b = make_trial_splits(1000, seed=11)
    c = make_trial_splits(1000, seed=12)

    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.sample_indices, y.sample_indices)
        np.testing.assert_array_equal(x.train_indices, y.train_indices)
    assert not np.array_equal(a[0].sample_indices, c[0].sample_indices)


def test_derived_seeds_never_share_a_split():
    drawn = set()
    for dataset in range(5):
        seed = derived_seed(0, dataset)
        assert seed != derived_seed(0, dataset + 1)
        for split in make_trial_splits(1000, n_samples=50, n_trials=10, seed=seed):
            drawn.add(split.sample_indices.tobytes())

    assert len(drawn) == 50
    assert derived_seed(0, 0) == splitmix64(0)


def test_whole_dataset_can_be_drawn():
    split = make_trial_splits(400, n_trials=1)[0]
    np.testing.assert_array_equal(split.sample_indices, np.arange(400))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(dataset_size=100),
        dict(dataset_size=1000, n_samples=1),
        dict(dataset_size=1000, n_trials=0),
        dict(dataset_size=1000, train_fraction=1.0),
        dict(dataset_size=1000, n_samples=2, train_fraction=0.1),
    ],
)
def test_invalid_protocols(kwargs):
    with pytest.raises(ParameterError):
        make_trial_splits(**kwargs)
