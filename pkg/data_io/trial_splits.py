from dataclasses import dataclass

import numpy as np

from common.errors import ParameterError

from .rng import substream


@dataclass(frozen=True, eq=False)
class TrialSplit:
    """
    One trial of the evaluation protocol. ``sample_indices`` are the drawn
    dataset indices in ascending order; ``train_indices`` and
    ``test_indices`` are positions into ``sample_indices``.
    """

    trial_index: int
    sample_indices: np.ndarray
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int

    @property
    def train_samples(self) -> np.ndarray:
        """Dataset indices of the training measurements."""
        return self.sample_indices[self.train_indices]

    @property
    def test_samples(self) -> np.ndarray:
        return self.sample_indices[self.test_indices]


def make_trial_splits(
    dataset_size: int,
    n_samples: int = 400,
    n_trials: int = 10,
    train_fraction: float = 0.9,
    seed: int = 0,
) -> list:
    """
    Draw ``n_samples`` indices uniformly without replacement for every
    trial, each from its own sub-stream of ``seed``, and partition them
    into train and test parts.
    """
    if n_samples < 2:
        raise ParameterError("n_samples must be >= 2.")
    if n_samples > dataset_size:
        raise ParameterError(
            f"n_samples ({n_samples}) exceeds the dataset size ({dataset_size})."
        )
    if n_trials < 1:
        raise ParameterError("n_trials must be >= 1.")
    if not 0 < train_fraction < 1:
        raise ParameterError(f"train_fraction must lie in (0, 1), got {train_fraction}.")

    n_train = int(round(n_samples * train_fraction))
    if not 0 < n_train < n_samples:
        raise ParameterError(
            f"train_fraction {train_fraction} leaves an empty train or test part "
            f"of {n_samples} samples."
        )

    splits = []
    for trial in range(n_trials):
        rng = substream(seed, trial)
        drawn = np.sort(rng.choice(dataset_size, size=n_samples, replace=False))
        order = rng.permutation(n_samples)
        splits.append(
            TrialSplit(
                trial_index=trial,
                sample_indices=drawn,
                train_indices=np.sort(order[:n_train]),
                test_indices=np.sort(order[n_train:]),
                seed=int(seed),
            )
        )

    return splits
