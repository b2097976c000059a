from .dataset import (  # noqa
    Dataset,
    Excitation,
    load_dataset,
    write_dataset,
)
from .dataset_search import DatasetSearch, find_datasets  # noqa
from .rng import derived_seed, splitmix64, substream  # noqa
from .synthetic import generate_synthetic  # noqa
from .trial_splits import TrialSplit, make_trial_splits  # noqa
