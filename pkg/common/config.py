import copy
from pathlib import Path

import yaml

DEFAULT_CONFIG = {
    "metric_names": {
        "max_err": "MAX",
        "rmse": "RMSE",
        "mean_err": "MEAN",
    },
    "method_names": {
        "uzs": "UZS",
        "fixed-zvd": "Fixed ZVD",
        "grid-zvd": "Grid ZVD",
        "exact-zvd": "Exact ZVD",
        "unshaped": "Unshaped",
    },
    "ukf": {
        "alpha": 0.1,
        "beta": 2.0,
        "kappa": 0.0,
        "process_noise": [1e-8, 1e-8, 1e-4, 1e-6],
        "sensor_sigma": 0.1,
        "max_epochs": 100,
        "tol": 1e-4,
        "initial_std_fraction_omega": 0.25,
        "initial_std_zeta": 0.05,
        "initial_std_velocity": 1.0,
    },
    "protocol": {
        "n_samples": 400,
        "n_trials": 10,
        "train_fraction": 0.9,
        "mistune": 0.2,
    },
    "grid": {
        "omega_range": [0.5, 100.0],
        "zeta_range": [0.0, 0.3],
        "n_omega": 60,
        "n_zeta": 31,
        "refinements": 3,
    },
    "report": {
        "language": "english",
        "significant_digits": 3,
    },
}


def _deep_merge(base: dict, override: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path=None) -> dict:
    """
    Load a YAML config and merge it over the built-in defaults. A missing
    file yields the defaults unchanged.
    """
    if path is None or not Path(path).exists():
        return copy.deepcopy(DEFAULT_CONFIG)

    with open(path, "r") as f:
        user_config = yaml.safe_load(f) or {}

    return _deep_merge(DEFAULT_CONFIG, user_config)
