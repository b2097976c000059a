from dataclasses import dataclass

import numpy as np
import pandas as pd

from common.errors import StatisticsError

METRICS = ("max_err", "rmse", "mean_err")


@dataclass(frozen=True)
class MetricsTriple:
    max_err: float
    rmse: float
    mean_err: float

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in METRICS}


@dataclass(frozen=True)
class AggregatedMetric:
    mean: float
    std: float

    def format(self, decimals: int = 2) -> str:
        return f"{self.mean:.{decimals}f}±{self.std:.{decimals}f}"

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std}


def compute_metrics(reference, estimate) -> MetricsTriple:
    """MAX, RMSE and MEAN of the pointwise error between two sequences."""
    reference = np.asarray(reference, dtype=float).ravel()
    estimate = np.asarray(estimate, dtype=float).ravel()
    if reference.size != estimate.size:
        raise StatisticsError(
            f"Length mismatch: {reference.size} reference vs {estimate.size} estimate."
        )
    if reference.size == 0:
        raise StatisticsError("Cannot compute metrics of empty sequences.")

    error = np.abs(reference - estimate)
    return MetricsTriple(
        max_err=float(np.max(error)),
        rmse=float(np.sqrt(np.mean(error**2))),
        mean_err=float(np.mean(error)),
    )


def aggregate_trials(per_trial) -> dict:
    """
    Mean and sample standard deviation (n - 1) of every metric across trials.

    :return: {metric name: AggregatedMetric}
    """
    per_trial = list(per_trial)
    if len(per_trial) < 2:
        raise StatisticsError(
            f"Aggregation needs at least 2 trials, got {len(per_trial)}."
        )

    values = np.array([[getattr(m, name) for name in METRICS] for m in per_trial])
    # column-wise sort makes the result independent of trial order
    df = pd.DataFrame(np.sort(values, axis=0), columns=list(METRICS))
    means = df.mean()
    stds = df.std(ddof=1)

    return {
        name: AggregatedMetric(float(means[name]), float(stds[name])) for name in METRICS
    }
