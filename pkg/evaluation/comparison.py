"""
Comparative evaluation of identification + shaping pipelines.

For every (method, dataset, trial) the method identifies the plant on the
trial's training measurements, designs its shaper, and the reference plant
is driven with the shaped evaluation command. The resulting trajectory is
scored on the trial's test samples against the ideal vibration-free
trajectory: the reference plant's response to the same command shaped by a
ZVD shaper designed at the reference parameters.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from common.errors import FilterDivergenceError, ParameterError, StatisticsError
from common.fileio import atomic_output
from data_io import Dataset, Excitation, derived_seed, make_trial_splits
from dynamics import ImpulseTrain, SecondOrderParams, TimeSeries, simulate_response
from shapers import ShaperKind, design_shaper, shape_command
from ukf_ident import (
    FixedIdentifier,
    GridSearchIdentifier,
    ParameterIdentifier,
    UkfConfig,
    UkfIdentifier,
)

from .metrics import METRICS, MetricsTriple, aggregate_trials, compute_metrics
from .wilcoxon import WilcoxonResult, wilcoxon_signed_rank

logger = logging.getLogger(__name__)

METHOD_NAMES = ("uzs", "fixed-zvd", "grid-zvd", "exact-zvd", "unshaped")


@dataclass(frozen=True)
class ProtocolConfig:
    n_samples: int = 400
    n_trials: int = 10
    train_fraction: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise ParameterError("n_samples must be an integer >= 2.")
        if int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise ParameterError("n_trials must be an integer >= 1.")
        if not 0 < self.train_fraction < 1:
            raise ParameterError("train_fraction must lie in (0, 1).")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ParameterError("seed must be a non-negative integer.")

    def to_dict(self) -> dict:
        return {
            "n_samples": int(self.n_samples),
            "n_trials": int(self.n_trials),
            "train_fraction": float(self.train_fraction),
            "seed": int(self.seed),
        }


@dataclass(frozen=True, eq=False)
class MethodPipeline:
    name: str
    identifier: ParameterIdentifier
    kind: ShaperKind = ShaperKind.ZVD

    def train_for(self, params: SecondOrderParams) -> ImpulseTrain:
        if self.kind is None:
            return ImpulseTrain.identity()
        return design_shaper(self.kind, params).train


def build_methods(names, config: dict, mistune=None, guess=None, ukf_overrides=None) -> list:
    """
    Pipelines for the registered method names.

    :param config: the merged config.yaml contents
    :param mistune: relative frequency error of the fixed ZVD baseline
    :param guess: initial (omega_n, zeta) of the UKF; None seeds it from a grid
    """
    mistune = config["protocol"]["mistune"] if mistune is None else mistune
    if not -1 < mistune:
        raise ParameterError("mistune must be > -1.")

    methods = []
    for name in names:
        if name == "uzs":
            cfg = UkfConfig.from_config(config["ukf"], **(ukf_overrides or {}))
            identifier = UkfIdentifier(cfg, guess)
            methods.append(MethodPipeline(name, identifier, ShaperKind.ZVD))
        elif name == "fixed-zvd":
            identifier = FixedIdentifier(omega_factor=1.0 + mistune)
            methods.append(MethodPipeline(name, identifier, ShaperKind.ZVD))
        elif name == "grid-zvd":
            identifier = GridSearchIdentifier.from_config(config["grid"])
            methods.append(MethodPipeline(name, identifier, ShaperKind.ZVD))
        elif name == "exact-zvd":
            methods.append(MethodPipeline(name, FixedIdentifier(), ShaperKind.ZVD))
        elif name == "unshaped":
            methods.append(MethodPipeline(name, FixedIdentifier(), None))
        else:
            raise ParameterError(
                f"Unknown method '{name}'. Choose from {', '.join(METHOD_NAMES)}."
            )

    return methods


def evaluation_command(dataset: Dataset) -> TimeSeries:
    """The dataset's unshaped excitation; a unit step for free-vibration traces."""
    excitation = dataset.excitation
    if excitation is None or excitation.kind == "free":
        excitation = Excitation("step", 1.0)
    series = dataset.series

    return excitation.base_command(len(series), series.t0, series.dt)


def shaped_response(
    reference: SecondOrderParams, command: TimeSeries, train: ImpulseTrain
) -> np.ndarray:
    shaped = shape_command(command, train).truncate(len(command))
    return simulate_response(reference, shaped).samples


@dataclass
class TrialOutcome:
    method: str
    dataset: str
    trial_index: int
    metrics: MetricsTriple = None
    params: SecondOrderParams = None
    errors: list = field(default_factory=list)
    stop_reason: str = None
    failure: str = None
    response: np.ndarray = None

    @property
    def failed(self) -> bool:
        return self.failure is not None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "dataset": self.dataset,
            "trial": self.trial_index,
            "metrics": None if self.metrics is None else self.metrics.to_dict(),
            "params": None if self.params is None else self.params.to_dict(),
            "epochs": len(self.errors),
            "stop_reason": self.stop_reason,
            "failure": self.failure,
        }


def _run_trial(method, dataset, reference, split, command, ideal, keep_response):
    outcome = TrialOutcome(method.name, dataset.label, split.trial_index)
    try:
        result = method.identifier.identify(
            dataset.series,
            command=dataset.command(),
            train_indices=split.train_samples,
            reference=reference,
        )
        response = shaped_response(reference, command, method.train_for(result.params))
    except FilterDivergenceError as e:
        outcome.failure = str(e)
        return outcome

    test = split.test_samples
    outcome.metrics = compute_metrics(ideal[test], response[test])
    outcome.params = result.params
    outcome.errors = [float(e) for e in result.errors if not math.isnan(e)]
    outcome.stop_reason = result.stop_reason
    if keep_response:
        outcome.response = response

    return outcome


@dataclass
class EvalReport:
    methods: list
    datasets: list
    protocol: ProtocolConfig
    outcomes: list
    references: dict
    aggregated: dict
    compare: tuple
    wilcoxon: WilcoxonResult = None
    wilcoxon_error: str = None
    warnings: list = field(default_factory=list)
    convergence: dict = field(default_factory=dict)
    positions: dict = field(default_factory=dict)

    def per_trial(self, method: str, dataset: str) -> list:
        return [
            o.metrics
            for o in self.outcomes
            if o.method == method and o.dataset == dataset and not o.failed
        ]

    def failures(self) -> list:
        return [o for o in self.outcomes if o.failed]

    def to_dict(self) -> dict:
        aggregated = {}
        for dataset, by_method in self.aggregated.items():
            aggregated[dataset] = {}
            for method, agg in by_method.items():
                if agg is None:
                    aggregated[dataset][method] = None
                    continue
                aggregated[dataset][method] = {
                    name: dict(agg[name].to_dict(), formatted=agg[name].format())
                    for name in METRICS
                }

        return {
            "methods": list(self.methods),
            "datasets": list(self.datasets),
            "protocol": self.protocol.to_dict(),
            "references": {k: v.to_dict() for k, v in self.references.items()},
            "trials": [o.to_dict() for o in self.outcomes],
            "failed_trials": len(self.failures()),
            "aggregated": aggregated,
            "compare": {"proposed": self.compare[0], "baseline": self.compare[1]},
            "wilcoxon": None if self.wilcoxon is None else self.wilcoxon.to_dict(),
            "wilcoxon_error": self.wilcoxon_error,
            "warnings": list(self.warnings),
        }

    def write_curves(self, directory):
        """convergence_<dataset>.csv and positions_<dataset>.csv for trial 0."""
        written = []
        for kind, frames in (("convergence", self.convergence), ("positions", self.positions)):
            for dataset, frame in frames.items():
                path = Path(directory) / f"{kind}_{dataset}.csv"
                with atomic_output(path) as tmp_path:
                    frame.to_csv(
                        tmp_path, index=False, float_format="%.17g", lineterminator="\n"
                    )
                written.append(path)

        return written


def reference_params(dataset: Dataset, grid: GridSearchIdentifier) -> SecondOrderParams:
    """Ground truth when known, otherwise a grid fit to the whole trace."""
    if dataset.ground_truth is not None:
        return dataset.ground_truth
    logger.info("No ground truth for %s, fitting the reference plant.", dataset.label)
    return grid.identify(dataset.series, command=dataset.command()).params


def _resolve_compare(methods, compare):
    names = [m.name for m in methods]
    if compare is None:
        compare = (names[0], names[1]) if len(names) > 1 else (names[0], names[0])
    compare = tuple(compare)
    if len(compare) != 2 or any(c not in names for c in compare):
        raise ParameterError(
            f"compare must name two evaluated methods, got {compare}."
        )
    return compare


def _paired_rmse(outcomes, compare):
    """baseline - proposed RMSE over (dataset, trial) pairs where both succeeded."""
    by_key = {(o.method, o.dataset, o.trial_index): o for o in outcomes if not o.failed}
    proposed, baseline = compare
    a, b = [], []
    for (method, dataset, trial), outcome in by_key.items():
        if method != proposed or (baseline, dataset, trial) not in by_key:
            continue
        a.append(by_key[(baseline, dataset, trial)].metrics.rmse)
        b.append(outcome.metrics.rmse)
    return np.array(a), np.array(b)


def run_comparison(
    methods,
    datasets,
    protocol: ProtocolConfig = None,
    compare=None,
    jobs: int = 1,
    grid: GridSearchIdentifier = None,
) -> EvalReport:
    """
    Evaluate every method on every dataset under the trial protocol.

    :param compare: (proposed, baseline) method names for the Wilcoxon test
        on paired RMSEs; defaults to the first two methods
    :param jobs: number of parallel trial workers
    """
    if not methods:
        raise ParameterError("run_comparison needs at least one method.")
    if not datasets:
        raise ParameterError("run_comparison needs at least one dataset.")
    if len({d.label for d in datasets}) != len(datasets):
        raise ParameterError("Dataset labels must be unique.")
    protocol = protocol or ProtocolConfig()
    grid = grid or GridSearchIdentifier()
    compare = _resolve_compare(methods, compare)

    references = {}
    tasks = []
    contexts = {}
    for dataset_index, dataset in enumerate(datasets):
        reference = reference_params(dataset, grid)
        references[dataset.label] = reference
        command = evaluation_command(dataset)
        ideal = shaped_response(
            reference, command, design_shaper(ShaperKind.ZVD, reference).train
        )
        contexts[dataset.label] = (command, ideal)
        splits = make_trial_splits(
            len(dataset),
            protocol.n_samples,
            protocol.n_trials,
            protocol.train_fraction,
            derived_seed(protocol.seed, dataset_index),
        )
        for split in splits:
            for method in methods:
                tasks.append(
                    (method, dataset, reference, split, command, ideal, split.trial_index == 0)
                )

    if jobs == 1:
        outcomes = []
        pbar = tqdm(tasks, disable=not logger.isEnabledFor(logging.INFO))
        for task in pbar:
            pbar.set_description(
                f"Evaluating {task[0].name} on {task[1].label}, trial {task[3].trial_index}"
            )
            outcomes.append(_run_trial(*task))
    else:
        outcomes = Parallel(n_jobs=jobs)(delayed(_run_trial)(*task) for task in tasks)

    warnings = []
    for outcome in outcomes:
        if outcome.failed:
            message = (
                f"Trial {outcome.trial_index} of {outcome.method} on {outcome.dataset} "
                f"failed: {outcome.failure}"
            )
            logger.warning(message)
            warnings.append(message)

    aggregated = {}
    for dataset in datasets:
        aggregated[dataset.label] = {}
        for method in methods:
            per_trial = [
                o.metrics
                for o in outcomes
                if o.method == method.name and o.dataset == dataset.label and not o.failed
            ]
            try:
                aggregated[dataset.label][method.name] = aggregate_trials(per_trial)
            except StatisticsError as e:
                aggregated[dataset.label][method.name] = None
                warnings.append(f"{method.name} on {dataset.label}: {e}")

    wilcoxon = None
    wilcoxon_error = None
    baseline_rmse, proposed_rmse = _paired_rmse(outcomes, compare)
    try:
        wilcoxon = wilcoxon_signed_rank(baseline_rmse, proposed_rmse)
    except StatisticsError as e:
        wilcoxon_error = str(e)
        logger.warning("Wilcoxon test %s vs %s: %s", compare[0], compare[1], e)

    report = EvalReport(
        methods=[m.name for m in methods],
        datasets=[d.label for d in datasets],
        protocol=protocol,
        outcomes=outcomes,
        references=references,
        aggregated=aggregated,
        compare=compare,
        wilcoxon=wilcoxon,
        wilcoxon_error=wilcoxon_error,
        warnings=warnings,
    )
    _collect_curves(report, datasets, contexts)

    return report


def _collect_curves(report, datasets, contexts):
    first = [o for o in report.outcomes if o.trial_index == 0 and not o.failed]
    for dataset in datasets:
        label = dataset.label
        command, ideal = contexts[label]
        outcomes = [o for o in first if o.dataset == label]

        epochs = max([len(o.errors) for o in outcomes] + [0])
        convergence = pd.DataFrame({"epoch": np.arange(1, epochs + 1)})
        for o in outcomes:
            convergence[o.method] = pd.Series(o.errors, dtype=float)
        report.convergence[label] = convergence

        positions = pd.DataFrame({"time_s": command.times, "ideal": ideal})
        for o in outcomes:
            positions[o.method] = o.response
        report.positions[label] = positions
