import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd
from tqdm import tqdm

from common import (
    DataError,
    FilterDivergenceError,
    ParameterError,
    StatisticsError,
    UsageError,
    atomic_output,
    atomic_write_text,
    load_config,
    setup_logging,
)
from data_io import Excitation, find_datasets, generate_synthetic, load_dataset, write_dataset
from dynamics import (
    ImpulseTrain,
    SecondOrderParams,
    TimeSeries,
    insensitivity_bandwidth,
    sensitivity_curve,
)
from evaluation import (
    METHOD_NAMES,
    ProtocolConfig,
    ResultPlotter,
    build_methods,
    run_comparison,
)
from report import ReportTemplate
from shapers import ShaperKind, design_shaper, shape_command
from ukf_ident import GridSearchIdentifier, UkfConfig, UkfIdentifier

logger = logging.getLogger("shaperlab")

SEED_ENV = "SHAPERLAB_SEED"
DEFAULT_CONFIG_PATH = "config.yaml"
HISTORY_COLUMNS = ["epoch", "error", "omega_n", "zeta", "clamped"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGENCE = 3


class ShaperLab(ReportTemplate, ResultPlotter):
    """
    Ties the library together: every subcommand reads its inputs, calls the
    library operations and writes CSV/JSON (and optionally SVG) outputs.
    """

    def __init__(self, config: dict):
        self.config = config
        ReportTemplate.__init__(
            self,
            config["report"]["language"],
            significant_digits=config["report"]["significant_digits"],
            metric_names=config["metric_names"],
            method_names=config["method_names"],
        )

    @staticmethod
    def _write_json(data, path):
        atomic_write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")

    @staticmethod
    def _write_frame(frame, path):
        with atomic_output(path) as tmp_path:
            frame.to_csv(tmp_path, index=False, float_format="%.17g", lineterminator="\n")

    def simulate(self, args):
        params = _params_from_args(args)
        train = None
        if args.shaper != "none":
            train = design_shaper(ShaperKind.parse(args.shaper), params).train
        excitation = Excitation(args.excitation, args.amplitude, args.pulse_width, train)

        meta = {"label": args.label or Path(args.out).stem}
        if args.payload_kg is not None:
            meta["payload_kg"] = args.payload_kg
        if args.beam_m is not None:
            meta["beam_m"] = args.beam_m

        dataset = generate_synthetic(
            params,
            excitation,
            args.duration,
            args.rate,
            args.noise,
            _resolve_seed(args.seed),
            meta=meta,
        )
        write_dataset(dataset, args.out)
        logger.info("Wrote %d samples to %s", len(dataset), args.out)

        if args.plot:
            series = dataset.series
            self.plot_response(
                series.times, series.samples, dataset.command().samples, save_path=args.plot
            )

    def identify(self, args):
        dataset = load_dataset(args.input)
        guess = _guess_from_args(args)

        if args.method == "grid":
            identifier = GridSearchIdentifier.from_config(self.config["grid"])
        else:
            cfg = UkfConfig.from_config(
                self.config["ukf"],
                alpha=args.alpha,
                beta=args.beta,
                kappa=args.kappa,
                sensor_sigma=args.sensor_sigma,
                max_epochs=args.max_epochs,
                tol=args.tol,
            )
            identifier = UkfIdentifier(cfg, guess)

        result = identifier.identify(dataset.series, command=dataset.command())
        history = [
            {
                "epoch": r.epoch,
                "error": r.error,
                "omega_n": r.omega_n,
                "zeta": r.zeta,
                "clamped": r.clamped,
            }
            for r in result.history
        ]
        output = {
            "dataset": dataset.label,
            "method": args.method,
            "params": result.params.to_dict(),
            "epochs": result.epochs,
            "stop_reason": result.stop_reason,
            "initial_error": result.initial_error,
            "history": history,
            "warnings": result.warnings,
        }
        if dataset.ground_truth is not None:
            output["ground_truth"] = dataset.ground_truth.to_dict()
        self._write_json(output, args.out)
        logger.info(
            "omega_n=%.6g rad/s, zeta=%.6g after %d epochs (%s)",
            result.params.omega_n,
            result.params.zeta,
            result.epochs,
            result.stop_reason,
        )

        if args.history_csv:
            self._write_frame(
                pd.DataFrame(history, columns=HISTORY_COLUMNS), args.history_csv
            )
        if args.plot:
            self.plot_convergence(result.errors, label="Training error (mm)", save_path=args.plot)

    def shape(self, args):
        params = _params_from_args(args)
        kind = ShaperKind.parse(args.kind)
        design = design_shaper(kind, params)

        if args.command_in:
            dataset = load_dataset(args.command_in)
            command = dataset.series
        else:
            n = int(round(args.duration * args.rate))
            if n < 1 or args.rate <= 0:
                raise ParameterError("--duration and --rate must give at least one sample.")
            command = TimeSeries(0.0, 1.0 / args.rate, np.full(n, args.amplitude))

        shaped = shape_command(command, design.train)
        self._write_frame(
            pd.DataFrame({"time_s": shaped.times, "command_mm": shaped.samples}), args.out
        )
        if args.train_out:
            self._write_json(design.to_dict(), args.train_out)
        logger.info("%s impulses: %s", kind.value.upper(), design.train.impulses)

    def sensitivity(self, args):
        params = _params_from_args(args)
        kinds = [ShaperKind.parse(k) for k in _split_list(args.kinds, "--kinds")]

        curves = {}
        frame = None
        for kind in kinds:
            train = design_shaper(kind, params).train
            curve = sensitivity_curve(train, params, (args.ratio_lo, args.ratio_hi), args.points)
            curves[kind.value.upper()] = curve
            if frame is None:
                frame = pd.DataFrame({"ratio": curve[:, 0]})
            frame[f"v_{kind.value}"] = curve[:, 1]
            logger.info(
                "%s 5%% insensitivity bandwidth: %.4f",
                kind.value.upper(),
                insensitivity_bandwidth(train, params),
            )
        unshaped = sensitivity_curve(
            ImpulseTrain.identity(), params, (args.ratio_lo, args.ratio_hi), args.points
        )
        frame["v_unshaped"] = unshaped[:, 1]

        self._write_frame(frame, args.out)
        if args.plot:
            self.plot_sensitivity(curves, save_path=args.plot)

    def evaluate(self, args):
        protocol_section = self.config["protocol"]
        protocol = ProtocolConfig(
            n_samples=_pick(args.samples, protocol_section["n_samples"]),
            n_trials=_pick(args.trials, protocol_section["n_trials"]),
            train_fraction=_pick(args.train_fraction, protocol_section["train_fraction"]),
            seed=_resolve_seed(args.seed),
        )
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1.")

        paths = find_datasets(*_split_list(args.datasets, "--datasets"))
        if not paths:
            raise DataError(f"No dataset files found in {args.datasets}.")
        datasets = []
        pbar = tqdm(paths, disable=not logger.isEnabledFor(logging.INFO))
        for path in pbar:
            pbar.set_description(f"Loading {path.name}")
            datasets.append(load_dataset(path))

        names = _split_list(args.methods, "--methods")
        compare = _split_list(args.compare, "--compare") if args.compare else None
        if compare is not None and len(compare) != 2:
            raise UsageError("--compare takes exactly two methods, e.g. --compare uzs,fixed-zvd.")

        methods = build_methods(
            names, self.config, mistune=args.mistune, guess=_guess_from_args(args)
        )
        report = run_comparison(
            methods,
            datasets,
            protocol,
            compare=compare,
            jobs=args.jobs,
            grid=GridSearchIdentifier.from_config(self.config["grid"]),
        )

        self._write_json(report.to_dict(), args.out)
        text = self.text_table(report)
        if args.table:
            atomic_write_text(args.table, text)
        else:
            logger.info("\n%s", text)
        if args.latex:
            atomic_write_text(args.latex, self.latex_table(report))
        if args.curves_dir:
            report.write_curves(Path(args.curves_dir))
        if args.plot_dir:
            plot_dir = Path(args.plot_dir)
            plot_dir.mkdir(parents=True, exist_ok=True)
            for dataset in report.datasets:
                self.plot_convergence_table(
                    report.convergence[dataset],
                    save_path=plot_dir / f"convergence_{dataset}.svg",
                )
                self.plot_positions(
                    report.positions[dataset],
                    save_path=plot_dir / f"positions_{dataset}.svg",
                )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message} (see '{self.prog} --help')")


def _split_list(value, flag):
    items = [item.strip() for item in value.split(",") if item.strip()]
    if not items:
        raise UsageError(f"{flag} needs a comma-separated list.")
    return items


def _pick(value, default):
    return default if value is None else value


def _resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        raise UsageError(f"--seed is required (or set {SEED_ENV}).")
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got '{env}'.")


def _read_params_file(path):
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise DataError(f"{path}: not valid JSON ({e}).")
    if not isinstance(data, dict):
        raise DataError(f"{path}: expected a JSON object.")
    data = data.get("params", data)
    try:
        return SecondOrderParams(data["omega_n"], data["zeta"])
    except (KeyError, TypeError):
        raise DataError(f"{path}: expected 'omega_n' and 'zeta' keys.")


def _params_from_args(args):
    given = [args.omega_n is not None, args.zeta is not None]
    if getattr(args, "params", None):
        if any(given):
            raise UsageError("--params conflicts with --omega-n/--zeta; use one or the other.")
        return _read_params_file(args.params)
    if not all(given):
        raise UsageError("Give both --omega-n and --zeta (or --params FILE).")
    return SecondOrderParams(args.omega_n, args.zeta)


def _guess_from_args(args):
    given = [args.guess_omega is not None, args.guess_zeta is not None]
    if not any(given):
        return None
    if not all(given):
        raise UsageError("Give both --guess-omega and --guess-zeta, or neither.")
    return SecondOrderParams(args.guess_omega, args.guess_zeta)


def _add_plant_flags(parser, allow_file=False):
    if allow_file:
        parser.add_argument(
            "--params", type=str, help="JSON file with omega_n and zeta (e.g. identify output)."
        )
    parser.add_argument("--omega-n", type=float, help="Natural frequency in rad/s.")
    parser.add_argument("--zeta", type=float, help="Damping ratio, 0 <= zeta < 1.")


def build_parser():
    parser = _Parser(
        prog="shaperlab",
        description="Input shaping with UKF plant identification.",
    )
    parser.add_argument(
        "--config",
        type=str,
        default=None,
        help=f"YAML config file (default: {DEFAULT_CONFIG_PATH} if present).",
    )
    parser.add_argument(
        "--verbose", action="count", default=0, help="More log output; repeat for debug."
    )
    parser.add_argument("--quiet", action="store_true", help="Only log errors.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="Simulate the plant and write a dataset CSV.")
    _add_plant_flags(p)
    p.add_argument(
        "--excitation",
        choices=Excitation.KINDS,
        default="step",
        help="Command applied to the plant (default: step).",
    )
    p.add_argument("--amplitude", type=float, default=1.0, help="Command amplitude in mm.")
    p.add_argument("--pulse-width", type=float, default=0.5, help="Pulse width in s.")
    p.add_argument(
        "--shaper",
        choices=["none"] + [k.value for k in ShaperKind],
        default="none",
        help="Shaper designed at the true parameters and applied to the command.",
    )
    p.add_argument("--duration", type=float, required=True, help="Duration in s.")
    p.add_argument("--rate", type=float, required=True, help="Sample rate in Hz, at most 1000.")
    p.add_argument("--noise", type=float, default=0.0, help="Sensor noise std in mm.")
    p.add_argument("--seed", type=int, help=f"Master seed (fallback: {SEED_ENV}).")
    p.add_argument("--payload-kg", type=float, help="Payload mass in kg (metadata).")
    p.add_argument("--beam-m", type=float, help="Beam length in m (metadata).")
    p.add_argument("--label", type=str, help="Dataset label (default: output file stem).")
    p.add_argument("--out", type=str, required=True, help="Output dataset CSV.")
    p.add_argument("--plot", type=str, help="Optional SVG of the response.")

    p = sub.add_parser("identify", help="Identify omega_n and zeta from a dataset.")
    p.add_argument("--in", dest="input", type=str, required=True, help="Dataset CSV.")
    p.add_argument(
        "--method",
        choices=["ukf", "grid"],
        default="ukf",
        help="Identification method (default: ukf).",
    )
    p.add_argument("--guess-omega", type=float, help="Initial omega_n in rad/s.")
    p.add_argument("--guess-zeta", type=float, help="Initial zeta.")
    p.add_argument("--alpha", type=float, help="UKF sigma spread, 0 < alpha <= 1.")
    p.add_argument("--beta", type=float, help="UKF prior distribution parameter.")
    p.add_argument("--kappa", type=float, help="UKF secondary scaling.")
    p.add_argument("--sensor-sigma", type=float, help="Sensor noise std in mm.")
    p.add_argument("--max-epochs", type=int, help="Maximum number of epochs.")
    p.add_argument("--tol", type=float, help="Termination tolerance in mm.")
    p.add_argument("--out", type=str, required=True, help="Output JSON.")
    p.add_argument("--history-csv", type=str, help="Optional per-epoch history CSV.")
    p.add_argument("--plot", type=str, help="Optional SVG of the convergence curve.")

    p = sub.add_parser("shape", help="Shape a command with a ZV/ZVD/ZVDD shaper.")
    _add_plant_flags(p, allow_file=True)
    p.add_argument(
        "--kind",
        choices=[k.value for k in ShaperKind],
        default="zvd",
        help="Shaper type (default: zvd).",
    )
    p.add_argument("--amplitude", type=float, default=1.0, help="Step amplitude in mm.")
    p.add_argument("--duration", type=float, default=5.0, help="Step duration in s.")
    p.add_argument("--rate", type=float, default=100.0, help="Sample rate in Hz.")
    p.add_argument(
        "--command-in", type=str, help="Dataset-format CSV whose samples are the command."
    )
    p.add_argument("--out", type=str, required=True, help="Output CSV (time_s, command_mm).")
    p.add_argument("--train-out", type=str, help="Optional JSON of the shaper design.")

    p = sub.add_parser("sensitivity", help="Residual vibration over frequency ratios.")
    _add_plant_flags(p, allow_file=True)
    p.add_argument("--kinds", type=str, default="zv,zvd,zvdd", help="Comma-separated shapers.")
    p.add_argument("--ratio-lo", type=float, default=0.5, help="Lowest omega/omega_n.")
    p.add_argument("--ratio-hi", type=float, default=1.5, help="Highest omega/omega_n.")
    p.add_argument("--points", type=int, default=201, help="Number of ratios.")
    p.add_argument("--out", type=str, required=True, help="Output CSV.")
    p.add_argument("--plot", type=str, help="Optional SVG of the curves.")

    p = sub.add_parser("evaluate", help="Run the trial protocol and write a report.")
    p.add_argument(
        "--datasets", type=str, required=True, help="Comma-separated CSV files or directories."
    )
    p.add_argument(
        "--methods",
        type=str,
        default="uzs,fixed-zvd",
        help=f"Comma-separated methods from {', '.join(METHOD_NAMES)}.",
    )
    p.add_argument("--trials", type=int, help="Trials per dataset.")
    p.add_argument("--samples", type=int, help="Samples drawn per trial.")
    p.add_argument("--train-fraction", type=float, help="Share of samples used for training.")
    p.add_argument("--seed", type=int, help=f"Master seed (fallback: {SEED_ENV}).")
    p.add_argument("--jobs", type=int, default=1, help="Parallel trial workers.")
    p.add_argument(
        "--mistune", type=float, help="Relative omega_n error of the fixed ZVD baseline."
    )
    p.add_argument("--guess-omega", type=float, help="Initial UKF omega_n in rad/s.")
    p.add_argument("--guess-zeta", type=float, help="Initial UKF zeta.")
    p.add_argument("--compare", type=str, help="proposed,baseline for the Wilcoxon test.")
    p.add_argument("--out", type=str, required=True, help="Output report JSON.")
    p.add_argument("--table", type=str, help="Optional plain-text table.")
    p.add_argument("--latex", type=str, help="Optional LaTeX table.")
    p.add_argument("--curves-dir", type=str, help="Directory for convergence/position CSVs.")
    p.add_argument("--plot-dir", type=str, help="Directory for SVG plots.")

    return parser


def _exit_code(error):
    if isinstance(error, (UsageError, ParameterError)):
        return EXIT_USAGE
    if isinstance(error, FilterDivergenceError):
        return EXIT_DIVERGENCE
    return EXIT_DATA


def dispatch(argv=None) -> int:
    """Run one subcommand; returns the process exit status."""
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.quiet and args.verbose:
            raise UsageError("--quiet and --verbose exclude each other.")
        setup_logging(-1 if args.quiet else args.verbose)

        config_path = args.config
        if config_path is None:
            config_path = DEFAULT_CONFIG_PATH
        elif not Path(config_path).exists():
            raise FileNotFoundError(f"Config file not found: {config_path}")

        lab = ShaperLab(load_config(config_path))
        getattr(lab, args.command)(args)
    except (
        UsageError,
        ParameterError,
        DataError,
        StatisticsError,
        FilterDivergenceError,
        OSError,
    ) as e:
        logger.error("%s", e)
        return _exit_code(e)

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(dispatch())
