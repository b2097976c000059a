"""
Displacement datasets in the self-describing CSV layout

    # rate_hz=100
    # dt_s=0.01
    # payload_kg=0.125
    # excitation=step
    time_s,displacement_mm
    0,0
    0.01,0.0031...

Comment lines carry ``key=value`` metadata, followed by one header row and
the two-column body. Floats are written with 17 significant digits so a
write/load cycle reproduces every sample bitwise.
"""
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from common.errors import (
    DatasetFormatError,
    NonuniformTimestampsError,
    ParameterError,
)
from common.fileio import atomic_output
from dynamics import ImpulseTrain, SecondOrderParams, TimeSeries
from shapers import shape_command

logger = logging.getLogger(__name__)

COLUMNS = ("time_s", "displacement_mm")
TIMESTAMP_TOLERANCE = 1e-6
FLOAT_FORMAT = "%.17g"

NUMERIC_KEYS = {
    "rate_hz",
    "dt_s",
    "payload_kg",
    "beam_m",
    "amplitude_mm",
    "pulse_s",
    "noise_mm",
    "initial_mm",
    "omega_n",
    "zeta",
}


@dataclass(frozen=True, eq=False)
class Excitation:
    """
    The command behind a trace: a step or a rectangular pulse of
    ``amplitude`` mm, or free vibration (zero command), optionally shaped
    by ``train``.
    """

    kind: str = "step"
    amplitude: float = 1.0
    pulse_width: float = 0.5
    train: ImpulseTrain = None

    KINDS = ("step", "pulse", "free")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ParameterError(
                f"Unknown excitation '{self.kind}'. Choose one of {', '.join(self.KINDS)}."
            )
        if not math.isfinite(self.amplitude):
            raise ParameterError("amplitude must be finite.")
        if self.kind == "pulse" and not self.pulse_width > 0:
            raise ParameterError("pulse_width must be > 0 s.")

    def base_command(self, n: int, t0: float, dt: float) -> TimeSeries:
        times = t0 + np.arange(n) * dt
        if self.kind == "step":
            samples = np.full(n, float(self.amplitude))
        elif self.kind == "pulse":
            samples = np.where(times - t0 < self.pulse_width, float(self.amplitude), 0.0)
        else:
            samples = np.zeros(n)

        return TimeSeries(t0, dt, samples)

    def to_command(self, n: int, t0: float = 0.0, dt: float = 0.01) -> TimeSeries:
        """n command samples, shaped by ``train`` when one is set."""
        command = self.base_command(n, t0, dt)
        if self.train is None or self.kind == "free":
            return command

        return shape_command(command, self.train).truncate(n)

    def to_meta(self) -> dict:
        meta = {"excitation": self.kind, "amplitude_mm": float(self.amplitude)}
        if self.kind == "pulse":
            meta["pulse_s"] = float(self.pulse_width)
        if self.train is not None:
            meta["shaper_impulses"] = ";".join(
                f"{FLOAT_FORMAT % a}@{FLOAT_FORMAT % t}" for a, t in self.train.impulses
            )
        return meta

    @classmethod
    def from_meta(cls, meta: dict):
        """The excitation recorded in ``meta``, or None if there is none."""
        if "excitation" not in meta:
            return None

        train = None
        if meta.get("shaper_impulses"):
            try:
                pairs = [
                    tuple(float(v) for v in item.split("@"))
                    for item in str(meta["shaper_impulses"]).split(";")
                ]
                train = ImpulseTrain.from_pairs(pairs)
            except (ValueError, TypeError) as e:
                raise DatasetFormatError(f"Malformed shaper_impulses metadata: {e}")

        return cls(
            kind=str(meta["excitation"]),
            amplitude=float(meta.get("amplitude_mm", 1.0)),
            pulse_width=float(meta.get("pulse_s", 0.5)),
            train=train,
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    series: TimeSeries
    meta: dict = field(default_factory=dict)
    ground_truth: SecondOrderParams = None

    @property
    def label(self) -> str:
        return str(self.meta.get("label", "dataset"))

    @property
    def excitation(self):
        return Excitation.from_meta(self.meta)

    def command(self) -> TimeSeries:
        """The command that produced the trace; zeros if none is recorded."""
        excitation = self.excitation
        if excitation is None:
            excitation = Excitation("free")

        return excitation.to_command(len(self.series), self.series.t0, self.series.dt)

    def __len__(self):
        return len(self.series)


def _format_meta_value(value):
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return str(value)


def write_dataset(dataset: Dataset, path):
    """Write ``dataset`` in the CSV layout, atomically."""
    series = dataset.series
    meta = {"rate_hz": 1.0 / series.dt, "dt_s": series.dt}
    meta.update(
        {k: v for k, v in dataset.meta.items() if k not in ("rate_hz", "dt_s")}
    )
    if dataset.ground_truth is not None:
        meta["omega_n"] = dataset.ground_truth.omega_n
        meta["zeta"] = dataset.ground_truth.zeta

    header = "".join(f"# {k}={_format_meta_value(v)}\n" for k, v in meta.items())
    body = pd.DataFrame({COLUMNS[0]: series.times, COLUMNS[1]: series.samples})

    with atomic_output(path) as tmp_path:
        with open(tmp_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(header)
            body.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def _parse_meta(lines):
    meta = {}
    for line_number, line in lines:
        content = line[1:].strip()
        if not content:
            continue
        key, sep, value = content.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise DatasetFormatError(
                f"Line {line_number}: malformed header '{line.strip()}', "
                f"expected '# key=value'."
            )
        if key in NUMERIC_KEYS:
            try:
                value = float(value)
            except ValueError:
                raise DatasetFormatError(
                    f"Line {line_number}: '{key}' must be numeric, got '{value}'."
                )
        meta[key] = value

    return meta


def _numeric_body(frame: pd.DataFrame, first_line: int) -> pd.DataFrame:
    for column in COLUMNS:
        values = frame[column]
        coerced = pd.to_numeric(values, errors="coerce")
        bad = coerced.isna() | ~np.isfinite(coerced.astype(float))
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise DatasetFormatError(
                f"Line {first_line + row}: non-numeric cell "
                f"{values.iloc[row]!r} in column '{column}'."
            )
    return frame.astype(float)


def load_dataset(path) -> Dataset:
    """
    Parse a dataset file.

    dt comes from ``dt_s``, else from ``rate_hz``, else from the first two
    timestamps; every timestamp must sit within 1e-6 s of t0 + k dt.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise DatasetFormatError(f"{path}: not UTF-8 text (byte {e.start}).")
    lines = text.split("\n")

    comments = []
    header_index = None
    for index, line in enumerate(lines):
        if line.startswith("#"):
            comments.append((index + 1, line))
        elif line.strip():
            header_index = index
            break
    if header_index is None:
        raise DatasetFormatError(f"{path}: missing header row and body.")

    meta = _parse_meta(comments)
    header = tuple(c.strip() for c in lines[header_index].split(","))
    if header != COLUMNS:
        raise DatasetFormatError(
            f"{path}: line {header_index + 1}: malformed header "
            f"'{lines[header_index].strip()}', expected '{','.join(COLUMNS)}'."
        )

    body = "\n".join(lines[header_index:])
    try:
        frame = pd.read_csv(
            io.StringIO(body),
            float_precision="round_trip",
            skip_blank_lines=True,
        )
    except pd.errors.ParserError as e:
        raise DatasetFormatError(f"{path}: {e}")
    if frame.empty:
        raise DatasetFormatError(f"{path}: the file has no data rows.")

    first_line = header_index + 2
    frame = _numeric_body(frame, first_line)
    times = frame[COLUMNS[0]].to_numpy()
    samples = frame[COLUMNS[1]].to_numpy()

    if "dt_s" in meta:
        dt = meta["dt_s"]
    elif "rate_hz" in meta:
        if not meta["rate_hz"] > 0:
            raise DatasetFormatError(f"{path}: rate_hz must be > 0.")
        dt = 1.0 / meta["rate_hz"]
    elif times.size >= 2:
        dt = times[1] - times[0]
    else:
        raise DatasetFormatError(
            f"{path}: a single-row file needs rate_hz or dt_s metadata."
        )
    if not dt > 0:
        raise DatasetFormatError(f"{path}: sample spacing must be > 0, got {dt}.")

    expected = times[0] + np.arange(times.size) * dt
    off = np.abs(times - expected) > TIMESTAMP_TOLERANCE
    if off.any():
        row = int(np.flatnonzero(off)[0])
        raise NonuniformTimestampsError(first_line + row, float(expected[row]), float(times[row]))

    ground_truth = None
    if "omega_n" in meta and "zeta" in meta:
        ground_truth = SecondOrderParams(meta.pop("omega_n"), meta.pop("zeta"))
    meta.setdefault("label", path.stem)
    logger.debug("Loaded %s: %d samples, dt=%g", path, times.size, dt)

    return Dataset(TimeSeries(times[0], dt, samples), meta, ground_truth)
