from .config import DEFAULT_CONFIG, load_config  # noqa
from .errors import (  # noqa
    DataError,
    DatasetFormatError,
    FilterDivergenceError,
    NonuniformTimestampsError,
    ParameterError,
    ResolutionError,
    ShaperLabError,
    StatisticsError,
    UsageError,
)
from .fileio import atomic_write_text, atomic_output  # noqa
from .log import setup_logging  # noqa
