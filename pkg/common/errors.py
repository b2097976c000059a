class ShaperLabError(Exception):
    """Base class for every error raised by the toolkit."""


class UsageError(ShaperLabError):
    """Command-line grammar problem. The message is a one-line remedy."""


class ParameterError(ShaperLabError, ValueError):
    """A value violates the invariants of the type it was meant for."""


class DataError(ShaperLabError, ValueError):
    """A dataset or signal cannot be used as given."""


class DatasetFormatError(DataError):
    pass


class NonuniformTimestampsError(DataError):
    def __init__(self, row, expected, found):
        self.row = row
        super().__init__(
            f"Nonuniform timestamps: row {row} has t={found!r}, "
            f"expected {expected!r} (tolerance 1e-6 s)."
        )


class ResolutionError(DataError):
    """Integration step too coarse for the plant's natural frequency."""


class FilterDivergenceError(ShaperLabError, ArithmeticError):
    pass


class StatisticsError(ShaperLabError, ValueError):
    pass
