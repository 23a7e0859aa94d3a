"""Exception hierarchy shared by the harness, the statistics and the CLI."""


class SortlabError(Exception):
    """Base class for every error raised by sortlab."""


class ConfigError(SortlabError):
    pass


class MeasurementError(SortlabError):
    """A measured sort produced output that is not a sorted permutation."""


class FormatError(SortlabError):
    """A metrics or factors file could not be parsed."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class StatisticsError(SortlabError):
    """Base class for numerical failures in the factor-analysis pipeline."""


class DegenerateInput(StatisticsError):
    pass


class ZeroVariance(StatisticsError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"zero variance in column {column!r}")


class SingularMatrix(StatisticsError):
    pass


class NegativeEigenvalue(StatisticsError):
    pass


class NoConvergence(StatisticsError):
    pass


class ZeroCommunalityRow(StatisticsError):
    pass


class SingularTransform(StatisticsError):
    pass


class ShapeMismatch(StatisticsError):
    pass
