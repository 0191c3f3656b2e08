"""Input errors raised while reading plot data files."""


class PlotInputError(Exception):
    """Base class: the input files cannot be turned into a figure."""


class MissingColumn(PlotInputError):
    """A required CSV column is absent."""

    def __init__(self, path, column: str):
        super().__init__(f"{path}: missing required column {column!r}")
        self.path = str(path)
        self.column = column


class EmptySeries(PlotInputError):
    """A CSV holds no data rows, so there is nothing to draw."""

    def __init__(self, path):
        super().__init__(f"{path}: no data rows")
        self.path = str(path)


class NegativeVariance(PlotInputError):
    """A frontier CSV reports a negative variance."""

    def __init__(self, path, value: float):
        super().__init__(f"{path}: variance must be nonnegative, found {value!r}")
        self.path = str(path)
        self.value = value
