"""Exception hierarchy for model validation and solver failures.

Every error exposes a stable ``code`` (its class name) so the command line
layer can emit machine-readable error objects without maintaining a separate
registry.
"""


class ModelError(Exception):
    """Base class for every domain error raised by this package."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- configuration files ------------------------------------------------------

class InvalidConfig(ModelError):
    """Configuration file is malformed or missing required sections."""


# --- chain generator validation ---------------------------------------------

class NotSquare(ModelError):
    """Generator matrix is not square."""


class NegativeOffDiagonal(ModelError):
    """Generator has a negative off-diagonal rate."""


class RowSumViolation(ModelError):
    """Generator row sums are too far from zero to re-center."""


class NegativeTime(ModelError):
    """A time argument was negative."""


class BadGrid(ModelError):
    """A time grid is unsorted, out of range, or otherwise unusable."""


class DimensionMismatch(ModelError):
    """Array dimensions are inconsistent with the model."""


# --- market validation -------------------------------------------------------

class NonPositiveRate(ModelError):
    """Interest rate must be strictly positive on every segment."""


class DegenerateVolatility(ModelError):
    """sigma * sigma^T fails the uniform nondegeneracy floor."""


class ScheduleGap(ModelError):
    """Piecewise-constant schedule does not cover the full time interval."""


class OutOfRangeTime(ModelError):
    """Time argument lies outside the model interval."""


# --- exit-time horizon -------------------------------------------------------

class NegativeDensity(ModelError):
    """Exit density must be nonnegative."""


class SurvivalMarginViolated(ModelError):
    """Exit mass by the terminal date leaves less than the required margin."""


# --- backward solvers --------------------------------------------------------

class StepTooLarge(ModelError):
    """Step size too coarse for a stable, sign-preserving solve."""


class PositivityLost(ModelError):
    """A quantity that must stay positive crossed zero during the solve."""


class BoundViolated(ModelError):
    """A solved quantity left its admissible interval."""


class GridMismatch(ModelError):
    """Arrays passed together were not produced on the same grid."""


# --- frontier ----------------------------------------------------------------

class DenominatorNonNegative(ModelError):
    """Well-posedness condition failed: the multiplier denominator is >= 0."""


class InfeasibleMarket(ModelError):
    """No portfolio can move the expected terminal wealth (gamma = 0)."""


class NegativeBeta(ModelError):
    """Mutual-fund mixing weight must be nonnegative."""


class ZBelowMinimum(ModelError):
    """Requested expected-wealth target lies below the feasible minimum."""


# --- simulation --------------------------------------------------------------

class NumericalBlowup(ModelError):
    """A simulated wealth path exceeded the overflow guard."""
