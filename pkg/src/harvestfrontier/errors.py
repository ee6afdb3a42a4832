"""Exception types shared across the toolkit.

Everything a caller is expected to handle derives from :class:`HarvestError`,
which the CLI maps to exit status 1.
"""


class HarvestError(ValueError):
    """Base class for data and model errors."""


class HeaderError(HarvestError):
    """CSV header does not match the expected columns (fatal)."""


class RecordError(HarvestError):
    """A single malformed input row."""

    def __init__(self, line, message):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


class UnknownSpeciesError(HarvestError):
    pass


class UndefinedRatioError(HarvestError):
    pass


class InfeasibleRateError(HarvestError):
    pass


class SingularSlopeError(HarvestError):
    pass


class BracketError(HarvestError):
    pass


class DegenerateFrontierError(HarvestError):
    pass


class RayUndefinedError(HarvestError):
    pass


class BeyondFrontierError(HarvestError):
    pass


class ScaleOverflowError(HarvestError):
    """Projection scale too large for a float (day negligible next to the frontier)."""


class PlotError(HarvestError):
    pass
