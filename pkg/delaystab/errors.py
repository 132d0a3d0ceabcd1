"""Exception hierarchy shared by the library and the command line."""


class DelayStabError(Exception):
    """Base class for every error raised by delaystab."""


class DistributionError(DelayStabError, ValueError):
    """Invalid delay distribution parameters."""


class DomainError(DelayStabError, ValueError):
    """Input outside the domain of an operation."""


class NumericalError(DelayStabError, RuntimeError):
    """A root, contour or quadrature computation did not succeed."""


class ContourError(NumericalError):
    """Argument tracking along a contour failed (contour through a root)."""


class ExtremalError(DelayStabError):
    """Extremal construction preconditions violated or reduction stuck."""


class SimulationError(DelayStabError):
    """Invalid integrator settings or a trace too short to analyse."""


class SpecFileError(DelayStabError):
    """Malformed distribution spec file."""


class UsageError(DelayStabError):
    """Invalid combination of command-line options."""
