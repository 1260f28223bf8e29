"""Exception taxonomy shared across the package."""


class UstLabError(Exception):
    """Base class for all package-level errors."""


class PreconditionError(UstLabError, ValueError):
    """An operation was called with arguments violating its contract."""


class DomainTooSmallError(PreconditionError):
    """Requested lattice domain is degenerate."""


class GeometryError(UstLabError):
    """A geometric query (ring, annulus, window) is empty or out of range."""


class EdgeNotFoundError(UstLabError, KeyError):
    """Referenced edge is not present in the graph."""


class DisconnectedGraphError(UstLabError):
    """Operation requires a connected graph."""


class TooLargeError(UstLabError):
    """Input exceeds an exact-computation scale guard."""


class UnreachableTargetError(UstLabError):
    """Random-walk target set is not reachable from the start vertex."""


class ComponentError(UstLabError):
    """Vertices lie in different components, or an unknown component id."""


class SolverError(UstLabError):
    """Linear solver failed to reach the requested residual."""


class DegenerateFitError(UstLabError):
    """Regression input does not determine a slope."""


class InsufficientInputError(PreconditionError):
    """Not enough data points / mesh sizes for the requested statistic."""


class ConfigError(UstLabError):
    """Experiment configuration could not be parsed or validated."""
