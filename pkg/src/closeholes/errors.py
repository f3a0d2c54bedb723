"""Exception types shared across the package."""


class CloseHolesError(Exception):
    """Base class for all package errors."""


class GeometryError(CloseHolesError):
    """Degenerate or inconsistent geometric input (zero scale, touching curves, ...)."""


class AdmissibilityError(CloseHolesError):
    """Parameter pair outside the admissible rectangle, or geometry checks failed."""


class CloseEvaluationError(CloseHolesError):
    """Evaluation point inside the near-singular band of a discretized curve."""


class SolverError(CloseHolesError):
    """A dense linear system that should be invertible is numerically singular."""


class ConsistencyError(CloseHolesError):
    """Inputs violate a structural identity they are required to satisfy."""


class ConfigError(CloseHolesError):
    """Malformed experiment configuration file or flags."""
