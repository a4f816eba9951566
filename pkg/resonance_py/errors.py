"""
Error types shared by the library and the command line.
Every error carries the process exit code the CLI maps it to.
"""

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VALIDATION = 4


class ResonanceError(Exception):
    """Base class for all errors raised by resonance_py."""
    exit_code = EXIT_NUMERICAL


class ConfigError(ResonanceError):
    exit_code = EXIT_CONFIG


class ParameterError(ResonanceError):
    """Inadmissible distortion or operator parameters."""


class DomainError(ResonanceError):
    """Evaluation outside the analyticity domain of a potential family."""


class GridError(ResonanceError):
    pass


class QuadratureError(ResonanceError):
    pass


class SolverError(ResonanceError):
    """Dense eigensolver failed or a batch of eigensolves had failures."""


class ContourError(ResonanceError):
    """An eigenvalue sits on or too close to a contour."""


class SingularSystemError(ResonanceError):
    pass


class RegionError(ResonanceError):
    """Query outside the branch a region curve is defined on."""


class GatingError(ResonanceError):
    """Trajectory linking lost an eigenvalue; the schedule is too coarse."""


class ValidationFailure(ResonanceError):
    exit_code = EXIT_VALIDATION
