"""Exception hierarchy shared across the package."""


class LieSdeError(Exception):
    """Base class for all package errors."""


class DomainError(LieSdeError):
    """A state lies outside (or on the boundary of) the admissible domain."""


class NumericsError(LieSdeError):
    """Non-finite values where finite ones are required."""


class ShapeError(LieSdeError):
    """Dimension mismatch between operands."""


class SingularFormError(LieSdeError):
    """Symplectic form is (numerically) degenerate at the evaluation point."""


class SingularRuleError(LieSdeError):
    """A superposition-rule denominator vanished or inputs are degenerate."""


class UnsupportedError(LieSdeError):
    """Requested operation is not defined for this system/entry."""


class NoFullRank(LieSdeError):
    """Prolonged fields never reached full rank up to the configured cap."""


class StudyFailed(LieSdeError):
    """Convergence study could not produce usable data."""


class VerificationInconclusive(LieSdeError):
    """Trajectories truncated too early to decide pass/fail."""


class ConfigError(LieSdeError):
    """Malformed or unknown experiment configuration."""
