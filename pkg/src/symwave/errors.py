"""Exception hierarchy shared by all symwave modules."""


class SymwaveError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(SymwaveError, ValueError):
    pass


class PdeSyntaxError(SymwaveError, SyntaxError):
    """Malformed equation text."""


class UnsupportedEquation(SymwaveError):
    """Equation parses but lies outside the ``P(d/dx) u_t = F(u)`` class."""


class NonConvergence(SymwaveError):
    pass


class NotAnEigenvalue(SymwaveError):
    pass


class ForwardSolverFailure(SymwaveError):
    pass


class DegenerateConstraint(SymwaveError):
    pass


class GridMismatch(SymwaveError):
    pass


class CriticalLayer(SymwaveError):
    """The background current reaches the wave speed somewhere in the fluid."""


class NotConstantVorticity(SymwaveError):
    pass


class ZeroState(SymwaveError):
    pass


class NoSmoothOrbit(SymwaveError):
    pass


class NearCriticalValue(SymwaveError):
    pass


class ConfigError(SymwaveError):
    pass


class BlowUp(SymwaveError):
    """A state left the finite range during time stepping."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory
