"""Exception types shared across the package."""


class FrameDefect(ValueError):
    """A frame field drifted too far from SO(3) to be used as a frame."""


class DegenerateFrame(ValueError):
    """A near-frame matrix is singular or has negative determinant."""


class InvalidCoefficients(ValueError):
    """Elastic or hydrodynamic coefficients violate their admissibility rules."""


class NonFinite(FloatingPointError):
    """A right-hand side or state contains NaN or Inf."""


class StepRejected(RuntimeError):
    """The requested time step violates the stability limit."""

    def __init__(self, message, dt_limit=None):
        super().__init__(message)
        self.dt_limit = dt_limit


class SpecError(ValueError):
    """Unknown or malformed initial-condition preset."""
