"""Exception hierarchy shared by all modules."""


class RealGasError(Exception):
    """Base class for every error raised by this package."""


class ParamError(RealGasError, ValueError):
    """Invalid model or medium parameter."""


class DomainError(RealGasError, ValueError):
    """A (T, v) point, or a volume range, lies outside the model domain."""


class SingularError(RealGasError, ArithmeticError):
    """Quantity diverges at the requested point (spinodal or Sigma_e point)."""


class NoRootError(RealGasError):
    """A bracketed root search found no sign change."""


class ConvergenceError(RealGasError):
    """An iterative solver hit its iteration cap.

    ``history`` holds whatever trace the solver kept (residual norms,
    iterates), most recent last.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class SupercriticalError(RealGasError):
    """Coexistence requested at or above the critical temperature."""


class QuadratureError(RealGasError):
    """Adaptive quadrature could not meet its tolerance."""


class SingularPointError(RealGasError):
    """Field evaluated exactly at a point source."""


class BranchAmbiguityError(RealGasError):
    """Boundary volumes do not sit inside a single monotone branch of Q."""


class ExtrapolationError(RealGasError):
    """A lookup table was queried outside its tabulated range."""
