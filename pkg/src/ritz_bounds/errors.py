"""Exception hierarchy for Ritz Bounds.

Input problems derive from ValueError, numerical failures from
ArithmeticError or RuntimeError, so callers can catch either the
package base class or the familiar builtin.
"""

from typing import Optional


class RitzBoundsError(Exception):
    """Base class for all errors raised by the package."""


class NotSymmetricError(RitzBoundsError, ValueError):
    """Matrix is not symmetric within the symmetry tolerance."""


class NotPositiveSemidefiniteError(RitzBoundsError, ValueError):
    """Matrix has an eigenvalue below the allowed negative slack."""


class DimensionMismatchError(RitzBoundsError, ValueError):
    """Operand shapes do not fit together."""


class EmptySpanError(RitzBoundsError, ValueError):
    """All columns of a basis are numerically zero."""


class InsufficientEigenvaluesError(RitzBoundsError, ValueError):
    """More Ritz values than reference eigenvalues."""


class GammaNotAboveMuError(RitzBoundsError, ValueError):
    """Temple-Kato gap parameter does not exceed the Rayleigh quotient."""


class MeshTooCoarseError(RitzBoundsError, ValueError):
    """Finite-difference mesh below the supported minimum."""


class NotApplicableError(RitzBoundsError, ArithmeticError):
    """The residual measure reached 1, so relative bounds carry no information."""


class SingularOperatorError(RitzBoundsError, ArithmeticError):
    """An operation that needs a positive definite operator got a singular one."""


class DegenerateGapError(RitzBoundsError, ArithmeticError):
    """A Ritz value coincides with a non-matched eigenvalue."""


class NoConvergenceError(RitzBoundsError, RuntimeError):
    """Iterative decomposition exceeded its sweep limit."""


class BracketFailureError(RitzBoundsError, RuntimeError):
    """Root bracketing for the secular equation failed."""


class ParseError(RitzBoundsError, ValueError):
    """Malformed matrix or configuration file."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")
