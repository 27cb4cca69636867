"""Exception hierarchy.

All package errors derive from TensorRmtError so callers can catch one
base type; the mixin stdlib bases (ValueError / RuntimeError) keep
behavior natural for generic code.
"""


class TensorRmtError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(TensorRmtError, ValueError):
    """Operands have incompatible shapes."""


class ValidationError(TensorRmtError, ValueError):
    """Invalid parameters, configuration, or preconditions."""


class DegenerateInputError(TensorRmtError, ValueError):
    """A contraction vanished during iteration (norm below 1e-300)."""


class ConvergenceError(TensorRmtError, RuntimeError):
    """Fixed-point iteration exhausted its sweep budget.

    Carries the last iterate so callers can inspect it.
    """

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class WrongBranchError(ConvergenceError):
    """Iteration converged to the non-physical branch (Im g <= 0 in the
    upper half plane)."""


class BranchConsistencyError(TensorRmtError, RuntimeError):
    """An alignment factor came out significantly negative at a root that
    was claimed to lie outside the support; clamping would hide a real
    inconsistency, so this is raised instead."""


class RootSearchError(TensorRmtError, RuntimeError):
    """No usable root bracket was found; carries the scan trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class SupportDetectionError(TensorRmtError, RuntimeError):
    """Spectral support could not be detected (solver misconfiguration)."""
