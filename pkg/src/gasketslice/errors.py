"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so raising the right class
matters: bad user input (1), a request that exceeds enumeration capacity (2),
and an internal invariant that failed to hold (3).
"""


class GasketSliceError(Exception):
    """Base class for all package errors."""


class ValidationError(GasketSliceError, ValueError):
    """Invalid input (bad slope, point outside the projection, ...)."""


class CapacityError(GasketSliceError, RuntimeError):
    """Requested depth/width exceeds what exact enumeration can handle."""


class InvariantViolation(GasketSliceError, RuntimeError):
    """A structural property that must hold by construction was violated.

    Seeing this means a builder or a solver has a bug; it is never a
    user-input problem.
    """
