"""Exception hierarchy shared by the physics modules and the CLI."""


class GcssError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class ConfigurationError(GcssError, ValueError):
    """Invalid input: bad parameters, grids, files or unknown config keys."""

    exit_code = 2


class NumericalError(GcssError, ArithmeticError):
    """A computation could not meet its accuracy contract."""

    exit_code = 3


class TruncationError(NumericalError):
    """Fock cutoff too small for the requested state or operator."""


class NullStateError(NumericalError):
    """A superposition collapsed to (numerically) zero norm."""


class IntegratorError(NumericalError):
    """Time evolution violated its conservation or unitarity tolerance."""


class DimensionMismatchError(NumericalError):
    """Operands live on Fock spaces of different dimension."""


class DegenerateBatchError(NumericalError):
    """A shot batch became empty or lost all variance."""


__all__ = [
    "GcssError",
    "ConfigurationError",
    "NumericalError",
    "TruncationError",
    "NullStateError",
    "IntegratorError",
    "DimensionMismatchError",
    "DegenerateBatchError",
]
