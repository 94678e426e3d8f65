"""Exception hierarchy shared across the engine."""


class NoonSimError(Exception):
    """Base class for all engine errors."""


class LayoutError(NoonSimError, ValueError):
    """Operands live on incompatible Hilbert layouts, or a slot is invalid."""


class TruncationError(NoonSimError):
    """A Fock truncation is too small for the requested state or dynamics."""


class NonHermitianError(NoonSimError, ValueError):
    """A generator that must be Hermitian is not."""


class NumericalError(NoonSimError):
    """Norm drift, non-convergence, or another numerical failure."""


class ImpossibleBranchError(NoonSimError):
    """A forced measurement outcome has (numerically) zero probability."""


class ConfigError(NoonSimError, ValueError):
    """A scenario configuration violates a documented constraint."""
