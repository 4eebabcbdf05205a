"""Exception types shared across the package."""


class MilacsimError(Exception):
    """Base class for all package-specific errors."""


class SingularNetworkError(MilacsimError):
    """A Cayley-transform inverse is numerically singular (ill-conditioned port matrix)."""


class InfeasibleResponseError(MilacsimError):
    """A requested response block has spectral norm beyond 1 and cannot be completed."""


class RankDeficientChannelError(MilacsimError):
    """The channel matrix is numerically rank deficient."""


class ConvergenceError(MilacsimError):
    """An iterative routine hit its iteration cap before reaching tolerance."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(MilacsimError):
    """An experiment configuration failed validation."""
