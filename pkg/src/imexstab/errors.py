"""Exception hierarchy shared by all modules."""


class ImexError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(ImexError, ValueError):
    """An input parameter is outside its admissible range."""


class InvalidSchemeError(ImexError):
    """A coefficient set fails a structural check (degenerate or mismatched)."""


class SingularityError(ImexError, ValueError):
    """An operator that must be invertible is numerically singular."""


class DefinitenessError(ImexError, ValueError):
    """An operator that must be Hermitian negative definite is not."""


class InitializationError(ImexError, ValueError):
    """Starting history for a multistep integration is malformed."""


class GridError(ImexError, ValueError):
    """A grid size or spatial layout is not supported."""


class DomainError(ImexError, ValueError):
    """A solution left the domain where the nonlinearity is defined."""


class InstabilityError(ImexError, RuntimeError):
    """Time integration blew up.

    Parameters
    ----------
    step : int
        Index of the step at which the growth test failed.
    norm : float
        Norm of the offending state.
    """

    def __init__(self, step: int, norm: float, message: str | None = None):
        self.step = int(step)
        self.norm = float(norm)
        super().__init__(message or f"instability detected at step {step} (norm={norm:.3e})")


class ConfigError(ImexError, ValueError):
    """A configuration file or command line option is invalid."""
