class GibbsLabError(Exception):
    """Base class for errors raised by gibbslab."""


class ConfigError(GibbsLabError, ValueError):
    """Invalid input or configuration. The CLI maps this to exit code 1."""


class ConvergenceError(GibbsLabError, RuntimeError):
    """A numerical limit did not settle within its cap. CLI exit code 2.

    The message always names the tolerance that was not met.
    """

    def __init__(self, message, tolerance=None):
        super().__init__(message)
        self.tolerance = tolerance


class SpectrumError(ConvergenceError):
    """Lyapunov spectrum is not simple (a gap fell below the threshold)."""
