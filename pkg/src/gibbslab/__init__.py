"""Numerical toolkit for Gibbs kernels, equidistribution of weighted orbit
measures and Lyapunov sections over a closed genus-two hyperbolic surface."""

__version__ = "0.1.0"

from .errors import ConfigError, ConvergenceError, SpectrumError  # noqa: E402
