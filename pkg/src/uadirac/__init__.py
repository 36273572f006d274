"""Uniformly accurate two-scale spectral solvers for the two-component
nonlinear Dirac equation in the nonrelativistic regime, together with the
coupled-NLS limit model and a convergence-study harness."""

from .errors import ConfigError, ConsistencyError, DivergenceError

__version__ = "0.1.0"

__all__ = ["ConfigError", "ConsistencyError", "DivergenceError", "__version__"]
