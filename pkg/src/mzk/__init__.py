"""Pseudospectral laboratory for the complex modified Zakharov-Kuznetsov equation on T^2.

    d_t u + d_{x1} Laplacian u = lam |u|^2 d_{x1} u

Modules: :mod:`~mzk.spectral` (grids, transforms, norms), :mod:`~mzk.dynamics`
(vector field), :mod:`~mzk.timestepping` (integrating-factor RK4),
:mod:`~mzk.illposed` (two-mode families), :mod:`~mzk.inequalities`
(randomized estimate harnesses), :mod:`~mzk.diagnostics` (trajectory checks)
and the ``mzk`` command line.
"""
from .dynamics import EquationParams, full_rhs, galerkin_rhs, nonlinearity, propagate_linear
from .errors import (
    AccuracyError, BlowUpError, ConfigurationError, DataError, MZKError, OracleLimitError,
    ResourceError, StiffnessError,
)
from .spectral import SpectralField, TorusGrid, analyze, hs_norm, synthesize
from .timestepping import SolverConfig, Trajectory, if_rk4_step, solve

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "BlowUpError", "ConfigurationError", "DataError", "EquationParams",
    "MZKError", "OracleLimitError", "ResourceError", "SolverConfig", "SpectralField",
    "StiffnessError", "TorusGrid", "Trajectory", "analyze", "full_rhs", "galerkin_rhs",
    "hs_norm", "if_rk4_step", "nonlinearity", "propagate_linear", "solve", "synthesize",
]
