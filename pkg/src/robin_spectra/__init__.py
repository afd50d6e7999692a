"""Spectral laboratory for Laplacians with a strong attractive Robin
condition on a boundary arc (Neumann on the rest).

The package computes eigenvalues through a curvilinear strip operator on a
tubular neighborhood of the boundary, companion 1D effective operators on
the arc and on the torus, and closed-form model spectra, then measures how
well the curvature-driven asymptotic predictions match.
"""

from . import (
    effective_operators,
    errors,
    geometry,
    harness,
    model_operators,
    report,
    spectra1d,
    strip2d,
)
from .fitting import fit_exponent

__version__ = "0.1.0"

__all__ = [
    "effective_operators",
    "errors",
    "fit_exponent",
    "geometry",
    "harness",
    "model_operators",
    "report",
    "spectra1d",
    "strip2d",
]
