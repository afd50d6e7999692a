"""Exception types shared across the package."""


class RobinSpectraError(Exception):
    """Base class for all package errors."""


class DegenerateCurve(RobinSpectraError):
    """Boundary curve fails regularity (|dgamma/dtheta| ~ 0) or is empty."""


class ConvergenceFailure(RobinSpectraError):
    """A root solve or stabilization loop did not converge."""


class AmbiguousMaximum(RobinSpectraError):
    """Two separated curvature maxima agree within tolerance on the arc."""


class UnsupportedRegime(RobinSpectraError):
    """Curvature maximum outside the validated (location, order) set."""


class BadGrid(RobinSpectraError):
    """1D assembly grid is non-uniform or too small."""


class FactorizationFailure(RobinSpectraError):
    """Shift-invert factorization failed (shift hit the spectrum)."""


class NoConvergence(RobinSpectraError):
    """Iterative eigensolver ran out of iterations."""


class OutOfRegime(RobinSpectraError):
    """Slab parameters outside the negative-eigenvalue regime (alpha*r <= 1)."""


class OutOfTube(RobinSpectraError):
    """Requested depth exceeds the tubular neighborhood of the boundary."""


class FitFailure(RobinSpectraError):
    """Power-law fit impossible (nonpositive data or too few points)."""
