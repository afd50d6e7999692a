"""Power-law exponent fitting for remainder measurements."""

from __future__ import annotations

import numpy as np

from .errors import FitFailure


def fit_exponent(xs, ys) -> tuple[float, float, float]:
    """Ordinary least squares of log y against log x: (slope, intercept, r2).

    Quantifies measured O(x^q) behavior; requires at least 3 strictly
    positive samples.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("xs and ys must be 1D arrays of equal length")
    if len(xs) < 3:
        raise ValueError("need at least 3 points for a power-law fit")
    if np.any(xs <= 0.0):
        raise FitFailure("x values must be positive")
    if np.any(ys <= 0.0) or not np.all(np.isfinite(ys)):
        raise FitFailure("y values must be positive and finite")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2
