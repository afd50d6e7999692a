"""Effective 1D operators on the Robin arc and on the full torus.

Two companions drive the asymptotics: the Dirichlet operator on (0, ell)

    -f'' + ( alpha (k* - k) + (k*^2 - 2 k k* - k^2)/4 ) f

and its torus counterpart where the Dirichlet walls are replaced by a tall
penalty alpha^(2-rho) outside the arc.  Both are assembled with the shared
P1 kernel; eigenvalues of the torus variant never exceed those of the
Dirichlet one, and both are bounded below by -a with
a = sup |k*^2 - 2 k k* - k^2| / 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectra1d
from .errors import FitFailure
from .fitting import fit_exponent
from .geometry import RobinArc, SampledGeometry, arc_curvature_sup

_DENSE_SUP = 4097


@dataclass(frozen=True)
class EffectivePotential:
    """Potential data of the effective operators (inspection artifact)."""

    grid: np.ndarray
    values: np.ndarray
    alpha: float
    rho: float | None
    k_star: float
    a: float


def arc_potential_data(geom: SampledGeometry, arc: RobinArc):
    """(k_star, U(s), V(s), a) with U = k* - k and V the quarter-square term."""
    k_star, _ = arc_curvature_sup(geom, arc)

    def U(s):
        return k_star - geom.curvature(s)

    def V(s):
        k = geom.curvature(s)
        return (k_star * k_star - 2.0 * k * k_star - k * k) / 4.0

    s_dense = np.linspace(0.0, arc.ell, _DENSE_SUP)
    a = float(np.max(np.abs(V(s_dense))))
    return k_star, U, V, a


def _adaptive_points(base: int, span: float, alpha: float) -> int:
    # at least 64 grid points within one semiclassical length alpha^(-1/3)
    # of the potential minimum (worst supported order m = 1)
    if alpha <= 1.0:
        return max(base, 256)
    need = int(math.ceil(64.0 * span * alpha ** (1.0 / 3.0))) + 1
    return max(base, 256, need)


def effective_potential(
    geom: SampledGeometry, arc: RobinArc, alpha: float, rho: float | None, n_grid: int
) -> EffectivePotential:
    """Tabulate the effective potential (arc variant or penalized torus)."""
    k_star, U, V, a = arc_potential_data(geom, arc)
    if rho is None:
        grid = np.linspace(0.0, arc.ell, n_grid)
        vals = alpha * U(grid) + V(grid)
    else:
        grid = np.linspace(0.0, geom.L, n_grid, endpoint=False)
        on_arc = grid < arc.ell
        vals = np.where(on_arc, alpha * U(grid) + V(grid), alpha ** (2.0 - rho))
    return EffectivePotential(
        grid=grid, values=vals, alpha=float(alpha), rho=rho, k_star=k_star, a=a
    )


def lambda_prime_eigs(
    geom: SampledGeometry, arc: RobinArc, alpha: float, n: int, n_grid: int
) -> spectra1d.Spectrum:
    """Lowest eigenvalues of the Dirichlet effective operator on (0, ell).

    The uniform grid is refined with alpha so that at least 64 points fall
    within one semiclassical length of the curvature maximum.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if n_grid < 256:
        raise ValueError("n_grid must be at least 256")
    arc.validate(geom.L)

    k_star, U, V, a = arc_potential_data(geom, arc)
    n_eff = _adaptive_points(n_grid, arc.ell, alpha)
    grid = np.linspace(0.0, arc.ell, n_eff)

    def q(s):
        return alpha * U(s) + V(s)

    pencil = spectra1d.assemble_form_1d(grid, 1.0, q, bc="dirichlet")
    spec = spectra1d.lowest_eigs(pencil, n, shift=-a - 1.0)
    return spectra1d.Spectrum(
        eigenvalues=spec.eigenvalues,
        eigenvectors=spec.eigenvectors,
        dof=spec.dof,
        h=float(grid[1] - grid[0]),
        residual_norms=spec.residual_norms,
    )


def lambda_rho_eigs(
    geom: SampledGeometry,
    arc: RobinArc,
    alpha: float,
    rho: float,
    n: int,
    n_grid: int,
) -> spectra1d.Spectrum:
    """Lowest eigenvalues of the penalized torus operator.

    The potential is alpha U + V on (0, ell) and alpha^(2-rho) on the rest
    of the torus; assembly subtracts the global potential floor (a mass
    shift) and adds it back to the eigenvalues.
    """
    if not (0.0 < rho < 1.0):
        raise ValueError("rho must lie in (0, 1)")
    if alpha < 1.0:
        raise ValueError("alpha must be at least 1")
    if n_grid < 256:
        raise ValueError("n_grid must be at least 256")
    arc.validate(geom.L)

    k_star, U, V, a = arc_potential_data(geom, arc)
    penalty = alpha ** (2.0 - rho)
    n_eff = _adaptive_points(n_grid, geom.L, alpha)
    grid = np.linspace(0.0, geom.L, n_eff, endpoint=False)

    s_dense = np.linspace(0.0, arc.ell, _DENSE_SUP)
    floor = min(float(np.min(alpha * U(s_dense) + V(s_dense))), penalty)

    def q_shifted(s):
        s = np.asarray(s)
        on_arc = s < arc.ell
        gamma_part = alpha * U(s) + V(s)
        return np.where(on_arc, gamma_part, penalty) - floor

    pencil = spectra1d.assemble_form_1d(grid, 1.0, q_shifted, bc="periodic")
    spec = spectra1d.lowest_eigs(pencil, n, shift=-a - 1.0 - floor)
    return spectra1d.Spectrum(
        eigenvalues=spec.eigenvalues + floor,
        eigenvectors=spec.eigenvectors,
        dof=spec.dof,
        h=float(grid[1] - grid[0]),
        residual_norms=spec.residual_norms,
    )


def apriori_bound_check(
    geom: SampledGeometry,
    arc: RobinArc,
    alpha_grid,
    n: int,
    n_grid: int = 2048,
) -> float:
    """Fitted slope of log E_n(Lambda'_alpha) against log alpha.

    For a curvature maximum of order m the slope should not exceed
    2/(2+m) (+ fit tolerance).  Nonpositive eigenvalues make the bound
    trivial (constant-curvature case); the slope is then reported as 0.
    """
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    if len(alpha_grid) < 3:
        raise ValueError("alpha_grid needs at least 3 points")
    es = np.array(
        [
            lambda_prime_eigs(geom, arc, a, n, n_grid).eigenvalues[n - 1]
            for a in alpha_grid
        ]
    )
    if np.any(es <= 0.0):
        return 0.0
    try:
        slope, _, _ = fit_exponent(alpha_grid, es)
    except FitFailure:
        return 0.0
    return float(slope)
