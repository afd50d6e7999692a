"""Tubular strip operators on T x (0, r).

The quadratic form of the curvilinear strip operator is

    int  (1 - t k(s))^-2 |d_s v|^2 + |d_t v|^2 - V(s,t) |v|^2  ds dt
       - int_Gamma (alpha + k(s)/2) |v(s,0)|^2 ds

with Dirichlet condition at t = r, natural condition at t = 0, periodic in
s, and the curvilinear potential

    V(s,t) = t k''/(2(1-tk)^3) + 5 t^2 k'^2/(4(1-tk)^4) + k^2/(4(1-tk)^2).

The bracketing variants replace the metric by the constants 1 +- A r and the
potential by -(+- A r - k^2/4), where A realizes |V - k^2/4| <= A t and
|(1-tk)^-2 - 1| <= A t on the strip.  All three variants share mesh and
quadrature, so their discrete eigenvalues inherit the form ordering exactly.

The form is discretized directly with bilinear tensor elements (Ritz); the
t-mesh is graded toward t = 0 so the first cell is no taller than 1/(4 alpha)
and at least 8 nodes sit inside the e^(-alpha t) boundary layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from . import spectra1d
from .errors import OutOfTube
from .geometry import RobinArc, SampledGeometry, arc_curvature_sup

_G = 0.5 / math.sqrt(3.0)           # Gauss offset on the unit cell
_LS = np.array([0, 1, 0, 1])        # local node -> s side (left/right)
_LT = np.array([0, 0, 1, 1])        # local node -> t side (bottom/top)
_PHI = np.array([[0.5 + _G, 0.5 - _G], [0.5 - _G, 0.5 + _G]])  # (gauss, side)
_DSIGN = np.array([-1.0, 1.0])


def tubular_radius(geom: SampledGeometry) -> float:
    """Largest depth with ||k||_inf * R < 1 (tubular neighborhood bound)."""
    return 1.0 / geom.k_max_abs if geom.k_max_abs > 0 else math.inf


def tubular_map(geom: SampledGeometry, s, t) -> np.ndarray:
    """Phi(s, t) = gamma(s) - t nu(s); t must stay inside the tube."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr >= tubular_radius(geom)):
        raise OutOfTube(f"t outside [0, {tubular_radius(geom):.6g})")
    return geom.point(s) - t_arr[..., None] * geom.normal(s)


def potential_V(geom: SampledGeometry, s, t):
    """Curvilinear strip potential; s and t broadcast together."""
    k = geom.curvature(s)
    k1 = geom.curvature(s, 1)
    k2 = geom.curvature(s, 2)
    t = np.asarray(t, dtype=float)
    w = 1.0 - t * k
    if np.any(w <= 0.0):
        raise OutOfTube("1 - t k(s) <= 0: point outside the tubular chart")
    return (
        t * k2 / (2.0 * w**3)
        + 5.0 * t * t * k1 * k1 / (4.0 * w**4)
        + k * k / (4.0 * w**2)
    )


def _vst_ratios(k, k1, k2, t):
    """max over the probe of |V - k^2/4|/t and |(1-tk)^-2 - 1|/t."""
    w = 1.0 - t * k
    v_dev = np.abs(
        t * k2 / (2.0 * w**3)
        + 5.0 * t * t * k1 * k1 / (4.0 * w**4)
        + (k * k / 4.0) * (1.0 / w**2 - 1.0)
    )
    m_dev = np.abs(1.0 / w**2 - 1.0)
    return float(np.max(v_dev / t)), float(np.max(m_dev / t))


def bound_constant_A(geom: SampledGeometry, r_probe: float, margin: float = 1.1) -> float:
    """Smallest constant (with a 10% margin) realizing the linear-in-t bounds
    on the metric and potential deviations over the probe strip."""
    if not (0.0 < r_probe < tubular_radius(geom)):
        raise OutOfTube(f"probe depth {r_probe} outside the tube")
    s = np.linspace(0.0, geom.L, 512, endpoint=False)
    k = geom.curvature(s)[:, None]
    k1 = geom.curvature(s, 1)[:, None]
    k2 = geom.curvature(s, 2)[:, None]
    # t -> 0 limits of the two ratios
    lim = max(float(np.max(np.abs(k2 / 2.0 + k**3 / 2.0))), float(np.max(2.0 * np.abs(k))))
    t = (r_probe * np.geomspace(1e-3, 1.0, 64))[None, :]
    rv, rm = _vst_ratios(k, k1, k2, t)
    return margin * max(lim, rv, rm)


@dataclass(frozen=True)
class StripGrid:
    """Tensor mesh on the periodic strip; Dirichlet row at t = r."""

    s_grid: np.ndarray
    t_grid: np.ndarray
    r: float
    sigma: float


def _graded_t_grid(alpha: float, r: float, n_t: int) -> np.ndarray:
    n_cells = n_t - 1
    # uniform layer over two decay lengths of e^(-alpha t); with n_layer >= 16
    # the first cell is <= 1/(8 alpha) and >= 8 nodes sit inside 1/alpha
    d = r / 2.0 if alpha <= 0 else min(2.0 / alpha, r / 2.0)
    n_layer = max(16, int(round(0.75 * n_cells)))
    n_layer = min(n_layer, n_cells - 4)
    layer = np.linspace(0.0, d, n_layer + 1)
    n_tail = n_cells - n_layer
    w = d / n_layer
    need = r - d
    if w * n_tail >= need or n_tail == 1:
        tail = d + np.arange(1, n_tail + 1) * (need / n_tail)
    else:
        # (q^n - 1)/(q - 1) >= q^(n-1), so this upper bracket always covers
        q_hi = max(1.0 + 1e-9, math.exp(math.log(need / w) / (n_tail - 1)))
        ratio = brentq(
            lambda q: w * (q**n_tail - 1.0) / (q - 1.0) - need,
            1.0 + 1e-12,
            q_hi,
            rtol=1e-13,
        )
        tail = d + np.cumsum(w * ratio ** np.arange(n_tail))
    grid = np.concatenate([layer, tail])
    grid[-1] = r
    return grid


def build_strip_grid(
    geom: SampledGeometry,
    alpha: float,
    sigma: float,
    n_s: int,
    n_t: int,
    r_override: float | None = None,
) -> StripGrid:
    if not (0.0 < sigma < 1.0):
        raise ValueError("sigma must lie in (0, 1)")
    if n_t < 32:
        raise ValueError("n_t must be at least 32")
    if n_s < 16:
        raise ValueError("n_s must be at least 16")
    if r_override is not None:
        r = float(r_override)
    elif alpha > 0:
        r = float(alpha) ** (-sigma)
    else:
        raise ValueError("alpha must be positive to set the strip depth r = alpha^-sigma")
    if r * geom.k_max_abs >= 0.5:
        raise OutOfTube(
            f"strip depth r={r:.4g} violates r*max|k| < 0.5 (max|k|={geom.k_max_abs:.4g})"
        )
    s_grid = np.arange(n_s) * (geom.L / n_s)
    return StripGrid(s_grid=s_grid, t_grid=_graded_t_grid(alpha, r, n_t), r=r, sigma=sigma)


@dataclass(frozen=True)
class StripCoefficients:
    """Form coefficients of one strip variant plus the bracketing constant."""

    variant: str
    bound_A: float
    metric_gauss: np.ndarray     # (2, n_s, 2, n_tcells)
    potential_gauss: np.ndarray  # (2, n_s, 2, n_tcells)
    boundary_coeff: object       # callable s -> alpha + k/2 on Gamma, 0 outside


_VARIANTS = {"p": "P", "P": "P", "p+": "P+", "P+": "P+", "p-": "P-", "P-": "P-"}


def _strip_coefficients(geom, arc, alpha, grid: StripGrid, variant: str):
    n_s = len(grid.s_grid)
    h_s = geom.L / n_s
    t = grid.t_grid
    ht = np.diff(t)
    mid_s = grid.s_grid + 0.5 * h_s
    sg = np.stack([mid_s - _G * h_s, mid_s + _G * h_s])            # (2, n_s)
    mid_t = t[:-1] + 0.5 * ht
    tg = np.stack([mid_t - _G * ht, mid_t + _G * ht])              # (2, n_tc)

    k = geom.curvature(sg.ravel()).reshape(sg.shape)
    k1 = geom.curvature(sg.ravel(), 1).reshape(sg.shape)
    k2 = geom.curvature(sg.ravel(), 2).reshape(sg.shape)

    kk = k[:, :, None, None]
    kk1 = k1[:, :, None, None]
    kk2 = k2[:, :, None, None]
    tt = tg[None, None, :, :]
    w = 1.0 - tt * kk
    if np.any(w < 0.5 - 1e-12):
        raise OutOfTube("metric factor 1 - t k dropped below 1/2 on the mesh")

    # the bracketing constant must dominate the deviation ratios at the
    # actual quadrature nodes, not just on the generic probe
    rv, rm = _vst_ratios(kk, kk1, kk2, tt)
    A = max(bound_constant_A(geom, grid.r), 1.1 * rv, 1.1 * rm)

    if variant == "P":
        metric = 1.0 / w**2
        pot = -(
            tt * kk2 / (2.0 * w**3)
            + 5.0 * tt * tt * kk1 * kk1 / (4.0 * w**4)
            + kk * kk / (4.0 * w**2)
        )
    else:
        sign = 1.0 if variant == "P+" else -1.0
        ar = sign * A * grid.r
        metric = np.full_like(w, 1.0 + ar)
        if variant == "P-" and 1.0 + ar <= 0.0:
            raise OutOfTube(f"1 - A r = {1.0 + ar:.4g} <= 0: bracketing variant undefined")
        pot = np.broadcast_to(ar - kk * kk / 4.0, w.shape).copy()

    k_star, _ = arc_curvature_sup(geom, arc)

    def boundary_coeff(s):
        s = np.asarray(s, dtype=float)
        return np.where(s < arc.ell, alpha + geom.curvature(s) / 2.0, 0.0)

    coeffs = StripCoefficients(
        variant=variant,
        bound_A=float(A),
        metric_gauss=metric,
        potential_gauss=pot,
        boundary_coeff=boundary_coeff,
    )
    return coeffs, k_star


def _assemble_strip(geom, arc, alpha, grid: StripGrid, coeffs: StripCoefficients):
    n_s = len(grid.s_grid)
    h_s = geom.L / n_s
    t = grid.t_grid
    ht = np.diff(t)
    n_tc = len(ht)
    n_ta = len(t) - 1            # active t nodes (Dirichlet drops t = r)
    dof = n_s * n_ta

    ns_mat = _PHI[:, _LS]        # (2 gauss_s, 4 local)
    nt_mat = _PHI[:, _LT]        # (2 gauss_t, 4 local)
    ds_vec = _DSIGN[_LS]         # (4,)
    dt_vec = _DSIGN[_LT]

    ss_quad = ns_mat.T @ ns_mat          # sum_a NS[a,p] NS[a,q]
    tt_quad = nt_mat.T @ nt_mat

    i_idx = np.arange(n_s)
    right = (i_idx + 1) % n_s

    rows_all, cols_all, kv_all, mv_all = [], [], [], []
    chunk = max(1, int(2e6 // max(n_s, 1)))
    met = coeffs.metric_gauss
    pot = coeffs.potential_gauss
    for j0 in range(0, n_tc, chunk):
        j1 = min(j0 + chunk, n_tc)
        ht_c = ht[j0:j1]
        w_cell = 0.25 * h_s * ht_c                       # total gauss weight/4
        met_c = met[:, :, :, j0:j1]
        pot_c = pot[:, :, :, j0:j1]

        # d_s d_s term: metric summed over the s-gauss index
        met_b = met_c.sum(axis=0)                        # (n_s, 2, n_tc)
        k_ss = np.einsum(
            "ibj,bp,bq->ijpq", met_b, nt_mat, nt_mat, optimize=True
        ) * (np.outer(np.ones(n_s), w_cell) / h_s**2)[:, :, None, None]
        k_ss = k_ss * np.outer(ds_vec, ds_vec)[None, None, :, :]

        # d_t d_t term: coefficient 1
        gt = (np.outer(np.ones(n_s), w_cell / ht_c**2) * 2.0)[:, :, None, None]
        k_tt = gt * (ss_quad * np.outer(dt_vec, dt_vec))[None, None, :, :]

        # potential term: full 2x2 gauss tensor
        k_pot = np.einsum(
            "aibj,ap,aq,bp,bq->ijpq", pot_c, ns_mat, ns_mat, nt_mat, nt_mat,
            optimize=True,
        ) * (np.outer(np.ones(n_s), w_cell))[:, :, None, None]

        m_loc = np.einsum(
            "ap,aq,bp,bq->pq", ns_mat, ns_mat, nt_mat, nt_mat, optimize=True
        )
        m_el = (np.outer(np.ones(n_s), w_cell))[:, :, None, None] * m_loc[None, None, :, :]

        k_el = k_ss + k_tt + k_pot

        js = np.arange(j0, j1)
        node_i = np.stack([i_idx, right, i_idx, right], axis=-1)       # (n_s, 4)
        node_j = js[:, None] + _LT[None, :]                            # (nj, 4)
        gidx = node_i[:, None, :] * n_ta + node_j[None, :, :]          # (n_s, nj, 4)
        active = node_j[None, :, :] < n_ta                              # broadcast

        gi = np.broadcast_to(gidx[:, :, :, None], k_el.shape)
        gj = np.broadcast_to(gidx[:, :, None, :], k_el.shape)
        ok = np.broadcast_to(active[:, :, :, None] & active[:, :, None, :], k_el.shape)
        rows_all.append(gi[ok].astype(np.int64))
        cols_all.append(gj[ok].astype(np.int64))
        kv_all.append(k_el[ok])
        mv_all.append(m_el[ok])

    rows = np.concatenate(rows_all)
    cols = np.concatenate(cols_all)
    K = sp.coo_matrix((np.concatenate(kv_all), (rows, cols)), shape=(dof, dof)).tocsr()
    M = sp.coo_matrix((np.concatenate(mv_all), (rows, cols)), shape=(dof, dof)).tocsr()

    # boundary term on t = 0, restricted to Gamma = (0, ell)
    s_left = grid.s_grid
    s_right = s_left + h_s
    a_sub = np.minimum(s_left, arc.ell)
    b_sub = np.minimum(s_right, arc.ell)
    keep = np.nonzero(b_sub - a_sub > 1e-15 * geom.L)[0]
    if len(keep):
        a_sub, b_sub = a_sub[keep], b_sub[keep]
        mid = 0.5 * (a_sub + b_sub)
        half = 0.5 * (b_sub - a_sub)
        xg = np.stack([mid - half / math.sqrt(3.0), mid + half / math.sqrt(3.0)])
        wb = np.asarray(coeffs.boundary_coeff(xg.ravel())).reshape(xg.shape)
        phi_l = (s_right[keep][None, :] - xg) / h_s
        phi_r = (xg - s_left[keep][None, :]) / h_s
        nodes_l = keep * n_ta
        nodes_r = ((keep + 1) % n_s) * n_ta
        w_half = half[None, :]
        e_ll = np.sum(wb * phi_l * phi_l * w_half, axis=0)
        e_lr = np.sum(wb * phi_l * phi_r * w_half, axis=0)
        e_rr = np.sum(wb * phi_r * phi_r * w_half, axis=0)
        rows_b = np.concatenate([nodes_l, nodes_l, nodes_r, nodes_r])
        cols_b = np.concatenate([nodes_l, nodes_r, nodes_l, nodes_r])
        vals_b = -np.concatenate([e_ll, e_lr, e_lr, e_rr])
        K = K + sp.coo_matrix((vals_b, (rows_b, cols_b)), shape=(dof, dof)).tocsr()

    return spectra1d.SymmetricPencil.from_matrices(K, M)


def strip_eigs(
    geom: SampledGeometry,
    arc: RobinArc,
    alpha: float,
    sigma: float,
    variant: str,
    n: int,
    n_s: int,
    n_t: int,
    r_override: float | None = None,
) -> spectra1d.Spectrum:
    """Lowest n eigenvalues of the strip operator (variant P, P+ or P-).

    Depth is r = alpha^-sigma unless overridden (the override admits the
    alpha = 0 sanity comparison against the Neumann domain).  The rigorous
    lower bound E_1 >= -(alpha + k*/2)^2 + min(potential) supplies the
    solver shift.
    """
    if variant not in _VARIANTS:
        raise ValueError(f"variant must be one of p, p+, p- (got {variant!r})")
    variant = _VARIANTS[variant]
    arc.validate(geom.L)
    grid = build_strip_grid(geom, alpha, sigma, n_s, n_t, r_override=r_override)
    coeffs, k_star = _strip_coefficients(geom, arc, alpha, grid, variant)
    pencil = _assemble_strip(geom, arc, alpha, grid, coeffs)
    shift = (
        -((alpha + max(k_star, 0.0) / 2.0) ** 2)
        + min(float(np.min(coeffs.potential_gauss)), 0.0)
        - 1.0
    )
    spec = spectra1d.lowest_eigs(pencil, n, shift=shift)
    return spectra1d.Spectrum(
        eigenvalues=spec.eigenvalues,
        eigenvectors=None,
        dof=spec.dof,
        h=float(geom.L / n_s),
        residual_norms=spec.residual_norms,
    )
