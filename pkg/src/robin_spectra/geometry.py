"""Closed planar boundary curves and their curvature data.

A curve is given by truncated Fourier series for x(theta) and y(theta).
Everything downstream works in the arclength parametrization gamma(s) with
the outward normal nu(s) fixed by det(nu, gamma') = 1 and curvature defined
through gamma'' = -k nu (so a convex boundary traversed counterclockwise has
k > 0).  Curvature and its first two arclength derivatives are evaluated
analytically from the Fourier data through the arclength map; no sampled
quantity is ever differenced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousMaximum,
    ConvergenceFailure,
    DegenerateCurve,
    UnsupportedRegime,
)

TOL_GEO = 1e-8
TOL_DERIV = 1e-6

_EPS_REG = 1e-6          # minimal |dgamma/dtheta| for a regular parametrization
_PROBE_N = 4096          # dense theta grid for regularity / orientation probes
_TWO_PI = 2.0 * math.pi


def _as_coeffs(pairs) -> tuple[np.ndarray, np.ndarray]:
    arr = np.atleast_2d(np.asarray(pairs, dtype=float))
    if arr.size == 0:
        return np.zeros(1), np.zeros(1)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("fourier coefficients must be a list of (cos, sin) pairs")
    return arr[:, 0].copy(), arr[:, 1].copy()


@dataclass(frozen=True)
class BoundaryCurve:
    """Smooth closed curve from truncated Fourier coefficients.

    Evaluation at any theta is exact trigonometric summation; derivatives up
    to order 4 are available.  ``orient`` is +1 for a counterclockwise input
    parametrization and -1 otherwise; the public parameter always traverses
    the curve counterclockwise so that the turning number is +1.
    """

    fourier_x: tuple
    fourier_y: tuple
    phase_origin: float
    n_modes: int
    orient: int = 1

    def _coeffs(self):
        cx, sx = _as_coeffs(self.fourier_x)
        cy, sy = _as_coeffs(self.fourier_y)
        return cx, sx, cy, sy

    def derivative(self, theta, order: int = 0) -> np.ndarray:
        """d^order gamma / d theta^order, shape (..., 2)."""
        theta = np.asarray(theta, dtype=float)
        tp = self.phase_origin + self.orient * theta
        cx, sx, cy, sy = self._coeffs()
        nx = np.arange(len(cx), dtype=float)
        ny = np.arange(len(cy), dtype=float)
        # d-th derivative of cos(j t) is j^d cos(j t + d pi/2), same shift for sin
        shift = order * (math.pi / 2.0)
        argx = np.multiply.outer(tp, nx) + shift
        argy = np.multiply.outer(tp, ny) + shift
        x = np.cos(argx) @ (cx * nx**order) + np.sin(argx) @ (sx * nx**order)
        y = np.cos(argy) @ (cy * ny**order) + np.sin(argy) @ (sy * ny**order)
        scale = float(self.orient) ** order
        return np.stack([x * scale, y * scale], axis=-1)

    def position(self, theta) -> np.ndarray:
        return self.derivative(theta, 0)

    def speed(self, theta) -> np.ndarray:
        d1 = self.derivative(theta, 1)
        return np.hypot(d1[..., 0], d1[..., 1])


def from_fourier(fourier_x, fourier_y, phase_origin: float = 0.0) -> BoundaryCurve:
    """Build a closed regular curve from (cos, sin) coefficient pairs.

    Raises DegenerateCurve if the parametrization has |dgamma/dtheta| below
    a small threshold anywhere on a dense probe grid (this also rejects the
    all-zero input).
    """
    cx, sx = _as_coeffs(fourier_x)
    cy, sy = _as_coeffs(fourier_y)
    for arr in (cx, sx, cy, sy):
        if not np.all(np.isfinite(arr)):
            raise ValueError("fourier coefficients must be finite")
    moving = False
    for arr in (cx, sx, cy, sy):
        if len(arr) > 1 and np.any(arr[1:] != 0.0):
            moving = True
    if not moving:
        raise DegenerateCurve("all oscillating Fourier modes are zero")

    n_modes = max(len(cx), len(sx), len(cy), len(sy))
    curve = BoundaryCurve(
        fourier_x=tuple(map(tuple, np.column_stack([cx, sx]))),
        fourier_y=tuple(map(tuple, np.column_stack([cy, sy]))),
        phase_origin=float(phase_origin),
        n_modes=n_modes,
        orient=1,
    )

    theta = np.linspace(0.0, _TWO_PI, _PROBE_N, endpoint=False)
    d1 = curve.derivative(theta, 1)
    speed = np.hypot(d1[:, 0], d1[:, 1])
    if speed.min() < _EPS_REG:
        raise DegenerateCurve(
            f"|dgamma/dtheta| = {speed.min():.3e} below {_EPS_REG:.0e} on probe grid"
        )

    # Orient counterclockwise (turning number +1): flip via theta -> -theta,
    # which keeps gamma(0) at phase_origin.
    pos = curve.position(theta)
    area2 = np.sum(pos[:, 0] * d1[:, 1] - pos[:, 1] * d1[:, 0]) * (_TWO_PI / _PROBE_N)
    if area2 < 0.0:
        curve = BoundaryCurve(
            fourier_x=curve.fourier_x,
            fourier_y=curve.fourier_y,
            phase_origin=curve.phase_origin,
            n_modes=n_modes,
            orient=-1,
        )
    return curve


def shape_fourier(name: str):
    """Expand a named shape ("circle:R" or "ellipse:a,b") to Fourier pairs."""
    kind, _, params = name.partition(":")
    kind = kind.strip().lower()
    if kind == "circle":
        r = float(params) if params else 1.0
        if r <= 0:
            raise ValueError("circle radius must be positive")
        return [(0.0, 0.0), (r, 0.0)], [(0.0, 0.0), (0.0, r)]
    if kind == "ellipse":
        parts = [p for p in params.split(",") if p.strip()]
        if len(parts) != 2:
            raise ValueError("ellipse shape needs two semi-axes: ellipse:a,b")
        a, b = float(parts[0]), float(parts[1])
        if a <= 0 or b <= 0:
            raise ValueError("ellipse semi-axes must be positive")
        return [(0.0, 0.0), (a, 0.0)], [(0.0, 0.0), (0.0, b)]
    raise ValueError(f"unknown shape {name!r} (expected circle:R or ellipse:a,b)")


# ---------------------------------------------------------------------------
# Arclength resampling


@dataclass(frozen=True, eq=False)
class SampledGeometry:
    """Arclength-uniform samples of gamma, nu, k, k', k'' plus total length.

    Besides the grid arrays, the object can evaluate every quantity exactly
    at arbitrary arclength values (used by assembly quadrature); the inverse
    arclength map theta(s) is solved by Newton iteration on a spectrally
    accurate antiderivative of the parametric speed.
    """

    s_grid: np.ndarray
    gamma: np.ndarray
    nu: np.ndarray
    k: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    L: float
    h_s: float
    curve: BoundaryCurve
    k_max_abs: float
    _mean_speed: float = field(repr=False, default=0.0)
    _modes: np.ndarray = field(repr=False, default=None)
    _cos_amp: np.ndarray = field(repr=False, default=None)
    _sin_amp: np.ndarray = field(repr=False, default=None)
    _theta_table: np.ndarray = field(repr=False, default=None)
    _arc_table: np.ndarray = field(repr=False, default=None)

    # -- inverse arclength map ------------------------------------------------

    def _cumlen(self, theta: np.ndarray) -> np.ndarray:
        # F(theta) = mean*theta + sum_k [a_k sin(k theta) + b_k (1 - cos(k theta))]/k
        out = self._mean_speed * theta
        if len(self._modes):
            kt = np.multiply.outer(theta, self._modes)
            out = out + np.sin(kt) @ (self._cos_amp / self._modes)
            out = out + (1.0 - np.cos(kt)) @ (self._sin_amp / self._modes)
        return out

    def theta_of_s(self, s) -> np.ndarray:
        s = np.mod(np.asarray(s, dtype=float), self.L)
        theta = np.interp(s, self._arc_table, self._theta_table)
        for _ in range(6):
            resid = self._cumlen(theta) - s
            if np.max(np.abs(resid)) <= 1e-14 * max(self.L, 1.0):
                break
            theta = theta - resid / self.curve.speed(theta)
        resid = np.max(np.abs(self._cumlen(theta) - s))
        if resid > TOL_GEO:
            raise ConvergenceFailure(f"arclength inversion residual {resid:.3e}")
        return theta

    # -- exact pointwise evaluation --------------------------------------------

    def point(self, s) -> np.ndarray:
        return self.curve.position(self.theta_of_s(s))

    def tangent(self, s) -> np.ndarray:
        d1 = self.curve.derivative(self.theta_of_s(s), 1)
        return d1 / np.linalg.norm(d1, axis=-1, keepdims=True)

    def normal(self, s) -> np.ndarray:
        # det(nu, gamma') = 1: nu = (tau_y, -tau_x), outward for CCW curves
        tau = self.tangent(s)
        return np.stack([tau[..., 1], -tau[..., 0]], axis=-1)

    def curvature(self, s, order: int = 0) -> np.ndarray:
        """k(s), k'(s) or k''(s) (order 0, 1, 2), exact via chain rule."""
        theta = self.theta_of_s(s)
        return _curvature_from_theta(self.curve, theta, order)


def _curvature_from_theta(curve: BoundaryCurve, theta: np.ndarray, order: int):
    d = [curve.derivative(theta, j) for j in range(min(5, order + 3))]
    x1, y1 = d[1][..., 0], d[1][..., 1]
    x2, y2 = d[2][..., 0], d[2][..., 1]
    D = x1 * x1 + y1 * y1
    N = x1 * y2 - y1 * x2
    if order == 0:
        return N * D**-1.5
    x3, y3 = d[3][..., 0], d[3][..., 1]
    Dp = 2.0 * (x1 * x2 + y1 * y2)
    Np = x1 * y3 - y1 * x3
    g = np.sqrt(D)
    k_t = Np * D**-1.5 - 1.5 * N * D**-2.5 * Dp
    if order == 1:
        return k_t / g
    x4, y4 = d[4][..., 0], d[4][..., 1]
    Npp = x2 * y3 + x1 * y4 - y2 * x3 - y1 * x4
    Dpp = 2.0 * (x2 * x2 + x1 * x3 + y2 * y2 + y1 * y3)
    k_tt = (
        Npp * D**-1.5
        - 3.0 * Np * D**-2.5 * Dp
        + 3.75 * N * D**-3.5 * Dp * Dp
        - 1.5 * N * D**-2.5 * Dpp
    )
    g_t = Dp / (2.0 * g)
    if order == 2:
        return (k_tt * g - k_t * g_t) / g**3
    raise ValueError("curvature derivatives implemented for order <= 2")


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def arclength_resample(curve: BoundaryCurve, n_s: int) -> SampledGeometry:
    """Resample a curve uniformly in arclength with analytic curvature data.

    The parametric speed is expanded in a Fourier series (machine precision
    for these analytic curves), its antiderivative gives the cumulative
    arclength in closed form, and theta(s) is solved by Newton iteration.
    """
    if n_s < 64:
        raise ValueError("n_s must be at least 64")

    n_fft = max(4096, 4 * _next_pow2(n_s))
    theta_nodes = np.arange(n_fft) * (_TWO_PI / n_fft)
    speed_nodes = curve.speed(theta_nodes)
    spec = np.fft.rfft(speed_nodes)
    mean_speed = spec[0].real / n_fft
    amp = np.abs(spec[1:]) * (2.0 / n_fft)
    keep = np.nonzero(amp > 1e-16 * max(mean_speed, 1.0))[0]
    modes = (keep + 1).astype(float)
    cos_amp = 2.0 * spec[keep + 1].real / n_fft
    sin_amp = -2.0 * spec[keep + 1].imag / n_fft
    if len(keep) and keep[-1] + 1 == n_fft // 2:
        cos_amp[-1] *= 0.5
        sin_amp[-1] *= 0.5

    L = mean_speed * _TWO_PI
    geom = SampledGeometry(
        s_grid=np.zeros(1),
        gamma=np.zeros((1, 2)),
        nu=np.zeros((1, 2)),
        k=np.zeros(1),
        k1=np.zeros(1),
        k2=np.zeros(1),
        L=float(L),
        h_s=L / n_s,
        curve=curve,
        k_max_abs=0.0,
        _mean_speed=float(mean_speed),
        _modes=modes,
        _cos_amp=cos_amp,
        _sin_amp=sin_amp,
        _theta_table=np.append(theta_nodes, _TWO_PI),
        _arc_table=np.zeros(n_fft + 1),
    )
    arc_table = geom._cumlen(geom._theta_table)
    object.__setattr__(geom, "_arc_table", arc_table)

    s_grid = np.arange(n_s) * (L / n_s)
    theta = geom.theta_of_s(s_grid)
    gamma = curve.position(theta)
    d1 = curve.derivative(theta, 1)
    tau = d1 / np.linalg.norm(d1, axis=-1, keepdims=True)
    nu = np.column_stack([tau[:, 1], -tau[:, 0]])
    k = _curvature_from_theta(curve, theta, 0)
    k1 = _curvature_from_theta(curve, theta, 1)
    k2 = _curvature_from_theta(curve, theta, 2)

    dense_k = _curvature_from_theta(curve, geom._theta_table, 0)
    for name, val in [
        ("s_grid", s_grid),
        ("gamma", gamma),
        ("nu", nu),
        ("k", k),
        ("k1", k1),
        ("k2", k2),
        ("k_max_abs", float(np.max(np.abs(dense_k)))),
    ]:
        object.__setattr__(geom, name, val)

    _check_sampled_geometry(geom, dense_k)
    return geom


def _check_sampled_geometry(geom: SampledGeometry, dense_k: np.ndarray) -> None:
    # turning number of a positively oriented simple closed curve is +1;
    # trapezoid on the periodic dense grid is spectrally accurate here
    speed = geom.curve.speed(geom._theta_table[:-1])
    turning = np.sum(dense_k[:-1] * speed) * (_TWO_PI / len(speed)) / _TWO_PI
    if abs(turning - 1.0) > 10.0 * TOL_GEO:
        raise DegenerateCurve(
            f"turning number {turning:.12f} != 1 (non-simple or irregular curve)"
        )

    # grid-resolution simplicity: distinct samples must not collide
    pts = geom.gamma
    n = len(pts)
    step = max(1, n // 4096)
    sub = pts[::step]
    m = len(sub)
    d2 = np.sum((sub[:, None, :] - sub[None, :, :]) ** 2, axis=-1)
    idx = np.arange(m)
    ring = np.minimum(np.abs(idx[:, None] - idx[None, :]), m - np.abs(idx[:, None] - idx[None, :]))
    mask = ring > 2
    if np.any(d2[mask] < (0.25 * geom.h_s * step) ** 2):
        raise DegenerateCurve("sampled curve self-intersects at grid resolution")


# ---------------------------------------------------------------------------
# Robin arc and curvature maxima


@dataclass(frozen=True)
class RobinArc:
    """The Robin portion Gamma = gamma((0, ell)) of the boundary."""

    ell: float

    def validate(self, L: float) -> None:
        if not (0.0 < self.ell < L):
            raise ValueError(f"arc length ell={self.ell} must lie in (0, L={L})")


@dataclass(frozen=True)
class CurvatureMaxInfo:
    """Location and order of the curvature maximum on the closed arc [0, ell].

    ``m`` is the order of the first nonvanishing arclength derivative of k at
    the maximum (0 for the constant-curvature class) and ``dm`` its value.
    """

    k_star: float
    s_star: float
    location_class: str  # constant | interior | endpoint_0 | endpoint_ell
    m: int
    dm: float


_DENSE_ARC = 4097


def arc_curvature_sup(geom: SampledGeometry, arc: RobinArc) -> tuple[float, float]:
    """sup of k on [0, ell] and its location, refined to machine precision."""
    arc.validate(geom.L)
    s = np.linspace(0.0, arc.ell, _DENSE_ARC)
    k = geom.curvature(s)
    i = int(np.argmax(k))
    s_star, k_star = float(s[i]), float(k[i])
    if 0 < i < _DENSE_ARC - 1:
        s_ref = _refine_interior_max(geom, s_star, s[1] - s[0], arc.ell)
        if s_ref is not None:
            k_ref = float(geom.curvature(s_ref))
            if k_ref >= k_star:
                s_star, k_star = float(s_ref), k_ref
    return k_star, s_star


def _refine_interior_max(geom, s0: float, h: float, ell: float):
    # Newton on k'(s) = 0 seeded at the discrete argmax
    s = s0
    for _ in range(40):
        d1 = float(geom.curvature(s, 1))
        d2 = float(geom.curvature(s, 2))
        if d2 >= 0.0 or not math.isfinite(d2):
            return None
        step = d1 / d2
        s_new = min(max(s - step, 0.0), ell)
        if abs(s_new - s) < 1e-14 * max(ell, 1.0):
            s = s_new
            break
        s = s_new
    if abs(s - s0) > 2.0 * h:
        return None
    return s


def max_curvature_on_arc(geom: SampledGeometry, arc: RobinArc) -> CurvatureMaxInfo:
    """Classify the curvature maximum on [0, ell].

    Supported orders: m in {1, 2} at an endpoint, m = 2 in the interior
    (even orders only for interior maxima).  Two separated maxima within
    TOL_GEO of each other raise AmbiguousMaximum; flatter degeneracies than
    the supported set raise UnsupportedRegime.
    """
    arc.validate(geom.L)
    if arc.ell < 32 * geom.h_s:
        raise ValueError("arc must cover at least 32 sample points; increase n_s")

    s = np.linspace(0.0, arc.ell, _DENSE_ARC)
    k = geom.curvature(s)
    k_hi, k_lo = float(np.max(k)), float(np.min(k))
    if k_hi - k_lo <= TOL_GEO:
        return CurvatureMaxInfo(
            k_star=k_hi, s_star=0.0, location_class="constant", m=0, dm=0.0
        )

    near = k >= k_hi - TOL_GEO
    clusters = _contiguous_runs(near)
    if len(clusters) > 1:
        locs = ", ".join(f"s={s[a]:.6g}..{s[b]:.6g}" for a, b in clusters)
        raise AmbiguousMaximum(f"multiple curvature maxima within TOL_GEO: {locs}")

    a, b = clusters[0]
    i = a + int(np.argmax(k[a : b + 1]))
    if a == 0:
        return _classify_endpoint(geom, 0.0, "endpoint_0")
    if b == _DENSE_ARC - 1:
        return _classify_endpoint(geom, arc.ell, "endpoint_ell")

    # interior: quadratic fit through the three neighbors, then Newton polish
    h = s[1] - s[0]
    km, k0, kp = k[i - 1], k[i], k[i + 1]
    denom = km - 2.0 * k0 + kp
    s_star = s[i] if denom >= 0 else s[i] + 0.5 * h * (km - kp) / denom
    s_ref = _refine_interior_max(geom, float(s_star), h, arc.ell)
    if s_ref is not None:
        s_star = s_ref
    s_star = float(s_star)
    k_star = max(float(geom.curvature(s_star)), k_hi)
    d2 = float(geom.curvature(s_star, 2))
    if abs(d2) <= TOL_DERIV:
        raise UnsupportedRegime(
            f"interior maximum flatter than quadratic at s={s_star:.6g} "
            f"(|k''| = {abs(d2):.2e})"
        )
    return CurvatureMaxInfo(
        k_star=k_star, s_star=s_star, location_class="interior", m=2, dm=d2
    )


def _classify_endpoint(geom, s_star: float, which: str) -> CurvatureMaxInfo:
    d1 = float(geom.curvature(s_star, 1))
    d2 = float(geom.curvature(s_star, 2))
    k_star = float(geom.curvature(s_star))
    # derivative of k in the direction pointing into the arc
    inward_slope = d1 if which == "endpoint_0" else -d1
    # m = 1 needs k strictly decreasing into the arc
    if inward_slope < -TOL_DERIV:
        return CurvatureMaxInfo(
            k_star=k_star, s_star=s_star, location_class=which, m=1, dm=d1
        )
    if abs(d1) <= TOL_DERIV and d2 < -TOL_DERIV:
        return CurvatureMaxInfo(
            k_star=k_star, s_star=s_star, location_class=which, m=2, dm=d2
        )
    raise UnsupportedRegime(
        f"endpoint maximum at s={s_star:.6g} has k'={d1:.3e}, k''={d2:.3e}; "
        "supported orders are m=1 (strict slope) and m=2 (flat vertex)"
    )


def _contiguous_runs(mask: np.ndarray):
    runs = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs
