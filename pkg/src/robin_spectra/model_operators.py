"""Model 1D operators with (semi-)analytic spectra.

Covers the Robin--Dirichlet slab (-f'' on (0, r) with f'(0) = -alpha f(0),
f(r) = 0), the half-line power wells -f'' + beta t^m f with Dirichlet
condition at 0, their whole-line counterparts, and zeros of the Airy
function.  The Airy function is evaluated in-house (power series for small
arguments, Poincare asymptotics beyond |x| = 5) so the zero computation is a
self-contained audit point rather than a library call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from . import spectra1d
from .errors import ConvergenceFailure, NoConvergence, OutOfRegime

# ---------------------------------------------------------------------------
# Airy function: series + asymptotics, switch at |x| = 5

_AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)    # Ai(0)
_AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)  # Ai'(0)
_SERIES_RADIUS = 5.0


def _airy_series(x: float) -> tuple[float, float]:
    """(Ai, Ai') by the Maclaurin series; accurate for |x| <= ~8."""
    x3 = x * x * x
    # f = sum c_{3k} x^{3k},  c_{3k} = c_{3k-3} / ((3k)(3k-1))
    f = fp = 0.0
    term = 1.0
    k = 0
    while True:
        f += term
        if k > 0:
            fp += 3 * k * term / x if x != 0.0 else 0.0
        k += 1
        term *= x3 / ((3 * k) * (3 * k - 1))
        if abs(term) < 1e-18 * (abs(f) + 1.0) or k > 200:
            break
    # g = sum c_{3k+1} x^{3k+1},  c_{3k+1} = c_{3k-2} / ((3k+1)(3k))
    g = x
    gp = 1.0
    term = x
    k = 0
    while True:
        k += 1
        term *= x3 / ((3 * k + 1) * (3 * k))
        g += term
        gp += (3 * k + 1) * term / x if x != 0.0 else 0.0
        if abs(term) < 1e-18 * (abs(g) + 1.0) or k > 200:
            break
    ai = _AI0 * f + _AIP0 * g
    aip = _AI0 * fp + _AIP0 * gp
    return ai, aip


def _asymptotic_coeffs(n_terms: int = 20) -> tuple[np.ndarray, np.ndarray]:
    u = np.empty(n_terms)
    v = np.empty(n_terms)
    u[0] = v[0] = 1.0
    for k in range(1, n_terms):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1))
        v[k] = u[k] * (6 * k + 1) / (1.0 - 6 * k)
    return u, v


_U_COEF, _V_COEF = _asymptotic_coeffs()


def _oscillatory_sums(zeta: float, coef: np.ndarray) -> tuple[float, float]:
    """(sum (-1)^k c_{2k} zeta^{-2k}, sum (-1)^k c_{2k+1} zeta^{-2k-1}),
    truncated at the smallest term."""
    even = odd = 0.0
    power = 1.0
    best = math.inf
    for j, c in enumerate(coef):
        term = c * power
        if abs(term) > best:
            break
        best = abs(term)
        sign = 1.0 if (j // 2) % 2 == 0 else -1.0
        if j % 2 == 0:
            even += sign * term
        else:
            odd += sign * term
        power /= zeta
    return even, odd


def _decaying_sum(zeta: float, coef: np.ndarray) -> float:
    """sum (-1)^k c_k zeta^{-k}, truncated at the smallest term."""
    total = 0.0
    power = 1.0
    best = math.inf
    for k, c in enumerate(coef):
        term = c * power
        if abs(term) > best:
            break
        best = abs(term)
        total += term if k % 2 == 0 else -term
        power /= zeta
    return total


def airy_ai(x: float) -> float:
    """Ai(x) for real x."""
    return _airy_both(x)[0]


def airy_ai_prime(x: float) -> float:
    """Ai'(x) for real x."""
    return _airy_both(x)[1]


def _airy_both(x: float) -> tuple[float, float]:
    x = float(x)
    if abs(x) <= _SERIES_RADIUS:
        return _airy_series(x)
    if x > 0:
        zeta = (2.0 / 3.0) * x**1.5
        su = _decaying_sum(zeta, _U_COEF)
        sv = _decaying_sum(zeta, _V_COEF)
        pref = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
        return pref * x**-0.25 * su, -pref * x**0.25 * sv
    z = -x
    zeta = (2.0 / 3.0) * z**1.5
    p_sum, q_sum = _oscillatory_sums(zeta, _U_COEF)
    r_sum, s_sum = _oscillatory_sums(zeta, _V_COEF)
    phase = zeta + 0.25 * math.pi
    pref = 1.0 / (math.sqrt(math.pi))
    ai = pref * z**-0.25 * (math.sin(phase) * p_sum - math.cos(phase) * q_sum)
    aip = -pref * z**0.25 * (math.cos(phase) * r_sum + math.sin(phase) * s_sum)
    return ai, aip


def airy_zeros(n: int) -> np.ndarray:
    """a_1 .. a_n with Ai(-a_j) = 0, each verified by a sign-change bracket.

    Seeds come from the classical asymptotic zero formula and are polished by
    Newton iteration on the in-house evaluator.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    zeros = []
    for j in range(1, n + 1):
        t = 3.0 * math.pi * (4 * j - 1) / 8.0
        seed = t ** (2.0 / 3.0) * (1.0 + 5.0 / (48.0 * t * t) - 5.0 / (36.0 * t**4))
        lo, hi = seed - 0.25, seed + 0.25
        flo, fhi = airy_ai(-lo), airy_ai(-hi)
        widen = 0
        while flo * fhi > 0.0 and widen < 8:
            lo -= 0.25
            hi += 0.25
            flo, fhi = airy_ai(-lo), airy_ai(-hi)
            widen += 1
        if flo * fhi > 0.0:
            raise ConvergenceFailure(f"no sign change around Airy zero #{j}")
        x = seed
        for _ in range(60):
            fx = airy_ai(-x)
            dfx = -airy_ai_prime(-x)
            if dfx == 0.0:
                break
            step = fx / dfx
            x_new = x - step
            if not (lo <= x_new <= hi):
                x_new = 0.5 * (lo + hi)
            if airy_ai(-lo) * airy_ai(-x_new) <= 0.0:
                hi = x_new
            else:
                lo = x_new
            if abs(x_new - x) < 1e-15 * x:
                x = x_new
                break
            x = x_new
        if airy_ai(-(x - 1e-8)) * airy_ai(-(x + 1e-8)) > 0.0:
            raise ConvergenceFailure(f"Airy zero #{j} failed bracket verification")
        zeros.append(x)
    return np.asarray(zeros)


# ---------------------------------------------------------------------------
# Robin--Dirichlet slab


@dataclass(frozen=True)
class SlabGroundState:
    """Unique negative eigenvalue data of the slab operator."""

    alpha: float
    r: float
    kappa: float
    E1: float
    psi0_sq: float


def slab_ground(alpha: float, r: float) -> SlabGroundState:
    """Ground state of -f'' on (0, r), f'(0) = -alpha f(0), f(r) = 0.

    The eigenfunction is sinh(kappa (r - t)) with kappa the positive root of
    kappa = alpha tanh(kappa r); E1 = -kappa^2 and |psi(0)|^2 follows from
    the closed-form normalization.  Requires alpha*r > 1 (the regime with a
    negative eigenvalue).
    """
    if alpha <= 0 or r <= 0:
        raise ValueError("alpha and r must be positive")
    if alpha * r <= 1.0:
        raise OutOfRegime(f"alpha*r = {alpha * r:.4g} <= 1: no negative eigenvalue")

    def g(kappa: float) -> float:
        return kappa - alpha * math.tanh(kappa * r)

    lo = 0.5 * alpha * math.tanh(alpha * r)
    tries = 0
    while g(lo) >= 0.0 and tries < 200:
        lo *= 0.5
        tries += 1
    if g(lo) >= 0.0:
        raise ConvergenceFailure("failed to bracket the slab root")
    kappa = brentq(g, lo, alpha, rtol=1e-15, maxiter=200)
    for _ in range(3):
        dg = 1.0 - alpha * r / math.cosh(kappa * r) ** 2
        if dg != 0.0:
            kappa -= g(kappa) / dg
    if abs(g(kappa)) > 1e-12 * kappa:
        raise ConvergenceFailure(f"slab root residual {abs(g(kappa)):.3e}")

    x = kappa * r
    if x < 1e-2:
        ratio = (3.0 / (2.0 * x)) * (1.0 + 2.0 * x * x / 15.0)
    else:
        e2 = math.exp(-2.0 * x)
        ratio = (1.0 - e2) ** 2 / (1.0 - e2 * e2 - 4.0 * x * e2)
    psi0_sq = 2.0 * kappa * ratio
    return SlabGroundState(
        alpha=float(alpha), r=float(r), kappa=float(kappa), E1=-float(kappa) ** 2,
        psi0_sq=float(psi0_sq),
    )


def slab_positive_eigs(alpha: float, r: float, n: int) -> np.ndarray:
    """Lowest n positive slab eigenvalues k^2 with k = alpha tan(k r).

    Roots are bracketed branch by branch between consecutive singularities
    of the tangent, using the pole-free function alpha sin(kr) - k cos(kr).
    """
    if alpha <= 0 or r <= 0:
        raise ValueError("alpha and r must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")

    def f(k: float) -> float:
        return alpha * math.sin(k * r) - k * math.cos(k * r)

    roots = []
    j = 1
    while len(roots) < n and j < n + 8:
        # f is entire, so the bracket may touch the tangent pole at (j-1/2)pi/r
        # where f = +-alpha != 0; the j = 1 branch needs a left margin to skip
        # the trivial root at k = 0.
        lo = (j - 1) * math.pi / r if j > 1 else 1e-8 * 0.5 * math.pi / r
        hi = (j - 0.5) * math.pi / r
        if f(lo) * f(hi) < 0.0:
            k = brentq(f, lo, hi, rtol=1e-15, maxiter=200)
            roots.append(k * k)
        j += 1
    if len(roots) < n:
        raise ConvergenceFailure("failed to bracket enough positive slab roots")
    return np.asarray(roots)


# ---------------------------------------------------------------------------
# Power wells S_{m,beta} (half-line) and Z_m (whole line)


@dataclass(frozen=True)
class PowerWellSpectrum:
    """Lowest eigenvalues of -f'' + beta t^m f (Dirichlet-truncated)."""

    m: int
    beta: float
    halfline: bool
    eigenvalues: np.ndarray
    t_box: float
    dof: int


def _solve_well(m: int, beta: float, halfline: bool, n: int, t_box: float, dof: int):
    if halfline:
        grid = np.linspace(0.0, t_box, dof)
    else:
        grid = np.linspace(-t_box, t_box, dof)
    pencil = spectra1d.assemble_form_1d(
        grid, 1.0, lambda t: beta * np.abs(t) ** m, bc="dirichlet"
    )
    spec = spectra1d.lowest_eigs(pencil, n, shift=-1.0)
    return spec.eigenvalues


def power_well_spectrum(
    m: int, beta: float, halfline: bool, n: int, rtol: float = 1e-8
) -> PowerWellSpectrum:
    """Eigenvalues of the power well, Dirichlet walls beyond the classical
    turning point (safety factor 10), refined until stable to ``rtol``.

    The whole-line variant requires even m.
    """
    if m < 1 or int(m) != m:
        raise ValueError("m must be a positive integer")
    if beta <= 0:
        raise ValueError("beta must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    if not halfline and m % 2 != 0:
        raise ValueError("whole-line well requires even m")
    m = int(m)

    # settle the truncation box with a cheap coarse solve
    e_est = 1.0
    t_box = None
    for _ in range(12):
        t_box = (10.0 * max(e_est, 1.0) / beta) ** (1.0 / m)
        eigs = _solve_well(m, beta, halfline, n, t_box, 4097)
        e_new = float(eigs[-1])
        if beta * t_box**m >= 10.0 * e_new * 0.999:
            e_est = e_new
            break
        e_est = e_new
    else:
        raise NoConvergence("turning-point box did not settle")

    prev = None
    dof = 8192
    while dof <= 2_097_152:
        eigs = _solve_well(m, beta, halfline, n, t_box, dof + 1)
        if prev is not None:
            rel = np.max(np.abs(eigs - prev) / np.maximum(np.abs(eigs), 1e-300))
            if rel <= rtol:
                return PowerWellSpectrum(
                    m=m, beta=float(beta), halfline=bool(halfline),
                    eigenvalues=eigs, t_box=float(t_box), dof=dof + 1,
                )
        prev = eigs
        dof *= 2
    raise NoConvergence(
        f"power well spectrum did not stabilize to {rtol:g} within the dof cap"
    )


@lru_cache(maxsize=None)
def _cached_well_eigs(m: int, halfline: bool, n: int) -> tuple:
    return tuple(power_well_spectrum(m, 1.0, halfline, n).eigenvalues)


def reference_well_level(m: int, halfline: bool, n: int) -> float:
    """E_n of the unit-coefficient well, cached across prediction calls."""
    return _cached_well_eigs(m, halfline, max(n, 1))[n - 1]
