"""Symmetric pencil assembly and deterministic lowest-eigenpair solves.

All 1D quadratic forms in the package are discretized here with piecewise
linear finite elements, so the discrete min-max principle inherits every
form ordering used by the analysis (up to the one-sided Ritz bias).  The
solver takes a dense direct path for small pencils and shift-invert Lanczos
with a sparse factorization beyond, with a fixed starting vector so repeated
runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BadGrid, FactorizationFailure, NoConvergence

TOL_RES = 1e-9       # relative residual ||Kv - lam Mv|| <= TOL_RES (|lam|+1) ||v||_M
TOL_EIG = 1e-10      # dedup tolerance for "strictly ascending" validation
DENSE_DOF_LIMIT = 4000

_GAUSS_OFF = 0.5 / np.sqrt(3.0)  # 2-point Gauss offsets on the unit cell


@dataclass(frozen=True)
class SymmetricPencil:
    """Stiffness/mass pair (K, M) with K symmetric and M s.p.d."""

    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    dof: int
    bandwidth: int

    @classmethod
    def from_matrices(cls, stiffness, mass) -> "SymmetricPencil":
        K = sp.csr_matrix(stiffness)
        M = sp.csr_matrix(mass)
        if K.shape != M.shape or K.shape[0] != K.shape[1]:
            raise ValueError("stiffness and mass must be square of equal size")
        coo = K.tocoo()
        bw = int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0
        return cls(stiffness=K, mass=M, dof=K.shape[0], bandwidth=bw)


@dataclass(frozen=True)
class Spectrum:
    """Ascending lowest eigenvalues with optional M-orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    dof: int
    h: float
    residual_norms: np.ndarray


def _coeff_values(coeff, x, grid, period=None):
    if callable(coeff):
        return np.asarray(coeff(x), dtype=float) * np.ones_like(x)
    arr = np.asarray(coeff, dtype=float)
    if arr.ndim == 0:
        return np.full_like(x, float(arr))
    if arr.shape != grid.shape:
        raise ValueError("nodal coefficient array must match the grid")
    if period is not None:
        return np.interp(x, grid, arr, period=period)
    return np.interp(x, grid, arr)


def assemble_form_1d(grid, coeff_a, potential_q, bc: str, robin_beta: float | None = None):
    """Discretize  integral( a |f'|^2 + q |f|^2 )  with P1 elements.

    ``bc`` is one of "dirichlet", "periodic" or "robin_dirichlet" (Robin at
    the left endpoint with strength robin_beta contributing -beta |f(0)|^2,
    Dirichlet at the right).  For the periodic case the grid covers one
    period [x0, x0 + n*h) without repeating the wrap node.  Coefficients may
    be scalars, callables or nodal arrays; they are sampled at the 2-point
    Gauss nodes of every cell.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 8:
        raise BadGrid("grid must be one-dimensional with at least 8 points")
    h = grid[1] - grid[0]
    if h <= 0 or np.max(np.abs(np.diff(grid) - h)) > 1e-12 * max(abs(h), 1.0):
        raise BadGrid("grid must be uniform")
    if bc not in ("dirichlet", "periodic", "robin_dirichlet"):
        raise ValueError(f"unknown bc {bc!r}")
    if bc == "robin_dirichlet" and robin_beta is None:
        raise ValueError("robin_dirichlet requires robin_beta")

    n = len(grid)
    periodic = bc == "periodic"
    n_cells = n if periodic else n - 1
    left = np.arange(n_cells)
    right = (left + 1) % n if periodic else left + 1
    x_left = grid[:n_cells]
    period = n * h if periodic else None

    mid = x_left + 0.5 * h
    xg = np.stack([mid - _GAUSS_OFF * h, mid + _GAUSS_OFF * h], axis=1)
    a_g = np.stack(
        [_coeff_values(coeff_a, xg[:, 0], grid, period),
         _coeff_values(coeff_a, xg[:, 1], grid, period)],
        axis=1,
    )
    q_g = np.stack(
        [_coeff_values(potential_q, xg[:, 0], grid, period),
         _coeff_values(potential_q, xg[:, 1], grid, period)],
        axis=1,
    )
    if not (np.all(np.isfinite(a_g)) and np.all(np.isfinite(q_g))):
        raise ValueError("coefficients must be finite on the grid")

    # basis values at the two Gauss nodes: phi_left, phi_right
    lam = np.array([0.5 + _GAUSS_OFF, 0.5 - _GAUSS_OFF])  # phi_left at g1, g2
    phi = np.array([[lam[0], 1 - lam[0]], [lam[1], 1 - lam[1]]])  # (gauss, local)

    a_eff = 0.5 * (a_g[:, 0] + a_g[:, 1])
    k_stiff = np.einsum("c,ij->cij", a_eff / h, np.array([[1.0, -1.0], [-1.0, 1.0]]))
    w = 0.5 * h  # Gauss weight per node
    k_pot = np.einsum("cg,gi,gj->cij", q_g * w, phi, phi)
    m_loc = (h / 6.0) * np.array([[2.0, 1.0], [1.0, 2.0]])
    m_cells = np.broadcast_to(m_loc, (n_cells, 2, 2))

    conn = np.stack([left, right], axis=1)
    rows = np.repeat(conn, 2, axis=1).ravel()
    cols = np.tile(conn, (1, 2)).ravel()
    K = sp.coo_matrix(((k_stiff + k_pot).ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((m_cells.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    if bc == "dirichlet":
        active = np.arange(1, n - 1)
    elif bc == "robin_dirichlet":
        active = np.arange(0, n - 1)
        K = K.tolil()
        K[0, 0] -= robin_beta
        K = K.tocsr()
    else:
        active = np.arange(n)
    K = K[active][:, active]
    M = M[active][:, active]
    return SymmetricPencil.from_matrices(K, M)


def gershgorin_lower_bound(pencil: SymmetricPencil) -> float:
    """Crude lower bound for the smallest generalized eigenvalue."""
    K, M = pencil.stiffness, pencil.mass
    knorm = float(np.max(np.abs(K).sum(axis=1)))
    mdiag = M.diagonal()
    moff = np.asarray(np.abs(M).sum(axis=1)).ravel() - np.abs(mdiag)
    dd = float(np.min(mdiag - moff))
    if dd <= 0:
        dd = float(np.min(mdiag)) * 0.1
    return -knorm / dd - 1.0


def _m_orthonormalize(vecs: np.ndarray, M) -> np.ndarray:
    G = vecs.T @ (M @ vecs)
    R = np.linalg.cholesky((G + G.T) / 2.0).T
    return np.linalg.solve(R.T, vecs.T).T


def lowest_eigs(pencil: SymmetricPencil, n: int, shift: float | None = None) -> Spectrum:
    """The n smallest eigenvalues of K v = lambda M v with eigenvectors.

    Dense direct solve for dof <= 4000; shift-invert Lanczos with a sparse
    factorization beyond (starting vector all-ones, M-normalized, so results
    are deterministic).  ``shift`` must be strictly below the lowest
    eigenvalue; if the factorization at the shift fails it is retried once
    at shift - 1 before raising FactorizationFailure.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > pencil.dof // 4:
        raise ValueError(f"n={n} exceeds dof/4 = {pencil.dof // 4}")

    K, M = pencil.stiffness, pencil.mass
    if pencil.dof <= DENSE_DOF_LIMIT:
        vals, vecs = sla.eigh(
            K.toarray(), M.toarray(), subset_by_index=(0, n - 1)
        )
    else:
        if shift is None:
            shift = gershgorin_lower_bound(pencil)
        v0 = np.ones(pencil.dof)
        v0 /= np.sqrt(v0 @ (M @ v0))
        ncv = min(pencil.dof - 1, max(2 * n + 1, 40))
        last_err = None
        vals = vecs = None
        for attempt_shift in (shift, shift - 1.0):
            try:
                vals, vecs = spla.eigsh(
                    K, k=n, M=M, sigma=attempt_shift, which="LM", v0=v0, ncv=ncv, tol=0
                )
                break
            except spla.ArpackNoConvergence as exc:
                raise NoConvergence(f"ARPACK did not converge: {exc}") from exc
            except RuntimeError as exc:
                last_err = exc
        if vals is None:
            raise FactorizationFailure(
                f"shift-invert factorization failed at shift {shift} and {shift - 1.0}: {last_err}"
            )

    order = np.argsort(vals)
    vals = np.asarray(vals)[order]
    vecs = np.asarray(vecs)[:, order]
    vecs = _m_orthonormalize(vecs, M)

    mv = M @ vecs
    res = K @ vecs - vals[None, :] * mv
    vnorm = np.sqrt(np.einsum("ij,ij->j", vecs, mv))
    residual_norms = np.linalg.norm(res, axis=0) / np.maximum(vnorm, 1e-300)
    return Spectrum(
        eigenvalues=vals,
        eigenvectors=vecs,
        dof=pencil.dof,
        h=float("nan"),
        residual_norms=residual_norms,
    )
