import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp

from robin_spectra import model_operators as mo
from robin_spectra import spectra1d as s1d
from robin_spectra.errors import BadGrid


def dirichlet_pencil(n_nodes, length=np.pi, q=0.0):
    grid = np.linspace(0.0, length, n_nodes)
    return s1d.assemble_form_1d(grid, 1.0, q, bc="dirichlet")


class TestAssembly:
    def test_dirichlet_laplacian_eigenvalues(self):
        pencil = dirichlet_pencil(2002)
        spec = s1d.lowest_eigs(pencil, 4)
        expect = np.array([1.0, 4.0, 9.0, 16.0])
        assert abs(spec.eigenvalues[0] - 1.0) < 1e-5
        assert np.max(np.abs(spec.eigenvalues - expect) / expect) < 1e-5

    def test_periodic_torus_spectrum(self):
        grid = np.linspace(0.0, 2 * np.pi, 256, endpoint=False)
        pencil = s1d.assemble_form_1d(grid, 1.0, 0.0, bc="periodic")
        spec = s1d.lowest_eigs(pencil, 5)
        assert abs(spec.eigenvalues[0]) < 1e-9
        assert np.allclose(spec.eigenvalues[1:3], 1.0, rtol=1e-3)
        assert np.allclose(spec.eigenvalues[3:5], 4.0, rtol=1e-3)
        # the double eigenvalues agree pairwise far tighter than the FE error
        assert abs(spec.eigenvalues[1] - spec.eigenvalues[2]) < 1e-9

    def test_robin_slab_against_transcendental_oracle(self):
        alpha, r = 10.0, 1.0
        grid = np.linspace(0.0, r, 4000)
        pencil = s1d.assemble_form_1d(grid, 1.0, 0.0, bc="robin_dirichlet", robin_beta=alpha)
        spec = s1d.lowest_eigs(pencil, 3)
        ground = mo.slab_ground(alpha, r)
        positive = mo.slab_positive_eigs(alpha, r, 2)
        assert abs(spec.eigenvalues[0] - ground.E1) <= 1e-6 * alpha**2
        assert np.max(np.abs(spec.eigenvalues[1:] - positive) / positive) < 1e-6

    def test_nonuniform_grid_rejected(self):
        grid = np.concatenate([np.linspace(0, 1, 50), np.linspace(1.1, 2, 50)])
        with pytest.raises(BadGrid):
            s1d.assemble_form_1d(grid, 1.0, 0.0, bc="dirichlet")

    def test_short_grid_rejected(self):
        with pytest.raises(BadGrid):
            s1d.assemble_form_1d(np.linspace(0, 1, 5), 1.0, 0.0, bc="dirichlet")

    def test_unknown_bc_rejected(self):
        with pytest.raises(ValueError):
            s1d.assemble_form_1d(np.linspace(0, 1, 20), 1.0, 0.0, bc="neumann")

    def test_nodal_coefficient_arrays(self):
        grid = np.linspace(0.0, np.pi, 600)
        q_nodes = np.full_like(grid, 2.0)
        pencil = s1d.assemble_form_1d(grid, 1.0, q_nodes, bc="dirichlet")
        spec = s1d.lowest_eigs(pencil, 1)
        assert spec.eigenvalues[0] == pytest.approx(3.0, rel=1e-5)


class TestLowestEigs:
    def test_identity_pencil(self):
        eye = sp.identity(64, format="csr")
        pencil = s1d.SymmetricPencil.from_matrices(eye, eye)
        assert np.allclose(s1d.lowest_eigs(pencil, 3).eigenvalues, 1.0)

    def test_random_pencil_against_dense_oracle(self):
        rng = np.random.default_rng(1234)
        a = rng.standard_normal((50, 50))
        K = (a + a.T) / 2.0
        b = rng.standard_normal((50, 50))
        M = b @ b.T + 50.0 * np.eye(50)
        pencil = s1d.SymmetricPencil.from_matrices(sp.csr_matrix(K), sp.csr_matrix(M))
        ours = s1d.lowest_eigs(pencil, 10).eigenvalues
        oracle = np.sort(sla.eigh(K, M, eigvals_only=True))[:10]
        assert np.max(np.abs(ours - oracle)) < 1e-10

    def test_sparse_path_matches_exact(self):
        pencil = dirichlet_pencil(4500)
        spec = s1d.lowest_eigs(pencil, 3, shift=-1.0)
        assert np.allclose(spec.eigenvalues, [1.0, 4.0, 9.0], rtol=1e-6)

    def test_sparse_path_deterministic(self):
        pencil = dirichlet_pencil(4500)
        s_a = s1d.lowest_eigs(pencil, 3, shift=-1.0)
        s_b = s1d.lowest_eigs(pencil, 3, shift=-1.0)
        assert np.array_equal(s_a.eigenvalues, s_b.eigenvalues)
        assert np.array_equal(s_a.eigenvectors, s_b.eigenvectors)

    def test_shift_retry_on_singular_factorization(self):
        K = sp.diags(np.arange(1.0, 5001.0)).tocsr()
        M = sp.identity(5000, format="csr")
        pencil = s1d.SymmetricPencil.from_matrices(K, M)
        spec = s1d.lowest_eigs(pencil, 2, shift=1.0)  # singular; retried at 0.0
        assert np.allclose(spec.eigenvalues, [1.0, 2.0], atol=1e-10)

    def test_default_shift_bound(self):
        pencil = dirichlet_pencil(4200)
        bound = s1d.gershgorin_lower_bound(pencil)
        spec = s1d.lowest_eigs(pencil, 1)  # no shift given, bound used
        assert bound < spec.eigenvalues[0]

    def test_n_bounds(self):
        pencil = dirichlet_pencil(64)
        with pytest.raises(ValueError):
            s1d.lowest_eigs(pencil, 0)
        with pytest.raises(ValueError):
            s1d.lowest_eigs(pencil, 40)

    def test_m_orthonormality_and_residuals(self):
        pencil = dirichlet_pencil(1500, q=lambda x: np.sin(x) ** 2)
        spec = s1d.lowest_eigs(pencil, 6)
        V = spec.eigenvectors
        G = V.T @ (pencil.mass @ V)
        assert np.max(np.abs(G - np.eye(6))) < 1e-10
        lam = spec.eigenvalues
        assert np.all(spec.residual_norms <= s1d.TOL_RES * (np.abs(lam) + 1.0))

    def test_eigenvalues_ascending(self):
        pencil = dirichlet_pencil(900)
        lam = s1d.lowest_eigs(pencil, 8).eigenvalues
        gaps = np.diff(lam)
        assert np.all(gaps > -s1d.TOL_EIG)


class TestDiscreteProperties:
    def test_minmax_monotone_under_larger_potential(self):
        rng = np.random.default_rng(42)
        grid = np.linspace(0.0, np.pi, 400)
        for _ in range(5):
            q1 = rng.uniform(-3.0, 3.0, size=grid.shape)
            bump = rng.uniform(0.0, 2.0, size=grid.shape)
            p1 = s1d.assemble_form_1d(grid, 1.0, q1, bc="dirichlet")
            p2 = s1d.assemble_form_1d(grid, 1.0, q1 + bump, bc="dirichlet")
            e1 = s1d.lowest_eigs(p1, 5).eigenvalues
            e2 = s1d.lowest_eigs(p2, 5).eigenvalues
            assert np.all(e2 >= e1 - 1e-11)

    def test_mesh_convergence_is_second_order(self):
        errs = []
        for n in (250, 500, 1000):
            lam = s1d.lowest_eigs(dirichlet_pencil(n + 1), 1).eigenvalues[0]
            errs.append(abs(lam - 1.0))
        r1 = errs[0] / errs[1]
        r2 = errs[1] / errs[2]
        assert abs(r1 - 4.0) < 0.6
        assert abs(r2 - 4.0) < 0.6
