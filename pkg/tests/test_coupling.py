"""Coupling matrix families and the spectral/Cholesky precomputations.

Ground truth: hand-computed small matrices, numpy.linalg factorizations,
and structural invariants (symmetry, diagonal conventions, spectra).
"""
import numpy as np
import pytest

from pottsmc.coupling import (
    AGPrecomp,
    CouplingMatrix,
    DiagonalConvention,
    Family,
    LatticeScale,
    LowRankPrecomp,
    curie_weiss,
    custom,
    erdos_renyi,
    hopfield,
    lattice_2d,
    load_coupling,
    precompute_ag,
    precompute_lowrank,
    save_coupling,
    sk,
)
from pottsmc.errors import DegenerateGraph, NotPositiveDefinite
from pottsmc.numerics import AG_INVERSE_TOL, RngStream


class TestLattice2D:
    def test_3x3_adjacency(self):
        c = lattice_2d(3)
        A = c.entries
        assert A.shape == (9, 9)
        assert c.family is Family.LATTICE2D
        assert c.diagonal_convention is DiagonalConvention.ZEROED
        # row-major sites: site 4 (center) touches 1, 3, 5, 7
        np.testing.assert_array_equal(np.nonzero(A[4])[0], [1, 3, 5, 7])
        # corner site 0 touches 1 and 3 only
        np.testing.assert_array_equal(np.nonzero(A[0])[0], [1, 3])
        assert set(np.unique(A)) == {0.0, 1.0}

    def test_edge_count(self):
        A = lattice_2d(4).entries
        assert A.sum() == 2 * 2 * 4 * 3  # 2E with E = 2*side*(side-1)

    def test_average_degree_scaling(self):
        c = lattice_2d(3, scale=LatticeScale.AVERAGE_DEGREE)
        # 12 edges over 9 sites: mean degree 8/3
        np.testing.assert_allclose(c.entries.max(), 3.0 / 8.0)
        assert c.entries.sum() == pytest.approx(24 * 3.0 / 8.0)

    def test_symmetry_and_zero_diagonal(self):
        A = lattice_2d(5).entries
        np.testing.assert_array_equal(A, A.T)
        np.testing.assert_array_equal(np.diag(A), np.zeros(25))


class TestCurieWeiss:
    def test_entries(self):
        c = curie_weiss(5)
        expected = (np.ones((5, 5)) - np.eye(5)) / 5.0
        np.testing.assert_array_equal(c.entries, expected)
        assert c.family is Family.CURIE_WEISS

    def test_spectrum(self):
        # (J - I)/n has eigenvalues (n-1)/n once and -1/n repeated
        n = 8
        vals = np.linalg.eigvalsh(curie_weiss(n).entries)
        np.testing.assert_allclose(vals[-1], (n - 1) / n, atol=1e-12)
        np.testing.assert_allclose(vals[:-1], -np.ones(n - 1) / n, atol=1e-12)


class TestErdosRenyi:
    def test_determinism_and_structure(self):
        a = erdos_renyi(12, 0.4, RngStream(5, 0))
        b = erdos_renyi(12, 0.4, RngStream(5, 0))
        np.testing.assert_array_equal(a.entries, b.entries)
        np.testing.assert_array_equal(a.entries, a.entries.T)
        np.testing.assert_array_equal(np.diag(a.entries), np.zeros(12))

    def test_mean_degree_normalization(self):
        c = erdos_renyi(30, 0.3, RngStream(9, 0))
        A = c.entries
        w = np.unique(A[A > 0])
        assert w.size == 1  # single positive weight 1/mean_degree
        edges = np.count_nonzero(np.triu(A))
        mean_deg = 2 * edges / 30
        np.testing.assert_allclose(w[0], 1.0 / mean_deg)

    def test_empty_graph_raises(self):
        with pytest.raises(DegenerateGraph):
            erdos_renyi(6, 1e-12, RngStream(1, 0))


class TestSK:
    def test_scale_and_symmetry(self):
        n = 50
        c = sk(n, RngStream(3, 0))
        A = c.entries
        np.testing.assert_array_equal(A, A.T)
        np.testing.assert_array_equal(np.diag(A), np.zeros(n))
        # off-diagonal entries are N(0, 1/n)
        off = A[np.triu_indices(n, 1)]
        assert abs(off.std() * np.sqrt(n) - 1.0) < 0.1

    def test_determinism(self):
        np.testing.assert_array_equal(
            sk(10, RngStream(4, 0)).entries, sk(10, RngStream(4, 0)).entries
        )


class TestHopfield:
    def test_gram_structure(self):
        c = hopfield(10, 3, RngStream(8, 0))
        A = c.entries
        assert c.diagonal_convention is DiagonalConvention.RETAINED
        np.testing.assert_array_equal(A, A.T)
        # diagonal keeps d/max(n,d) since each pattern entry squares to 1
        np.testing.assert_allclose(np.diag(A), np.full(10, 3 / 10), atol=1e-15)

    def test_positive_semidefinite_rank_d(self):
        c = hopfield(16, 4, RngStream(2, 0))
        vals = np.linalg.eigvalsh(c.entries)
        assert vals.min() > -1e-12
        assert (vals > 1e-10).sum() <= 4

    def test_d_exceeds_n_scaling(self):
        c = hopfield(4, 9, RngStream(6, 0))
        # normalization switches to 1/d when d > n
        np.testing.assert_allclose(np.diag(c.entries), np.ones(4), atol=1e-15)


class TestCouplingValidation:
    def test_asymmetric_rejected(self):
        m = np.array([[0.0, 1.0], [0.5, 0.0]])
        with pytest.raises(ValueError):
            custom(m)

    def test_nonzero_diagonal_with_zeroed_convention_rejected(self):
        m = np.array([[0.5, 1.0], [1.0, 0.0]])
        with pytest.raises(ValueError):
            CouplingMatrix(m, Family.CUSTOM, DiagonalConvention.ZEROED)

    def test_custom_retains_diagonal_by_default(self):
        m = np.array([[0.5, 1.0], [1.0, -0.25]])
        c = custom(m)
        assert c.diagonal_convention is DiagonalConvention.RETAINED
        np.testing.assert_array_equal(c.entries, m)
        assert c.n == 2


class TestSaveLoadRoundtrip:
    def test_exact_roundtrip(self, tmp_path):
        c = sk(7, RngStream(13, 0))
        path = tmp_path / "coupling.csv"
        save_coupling(c, path)
        back = load_coupling(path)
        np.testing.assert_array_equal(back.entries, c.entries)
        assert back.family is c.family
        assert back.diagonal_convention is c.diagonal_convention

    def test_header_format(self, tmp_path):
        c = curie_weiss(3)
        path = tmp_path / "cw.csv"
        save_coupling(c, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "3,CurieWeiss,Zeroed"
        assert len(lines) == 4

    def test_retained_diagonal_roundtrip(self, tmp_path):
        c = hopfield(5, 2, RngStream(21, 0))
        path = tmp_path / "h.csv"
        save_coupling(c, path)
        back = load_coupling(path)
        np.testing.assert_array_equal(back.entries, c.entries)
        assert back.diagonal_convention is DiagonalConvention.RETAINED


class TestPrecomputeAG:
    @pytest.mark.parametrize("make", [
        lambda: lattice_2d(3),
        lambda: sk(12, RngStream(1, 0)),
        lambda: hopfield(10, 3, RngStream(1, 0)),
        lambda: curie_weiss(6),
    ])
    def test_invariants(self, make):
        c = make()
        beta = 0.7
        pre = precompute_ag(c, beta)
        assert isinstance(pre, AGPrecomp)
        B = pre.B
        n = c.n
        # B = beta * (A + shift I), strictly positive definite
        np.testing.assert_allclose(
            B, beta * (c.entries + pre.shift * np.eye(n)), rtol=1e-12, atol=1e-15
        )
        assert np.linalg.eigvalsh(B).min() > 0
        lam_min = np.linalg.eigvalsh(c.entries).min()
        assert pre.shift >= abs(lam_min)
        # chol_Binv L satisfies L L' B ~ I within the stated residual
        L = pre.chol_Binv
        resid = np.linalg.norm(L @ L.T @ B - np.eye(n)) / np.sqrt(n)
        assert resid <= AG_INVERSE_TOL

    def test_beta_enters_linearly(self):
        c = lattice_2d(2)
        p1 = precompute_ag(c, 0.5)
        p2 = precompute_ag(c, 1.0)
        np.testing.assert_allclose(2 * p1.B, p2.B, rtol=1e-12)

    def test_rejects_nonfinite(self):
        m = np.array([[0.0, np.inf], [np.inf, 0.0]])
        with pytest.raises((ValueError, NotPositiveDefinite)):
            precompute_ag(custom(m, DiagonalConvention.ZEROED), 1.0)


class TestPrecomputeLowRank:
    def test_curie_weiss_rank_one(self):
        lr = precompute_lowrank(curie_weiss(20), 0.9, 1e-10)
        assert lr.k == 1
        # B = beta * J / n is rank one with eigenvalue beta
        np.testing.assert_allclose(lr.mu[0], 0.9, atol=1e-10)

    def test_hopfield_rank_at_most_d_plus_one(self):
        for d in (1, 3, 6):
            lr = precompute_lowrank(hopfield(24, d, RngStream(d, 0)), 1.0, 1e-10)
            assert 1 <= lr.k <= d + 1

    def test_eigenvectors_orthonormal_and_descending(self):
        lr = precompute_lowrank(sk(15, RngStream(7, 0)), 1.2, 1e-10)
        assert (np.diff(lr.mu) <= 1e-12).all()
        assert (lr.mu > 1e-10).all()
        gram = lr.P.T @ lr.P
        np.testing.assert_allclose(gram, np.eye(lr.k), atol=1e-10)

    def test_truncated_matrix_reconstruction(self):
        c = sk(10, RngStream(19, 0))
        beta = 0.8
        lr = precompute_lowrank(c, beta, 1e-10)
        lam_min = np.linalg.eigvalsh(c.entries).min()
        B = beta * (c.entries + abs(lam_min) * np.eye(10))
        # with epsilon below the noise floor of B's spectrum the
        # truncation reproduces B up to the dropped tail
        np.testing.assert_allclose(lr.truncated_matrix(), B, atol=1e-8)

    def test_large_epsilon_drops_everything(self):
        lr = precompute_lowrank(curie_weiss(6), 0.5, 10.0)
        assert lr.k == 0
        assert lr.mu.shape == (0,)
        assert lr.P.shape == (6, 0)
        np.testing.assert_array_equal(lr.truncated_matrix(), np.zeros((6, 6)))

    def test_k_counts_spectrum_of_shifted_matrix(self):
        c = sk(12, RngStream(23, 0))
        beta = 1.1
        eps = 0.3
        lr = precompute_lowrank(c, beta, eps)
        lam = np.linalg.eigvalsh(c.entries)
        mu_all = beta * (lam + abs(lam.min()))
        assert lr.k == int((mu_all > eps).sum())
