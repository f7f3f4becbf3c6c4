"""Exact enumeration oracle, truncation certificates, KL helpers.

Ground truth: independent brute-force enumeration via itertools.product
(a separate code path from the chunked table builder), plus closed-form
values on 1- and 2-site systems.
"""
import itertools
import math

import numpy as np
import pytest

from pottsmc.coupling import (
    DiagonalConvention,
    curie_weiss,
    custom,
    hopfield,
    lattice_2d,
)
from pottsmc.errors import TooLarge
from pottsmc.model import (
    ENUMERATION_GUARD,
    PottsModel,
    exact_summary,
    hamiltonian,
    hamiltonian_table,
    kl_between,
    lemma1_certificate,
    one_hot,
    phi_table,
    shifted_model,
    summary_phi,
    truncated_model,
)
from pottsmc.numerics import RngStream


def brute_force(model):
    """Reference pmf and E[phi] by explicit iteration over q^n states."""
    n, q, beta = model.n, model.q, model.beta
    A = model.coupling.entries
    phis = []
    for x in itertools.product(range(q), repeat=n):
        xa = np.array(x)
        same = (xa[:, None] == xa[None, :])
        phis.append(beta * A[same].sum())
    phis = np.array(phis)
    w = np.exp(phis / 2 - phis.max() / 2)
    Z = w.sum()
    log_z = math.log(Z) + phis.max() / 2
    pmf = w / Z
    return log_z, pmf, float(pmf @ phis)


class TestSummaryPhi:
    def test_two_node_hand_value(self):
        c = custom(np.array([[0.0, 1.5], [1.5, 0.0]]))
        m = PottsModel(c, beta=0.8, q=2)
        # equal states: phi = beta * (A01 + A10) = 0.8 * 3.0
        assert summary_phi(m, np.array([1, 1])) == pytest.approx(2.4)
        assert summary_phi(m, np.array([0, 1])) == pytest.approx(0.0)
        assert hamiltonian(m, np.array([1, 1])) == pytest.approx(1.2)

    def test_retained_diagonal_contributes(self):
        c = custom(np.array([[0.5, 0.0], [0.0, 0.5]]))
        m = PottsModel(c, beta=1.0, q=2)
        # diagonal always matches itself
        assert summary_phi(m, np.array([0, 1])) == pytest.approx(1.0)

    def test_matches_one_hot_quadratic_form(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal((6, 6))
        c = custom((a + a.T) / 2)
        m = PottsModel(c, beta=0.9, q=4)
        x = rng.integers(0, 4, 6)
        val = sum(
            one_hot(x, ell) @ c.entries @ one_hot(x, ell) for ell in range(4)
        )
        assert summary_phi(m, x) == pytest.approx(0.9 * val)

    def test_wrong_length_raises(self):
        m = PottsModel(lattice_2d(2), 0.5, 2)
        with pytest.raises(ValueError):
            summary_phi(m, np.array([0, 1]))


class TestExactSummary:
    @pytest.mark.parametrize("q,beta", [(2, 0.45), (3, 0.7)])
    def test_against_brute_force_lattice(self, q, beta):
        m = PottsModel(lattice_2d(2), beta, q)
        log_z, pmf, mean_phi = brute_force(m)
        summ = exact_summary(m, want_pmf=True)
        assert summ.log_partition == pytest.approx(log_z, rel=1e-12)
        assert summ.mean_phi == pytest.approx(mean_phi, rel=1e-12)
        np.testing.assert_allclose(summ.pmf, pmf, rtol=1e-12)

    def test_against_brute_force_retained_diagonal(self):
        c = hopfield(5, 2, RngStream(11, 0))
        m = PottsModel(c, 1.1, 3)
        log_z, pmf, mean_phi = brute_force(m)
        summ = exact_summary(m, want_pmf=True)
        assert summ.log_partition == pytest.approx(log_z, rel=1e-12)
        assert summ.mean_phi == pytest.approx(mean_phi, rel=1e-12)

    def test_streaming_matches_table_path(self):
        m = PottsModel(curie_weiss(7), 0.6, 3)
        with_pmf = exact_summary(m, want_pmf=True)
        streaming = exact_summary(m, want_pmf=False)
        assert streaming.pmf is None
        assert streaming.log_partition == pytest.approx(
            with_pmf.log_partition, rel=1e-12
        )
        assert streaming.mean_phi == pytest.approx(with_pmf.mean_phi, rel=1e-12)

    def test_pmf_normalized(self):
        m = PottsModel(lattice_2d(3), 0.44, 2)
        summ = exact_summary(m, want_pmf=True)
        assert summ.pmf.sum() == pytest.approx(1.0, abs=1e-10)
        assert (summ.pmf > 0).all()

    def test_single_site(self):
        # n=1 with zero coupling: uniform over q, log Z = log q
        c = custom(np.zeros((1, 1)), DiagonalConvention.ZEROED)
        m = PottsModel(c, 1.0, 4)
        summ = exact_summary(m, want_pmf=True)
        assert summ.log_partition == pytest.approx(math.log(4))
        np.testing.assert_allclose(summ.pmf, np.full(4, 0.25))

    def test_size_guard(self):
        m = PottsModel(curie_weiss(30), 0.5, 3)
        assert 3 ** 30 > ENUMERATION_GUARD
        with pytest.raises(TooLarge):
            exact_summary(m)

    def test_phi_table_is_twice_hamiltonian_table(self):
        m = PottsModel(lattice_2d(2), 0.7, 3)
        np.testing.assert_allclose(phi_table(m), 2 * hamiltonian_table(m))


class TestModelValidation:
    def test_q_below_two_rejected(self):
        with pytest.raises(ValueError):
            PottsModel(lattice_2d(2), 0.5, 1)

    def test_nonpositive_beta_rejected(self):
        with pytest.raises(ValueError):
            PottsModel(lattice_2d(2), 0.0, 2)
        with pytest.raises(ValueError):
            PottsModel(lattice_2d(2), -0.1, 2)


class TestKL:
    def test_self_kl_zero(self):
        m = PottsModel(lattice_2d(2), 0.5, 2)
        kl_pq, kl_qp = kl_between(m, m)
        assert kl_pq == pytest.approx(0.0, abs=1e-12)
        assert kl_qp == pytest.approx(0.0, abs=1e-12)

    def test_nonnegative_and_asymmetric(self):
        m1 = PottsModel(lattice_2d(2), 0.3, 2)
        m2 = PottsModel(lattice_2d(2), 0.9, 2)
        kl12, kl21 = kl_between(m1, m2)
        assert kl12 > 0 and kl21 > 0
        assert kl12 != pytest.approx(kl21, rel=1e-3)
        # directions swap when the arguments do
        back = kl_between(m2, m1)
        assert back[0] == pytest.approx(kl21, rel=1e-12)
        assert back[1] == pytest.approx(kl12, rel=1e-12)

    def test_hand_value_two_node(self):
        # P(same)=p, Q(same)=r over 4 states: KL = p log(p/r) + (1-p) log((1-p)/(1-r))
        c = custom(np.array([[0.0, 1.0], [1.0, 0.0]]))
        m1 = PottsModel(c, 0.4, 2)
        m2 = PottsModel(c, 1.0, 2)

        def p_same(beta):
            w = math.exp(beta)  # phi/2 = beta on the two equal states
            return 2 * w / (2 * w + 2)

        p, r = p_same(0.4), p_same(1.0)
        expected = p * math.log(p / r) + (1 - p) * math.log((1 - p) / (1 - r))
        assert kl_between(m1, m2)[0] == pytest.approx(expected, rel=1e-10)


class TestShiftedAndTruncated:
    def test_shifted_model_same_pmf(self):
        base = PottsModel(lattice_2d(2), 0.8, 3)
        shifted = shifted_model(base)
        p0 = exact_summary(base, want_pmf=True).pmf
        p1 = exact_summary(shifted, want_pmf=True).pmf
        np.testing.assert_allclose(p1, p0, rtol=1e-10)
        lam_min = np.linalg.eigvalsh(base.coupling.entries).min()
        np.testing.assert_allclose(
            np.diag(shifted.coupling.entries), np.full(4, abs(lam_min)), atol=1e-12
        )

    def test_truncated_model_tiny_epsilon_matches_shifted(self):
        base = PottsModel(curie_weiss(5), 0.7, 2)
        trunc, lr = truncated_model(base, 1e-12)
        shifted = shifted_model(base)
        p_t = exact_summary(trunc, want_pmf=True).pmf
        p_s = exact_summary(shifted, want_pmf=True).pmf
        np.testing.assert_allclose(p_t, p_s, atol=1e-10)

    def test_truncated_model_large_epsilon_uniform(self):
        base = PottsModel(curie_weiss(4), 0.5, 3)
        trunc, lr = truncated_model(base, 100.0)
        assert lr.k == 0
        summ = exact_summary(trunc, want_pmf=True)
        np.testing.assert_allclose(summ.pmf, np.full(3 ** 4, 3.0 ** -4), rtol=1e-12)


class TestLemma1Certificate:
    def test_bounds_hold_on_hopfield(self):
        m = PottsModel(hopfield(6, 2, RngStream(3, 0)), 1.0, 3)
        for eps in (0.01, 0.1):
            cert = lemma1_certificate(m, eps)
            assert abs(cert.delta_log_z) <= cert.bound_log_z + 1e-10
            assert cert.kl_pq <= cert.bound_kl + 1e-10
            assert cert.kl_qp <= cert.bound_kl + 1e-10
            assert cert.pass_log_z and cert.pass_kl
            assert cert.bound_log_z == pytest.approx(m.n * eps / 2)
            assert cert.bound_kl == pytest.approx(m.n * eps)
            assert cert.stated_bound_log_z == pytest.approx(m.n * m.beta * eps / 2)

    def test_zero_gap_at_tiny_epsilon(self):
        m = PottsModel(curie_weiss(5), 0.8, 2)
        cert = lemma1_certificate(m, 1e-14)
        assert abs(cert.delta_log_z) < 1e-9
        assert cert.kl_pq < 1e-9

    def test_gap_grows_with_epsilon(self):
        m = PottsModel(hopfield(6, 3, RngStream(9, 0)), 1.0, 2)
        gaps = [abs(lemma1_certificate(m, e).delta_log_z) for e in (1e-8, 0.2, 0.8)]
        assert gaps[0] <= gaps[1] <= gaps[2]

    def test_to_dict_keys(self):
        m = PottsModel(curie_weiss(4), 0.5, 2)
        d = lemma1_certificate(m, 0.05).to_dict()
        for key in (
            "epsilon", "k", "delta_log_z", "kl_pq", "kl_qp",
            "bound_log_z", "bound_kl", "stated_bound_log_z", "stated_bound_kl",
            "pass_log_z", "pass_kl", "pass_log_z_stated", "pass_kl_stated",
        ):
            assert key in d
