"""Convergence diagnostics: rank-normalized split R-hat and ESS.

Ground truth: analytic ESS of iid and AR(1) sequences, plus invariance
properties that rank normalization guarantees by construction.
"""
import numpy as np
import pytest

from pottsmc.coupling import lattice_2d
from pottsmc.diagnostics import (
    BENCHMARK_COLUMNS,
    DiagnosticsReport,
    benchmark_csv_row,
    diagnostics_report,
    ess,
    ess_per_second,
    split_rank_normalized_rhat,
)
from pottsmc.errors import ZeroVariance
from pottsmc.model import PottsModel
from pottsmc.numerics import RngStream
from pottsmc.samplers import SamplerKind, run_chain


def ar1(rng, rho, chains, draws):
    x = np.zeros((chains, draws))
    innov = rng.standard_normal((chains, draws))
    scale = np.sqrt(1 - rho ** 2)
    x[:, 0] = innov[:, 0]
    for t in range(1, draws):
        x[:, t] = rho * x[:, t - 1] + scale * innov[:, t]
    return x


class TestESS:
    def test_iid_close_to_sample_count(self):
        rng = np.random.default_rng(0)
        series = rng.standard_normal((4, 5000))
        ratio = ess(series) / series.size
        assert 0.8 < ratio < 1.2

    def test_ar1_matches_theory(self):
        # ESS/CM for AR(1) with rho is (1-rho)/(1+rho) = 1/3 at rho = 0.5
        rng = np.random.default_rng(1)
        series = ar1(rng, 0.5, 4, 20000)
        ratio = ess(series) / series.size
        assert abs(ratio - 1 / 3) / (1 / 3) < 0.25

    def test_antithetic_capped(self):
        # near-period-2 series has tau < 1; cap at 1.5 CM applies
        rng = np.random.default_rng(2)
        series = ar1(rng, -0.9, 4, 4000)
        assert ess(series) == pytest.approx(1.5 * series.size)

    def test_floor_on_frozen_chain(self):
        # one long excursion: tau is huge, floor kicks in at 1e-4 CM
        draws = 10000
        series = np.cumsum(np.random.default_rng(3).standard_normal((2, draws)),
                           axis=1)
        val = ess(series)
        assert val >= 1e-4 * series.size * 0.999

    def test_single_chain_accepted(self):
        rng = np.random.default_rng(4)
        val = ess(rng.standard_normal(4000))
        assert 0.7 * 4000 < val < 1.3 * 4000

    def test_zero_variance_raises(self):
        with pytest.raises(ZeroVariance):
            ess(np.ones((4, 100)))

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            ess(np.zeros((2, 4)))


class TestRhat:
    def test_same_distribution_near_one(self):
        rng = np.random.default_rng(5)
        series = rng.standard_normal((4, 2000))
        r = split_rank_normalized_rhat(series)
        assert 0.99 <= r <= 1.02

    def test_offset_chain_flagged(self):
        rng = np.random.default_rng(6)
        series = rng.standard_normal((4, 1000))
        series[0] += 3.0  # one chain stuck in a different mode
        assert split_rank_normalized_rhat(series) > 1.2

    def test_within_chain_trend_flagged(self):
        # split halves expose a trend even in a single pair of chains
        t = np.linspace(0, 4, 1000)
        rng = np.random.default_rng(7)
        series = np.stack([t + 0.1 * rng.standard_normal(1000) for _ in range(2)])
        assert split_rank_normalized_rhat(series) > 1.2

    def test_monotone_transform_invariant(self):
        # rank normalization sees only the ordering
        rng = np.random.default_rng(8)
        series = rng.standard_normal((4, 500))
        r1 = split_rank_normalized_rhat(series)
        r2 = split_rank_normalized_rhat(np.exp(series))
        assert r1 == pytest.approx(r2, rel=1e-12)

    def test_constant_chains_diverge(self):
        # different constants per chain: zero within-chain variance
        series = np.tile(np.array([[0.0], [1.0]]), (1, 100))
        assert split_rank_normalized_rhat(series) == np.inf

    def test_all_constant_raises(self):
        with pytest.raises(ZeroVariance):
            split_rank_normalized_rhat(np.zeros((4, 100)))

    def test_needs_two_chains(self):
        with pytest.raises(ValueError):
            split_rank_normalized_rhat(np.zeros((1, 100)) + np.arange(100))


class TestEssPerSecond:
    def test_arithmetic(self):
        assert ess_per_second(100.0, 4.0) == 25.0
        assert ess_per_second(100.0, 4.0, 1.0, include_precompute=True) == 20.0

    def test_zero_seconds(self):
        assert ess_per_second(100.0, 0.0) is None


class TestReport:
    def make_traces(self, seed=0, chains=4):
        model = PottsModel(lattice_2d(2), 0.5, 2)
        return [
            run_chain(SamplerKind.AG_GIBBS, model, "random", m=600, burn_in=100,
                      stream=RngStream(seed, 1 + c))
            for c in range(chains)
        ]

    def test_fields(self):
        traces = self.make_traces()
        rep = diagnostics_report(traces)
        assert rep.chains == 4 and rep.draws_per_chain == 500
        assert rep.ess > 0
        assert 0.9 < rep.rhat < 1.1
        assert rep.seconds_sampling > 0
        assert rep.ess_per_sec > 0
        assert rep.pooled_se_phi > 0
        pooled = np.concatenate([t.phi_series for t in traces])
        assert rep.pooled_mean_phi == pytest.approx(pooled.mean())
        # SE uses the ESS, not the raw count
        assert rep.pooled_se_phi == pytest.approx(
            pooled.std(ddof=1) / np.sqrt(rep.ess)
        )

    def test_single_chain_no_rhat(self):
        rep = diagnostics_report(self.make_traces(chains=1))
        assert rep.rhat is None
        assert rep.ess > 0

    def test_to_dict_roundtrip(self):
        import json
        rep = diagnostics_report(self.make_traces())
        d = rep.to_dict()
        json.dumps(d)  # must be serializable
        assert d["chains"] == 4

    def test_unequal_lengths_rejected(self):
        traces = self.make_traces()
        short = traces[0].__class__(**{**traces[0].__dict__, "phi_series":
                                       traces[0].phi_series[:-10],
                                       "draws": traces[0].draws[:-10]})
        with pytest.raises(ValueError):
            diagnostics_report([short] + traces[1:])


class TestBenchmarkRow:
    def test_column_layout(self):
        assert BENCHMARK_COLUMNS == (
            "sampler", "model", "beta", "q", "n", "ess", "rhat",
            "seconds_sampling", "seconds_precompute", "ess_per_sec",
            "ess_per_sec_incl_precompute",
        )

    def test_formatting(self):
        rep = DiagnosticsReport(
            rhat=1.00123456789, ess=1234.56789012, ess_per_sec=1e6,
            ess_per_sec_incl_precompute=9.87654321e5,
            pooled_mean_phi=1.0, pooled_se_phi=0.1,
            chains=4, draws_per_chain=100,
            seconds_sampling=0.5, seconds_precompute=0.25,
        )
        row = benchmark_csv_row(rep, "AGGibbs", "lattice2d", 0.44, 2, 256)
        parts = row.split(",")
        assert parts[0] == "AGGibbs"
        assert parts[1] == "lattice2d"
        assert float(parts[2]) == 0.44
        assert parts[3] == "2" and parts[4] == "256"
        # nine significant digits
        assert parts[5] == "1234.56789"
        assert parts[6] == "1.00123457"

    def test_none_fields_become_nan(self):
        rep = DiagnosticsReport(
            rhat=None, ess=None, ess_per_sec=None,
            ess_per_sec_incl_precompute=None,
            pooled_mean_phi=0.0, pooled_se_phi=None,
            chains=1, draws_per_chain=100,
            seconds_sampling=0.0, seconds_precompute=0.0,
        )
        row = benchmark_csv_row(rep, "Wolff", "sk", 1.0, 2, 32)
        parts = row.split(",")
        assert parts[5] == "nan" and parts[6] == "nan"
