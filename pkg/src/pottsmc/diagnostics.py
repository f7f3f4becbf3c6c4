"""Convergence and efficiency metrics for multi-chain phi series.

Rank-normalized split R-hat and autocorrelation ESS: chains are split in
half, all values are jointly ranked (average ranks on ties) and mapped through
the normal quantile of (r - 3/8)/(S + 1/4), and the classic between/within
variance ratio or the Geyer-truncated autocorrelation sum is computed on the
transformed half-chains. Both statistics are therefore invariant under any
strictly increasing transform of the inputs.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata

from .errors import ZeroVariance

ESS_FLOOR_FRACTION = 1e-4   # ESS is floored at CM * this
ESS_CAP_FACTOR = 1.5        # and capped at CM * this (antithetic guard)


def _as_series(series):
    arr = np.asarray(series, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError("series must be (chains, draws)")
    return arr


def _split_chains(arr):
    half = arr.shape[1] // 2
    return np.vstack((arr[:, :half], arr[:, -half:]))


def _rank_normalize(arr):
    size = arr.size
    rank = rankdata(arr, method="average")
    z = ndtri((rank - 0.375) / (size + 0.25))
    return z.reshape(arr.shape)


def _check_variance(arr):
    if np.all(arr == arr.flat[0]):
        raise ZeroVariance("all values identical; diagnostic undefined")


def split_rank_normalized_rhat(series):
    """Scalar split R-hat on rank-normalized values; ~1 means mixed chains."""
    arr = _as_series(series)
    if arr.shape[0] < 2:
        raise ValueError("R-hat needs at least 2 chains")
    if arr.shape[1] < 4:
        raise ValueError("R-hat needs at least 4 draws per chain")
    _check_variance(arr)
    z = _rank_normalize(_split_chains(arr))
    m = z.shape[1]
    chain_var = np.var(z, axis=1, ddof=1)
    w = float(np.mean(chain_var))
    b = m * float(np.var(z.mean(axis=1), ddof=1))
    var_plus = (m - 1.0) / m * w + b / m
    # internally constant chain (ties leave only roundoff variance) with
    # cross-chain spread: divergent by definition
    if chain_var.min() < 1e-30 or w == 0.0:
        return np.inf
    return float(np.sqrt(var_plus / w))


def _autocov(x):
    """Biased (divide by M) autocovariance via FFT."""
    m = x.size
    centered = x - x.mean()
    nfft = 1 << int(np.ceil(np.log2(2 * m)))
    f = np.fft.rfft(centered, nfft)
    acov = np.fft.irfft(f * np.conjugate(f), nfft)[:m].real
    return acov / m

def ess(series):
    """Multi-chain effective sample size of the (rank-normalized) series.

    Per-lag autocorrelations of the split chains are combined through the
    between/within variance decomposition, paired lags are truncated at
    Geyer's initial positive sequence and forced monotone, and
    ESS = CM / (1 + 2 sum rho). Floored at CM * 1e-4, capped at 1.5 * CM.
    """
    arr = _as_series(series)
    if arr.shape[1] < 8:
        raise ValueError("ESS needs at least 8 draws per chain")
    _check_variance(arr)
    cm = arr.shape[0] * arr.shape[1]
    z = _rank_normalize(_split_chains(arr))
    n_chain, n_draw = z.shape
    acov = np.vstack([_autocov(z[c]) for c in range(n_chain)])
    chain_mean = z.mean(axis=1)
    mean_var = float(np.mean(acov[:, 0])) * n_draw / (n_draw - 1.0)
    var_plus = mean_var * (n_draw - 1.0) / n_draw
    if n_chain > 1:
        var_plus += float(np.var(chain_mean, ddof=1))

    rho_hat_t = np.zeros(n_draw)
    rho_hat_even = 1.0
    rho_hat_t[0] = rho_hat_even
    rho_hat_odd = 1.0 - (mean_var - float(np.mean(acov[:, 1]))) / var_plus
    rho_hat_t[1] = rho_hat_odd
    t = 1
    while t < (n_draw - 2) and (rho_hat_even + rho_hat_odd) >= 0.0:
        rho_hat_even = 1.0 - (mean_var - float(np.mean(acov[:, t + 1]))) / var_plus
        rho_hat_odd = 1.0 - (mean_var - float(np.mean(acov[:, t + 2]))) / var_plus
        rho_hat_t[t + 1] = rho_hat_even
        if (rho_hat_even + rho_hat_odd) >= 0:
            rho_hat_t[t + 2] = rho_hat_odd
        t += 2
    max_t = t
    t = 1
    while t <= max_t - 2:  # enforce monotone non-increasing pair sums
        if (rho_hat_t[t + 1] + rho_hat_t[t + 2]) > (rho_hat_t[t - 1] + rho_hat_t[t]):
            rho_hat_t[t + 1] = (rho_hat_t[t - 1] + rho_hat_t[t]) / 2.0
            rho_hat_t[t + 2] = rho_hat_t[t + 1]
        t += 2
    tau_hat = (-1.0 + 2.0 * float(np.sum(rho_hat_t[:max_t]))
               + float(np.sum(rho_hat_t[max_t + 1:max_t + 2])))
    value = np.inf if tau_hat <= 0 else cm / tau_hat
    return float(max(min(value, ESS_CAP_FACTOR * cm), ESS_FLOOR_FRACTION * cm))


def ess_per_second(ess_value, seconds_sampling, seconds_precompute=0.0,
                   include_precompute=False):
    """ESS divided by wall-clock; optionally charging the one-time setup.

    None when the denominator is not positive (no timing recorded).
    """
    denom = float(seconds_sampling)
    if include_precompute:
        denom += float(seconds_precompute)
    if denom <= 0:
        return None
    return float(ess_value) / denom


@dataclass(frozen=True)
class DiagnosticsReport:
    """Pooled multi-chain summary; rhat/ess are None when undefined."""

    rhat: Optional[float]
    ess: Optional[float]
    ess_per_sec: Optional[float]
    ess_per_sec_incl_precompute: Optional[float]
    pooled_mean_phi: float
    pooled_se_phi: Optional[float]
    chains: int
    draws_per_chain: int
    seconds_sampling: float
    seconds_precompute: float

    def to_dict(self):
        return {
            "rhat": self.rhat,
            "ess": self.ess,
            "ess_per_sec": self.ess_per_sec,
            "ess_per_sec_incl_precompute": self.ess_per_sec_incl_precompute,
            "pooled_mean_phi": self.pooled_mean_phi,
            "pooled_se_phi": self.pooled_se_phi,
            "chains": self.chains,
            "draws_per_chain": self.draws_per_chain,
            "seconds_sampling": self.seconds_sampling,
            "seconds_precompute": self.seconds_precompute,
        }


def diagnostics_report(traces):
    """Pool the phi series of equal-length chains into one report.

    Zero-variance input yields undefined rhat/ess rather than an error; rhat
    is also undefined for a single chain.
    """
    if not traces:
        raise ValueError("need at least one trace")
    lengths = {t.phi_series.size for t in traces}
    if len(lengths) != 1:
        raise ValueError("chains have unequal lengths: %s" % sorted(lengths))
    series = np.vstack([t.phi_series for t in traces])
    seconds_sampling = float(sum(t.wall_seconds_sampling for t in traces))
    seconds_precompute = float(sum(t.wall_seconds_precompute for t in traces))
    c, m = series.shape
    try:
        ess_value = ess(series)
    except ZeroVariance:
        ess_value = None
    rhat_value = None
    if c >= 2:
        try:
            rhat_value = split_rank_normalized_rhat(series)
        except ZeroVariance:
            rhat_value = None
    pooled_mean = float(series.mean())
    pooled_se = None
    eps_plain = eps_incl = None
    if ess_value is not None:
        pooled_se = float(series.std(ddof=1) / np.sqrt(ess_value))
        if seconds_sampling > 0:
            eps_plain = ess_per_second(ess_value, seconds_sampling)
            eps_incl = ess_per_second(ess_value, seconds_sampling,
                                      seconds_precompute, include_precompute=True)
    return DiagnosticsReport(
        rhat=rhat_value,
        ess=ess_value,
        ess_per_sec=eps_plain,
        ess_per_sec_incl_precompute=eps_incl,
        pooled_mean_phi=pooled_mean,
        pooled_se_phi=pooled_se,
        chains=c,
        draws_per_chain=m,
        seconds_sampling=seconds_sampling,
        seconds_precompute=seconds_precompute,
    )


BENCHMARK_COLUMNS = ("sampler", "model", "beta", "q", "n", "ess", "rhat",
                     "seconds_sampling", "seconds_precompute", "ess_per_sec",
                     "ess_per_sec_incl_precompute")


def _fmt9(v):
    if v is None:
        return "nan"
    return format(float(v), ".9g")


def benchmark_csv_row(report, sampler, family, beta, q, n):
    """One plot-ready CSV row (9 significant digits for the metrics)."""
    return ",".join([
        str(sampler), str(family), _fmt9(beta), str(int(q)), str(int(n)),
        _fmt9(report.ess), _fmt9(report.rhat),
        _fmt9(report.seconds_sampling), _fmt9(report.seconds_precompute),
        _fmt9(report.ess_per_sec), _fmt9(report.ess_per_sec_incl_precompute),
    ])
