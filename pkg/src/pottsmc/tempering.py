"""Replica-exchange (parallel tempering) wrapper around any sampler kind.

T replicas run the same kernel at an ascending ladder of inverse temperatures;
every n_mc iterations an exchange sweep walks the adjacent pairs in order and
swaps their configurations with the Metropolis probability
min(1, exp[(beta_{t+1} - beta_t)(H(x_{t+1}) - H(x_t))]), where H is the
partial Hamiltonian -1/2 sum_{i,j} A(i,j) 1{x_i = x_j} (no beta factor).
Replica t always owns beta_t; swaps move configurations, never streams.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .numerics import DEFAULT_EPSILON
from .samplers import (
    BondConvention,
    ChainTrace,
    SamplerKind,
    initial_configuration,
    make_sampler,
)


@dataclass(frozen=True)
class TemperingLadder:
    """Strictly increasing positive inverse temperatures, at least two rungs."""

    betas: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.betas, dtype=float)
        if b.ndim != 1 or b.size < 2:
            raise ValueError("ladder needs at least two betas")
        if np.any(b <= 0):
            raise ValueError("all betas must be positive")
        if np.any(np.diff(b) <= 0):
            raise ValueError("betas must be strictly increasing")
        object.__setattr__(self, "betas", b)

    @property
    def T(self):
        return self.betas.size


@dataclass
class ExchangeStats:
    """Per-adjacent-pair exchange attempt/accept counters."""

    betas: np.ndarray
    attempts: np.ndarray
    accepts: np.ndarray

    @property
    def rates(self):
        with np.errstate(invalid="ignore"):
            return np.where(self.attempts > 0, self.accepts / self.attempts, np.nan)

    def to_dict(self):
        pairs = []
        for t in range(self.attempts.size):
            pairs.append({
                "low_beta": float(self.betas[t]),
                "high_beta": float(self.betas[t + 1]),
                "attempts": int(self.attempts[t]),
                "accepts": int(self.accepts[t]),
                "rate": float(self.accepts[t] / self.attempts[t]) if self.attempts[t] else None,
            })
        return {"pairs": pairs}


def partial_hamiltonian(A, x):
    """-1/2 sum_{i,j} A(i,j) 1{x_i = x_j}, computed directly from A.

    The identity with the summary statistic is H = -phi / (2 beta).
    """
    x = np.asarray(x)
    M = A.entries if hasattr(A, "entries") else np.asarray(A, dtype=float)
    if x.shape != (M.shape[0],):
        raise ValueError(
            "configuration shape %s does not match n=%d" % (x.shape, M.shape[0])
        )
    same = x[:, None] == x[None, :]
    return -0.5 * float(np.sum(M[same]))


def exchange_probability(beta_t, beta_t1, h_t, h_t1):
    """Metropolis swap acceptance for the adjacent pair (t, t+1)."""
    if not beta_t < beta_t1:
        raise ValueError("need beta_t < beta_t1")
    exponent = (beta_t1 - beta_t) * (h_t1 - h_t)
    if exponent >= 0.0:
        return 1.0
    return math.exp(exponent)


def tempered_run(kind, model, ladder, n_ex, n_mc, replica_streams, exchange_stream,
                 *, burn_in_fraction=0.1, epsilon=DEFAULT_EPSILON,
                 bond_convention=BondConvention.INDICATOR, init="random"):
    """Run T replicas with n_ex exchange events, n_mc iterations between.

    model supplies the coupling and q; each replica's beta comes from the
    ladder (the final rung is the cold target). Returns (per-replica traces in
    ladder order, ExchangeStats). Burn-in is a fraction of the n_ex * n_mc
    kept iterations, identical for every replica.
    """
    kind = SamplerKind(kind)
    n_ex = int(n_ex)
    n_mc = int(n_mc)
    if n_ex < 1 or n_mc < 1:
        raise ValueError("need n_ex >= 1 and n_mc >= 1")
    if not 0.0 <= burn_in_fraction < 1.0:
        raise ValueError("burn_in_fraction must be in [0, 1)")
    T = ladder.T
    if len(replica_streams) != T:
        raise ValueError("need exactly one stream per replica")
    A = model.coupling
    models = [replace(model, beta=float(b)) for b in ladder.betas]
    samplers = [make_sampler(kind, mt, epsilon=epsilon, bond_convention=bond_convention)
                for mt in models]
    xs = [initial_configuration(init, mt, st) for mt, st in zip(models, replica_streams)]
    hams = [partial_hamiltonian(A, x) for x in xs]
    draws_parts = [[] for _ in range(T)]
    phi_parts = [[] for _ in range(T)]
    sampling_seconds = np.zeros(T)
    attempts = np.zeros(T - 1, dtype=np.int64)
    accepts = np.zeros(T - 1, dtype=np.int64)
    coin = exchange_stream.generator
    for _ in range(n_ex):
        for t in range(T):
            draws, phis, x_new, secs = samplers[t].run(xs[t], n_mc, replica_streams[t])
            xs[t] = x_new
            hams[t] = partial_hamiltonian(A, x_new)
            draws_parts[t].append(draws)
            phi_parts[t].append(phis)
            sampling_seconds[t] += secs
        for t in range(T - 1):
            p = exchange_probability(ladder.betas[t], ladder.betas[t + 1],
                                     hams[t], hams[t + 1])
            attempts[t] += 1
            if coin.random() < p:
                accepts[t] += 1
                xs[t], xs[t + 1] = xs[t + 1], xs[t]
                hams[t], hams[t + 1] = hams[t + 1], hams[t]
    total = n_ex * n_mc
    burn = int(burn_in_fraction * total)
    traces = []
    for t in range(T):
        draws = np.concatenate(draws_parts[t], axis=0)
        phis = np.concatenate(phi_parts[t])
        traces.append(ChainTrace(
            draws=draws[burn:],
            phi_series=phis[burn:],
            wall_seconds_sampling=float(sampling_seconds[t]),
            wall_seconds_precompute=samplers[t].precompute_seconds,
            master_seed=replica_streams[t].master_seed,
            stream_id=replica_streams[t].stream_id,
            m=total,
            burn_in=burn,
            sampler=kind.value,
        ))
    stats = ExchangeStats(betas=ladder.betas.copy(), attempts=attempts, accepts=accepts)
    return traces, stats
