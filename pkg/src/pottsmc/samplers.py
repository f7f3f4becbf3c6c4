"""Single-temperature MCMC kernels and the chain runner.

Seven samplers share one interface: Heat Bath, the auxiliary-Gaussian block
Gibbs pair (regular and low-rank), their two-state specializations, and the
two cluster algorithms. Step functions expose a single transition for tests;
run_chain executes a compiled whole-chain driver and records the summary
statistic phi at every iteration.
"""

import enum
import json
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

from . import _kernels
from .coupling import AGPrecomp, LowRankPrecomp, precompute_ag, precompute_lowrank
from .errors import DimensionMismatch, NegativeCoupling, WrongStateCount
from .numerics import DEFAULT_EPSILON, DEFAULT_JITTER


class SamplerKind(str, enum.Enum):
    HEAT_BATH = "HeatBath"
    AG_GIBBS = "AGGibbs"
    LOWRANK_AG_GIBBS = "LowRankAGGibbs"
    ISING_AG = "IsingAG"
    ISING_LOWRANK_AG = "IsingLowRankAG"
    SWENDSEN_WANG = "SwendsenWang"
    WOLFF = "Wolff"


class BondConvention(str, enum.Enum):
    """Open-bond probability for the cluster samplers.

    INDICATOR uses 1 - exp(-beta A_ij), the convention consistent with the
    indicator-Hamiltonian target this package samples (fixed by the exact
    two-node stationarity test). PM_ONE uses 1 - exp(-2 beta A_ij), the
    plus/minus-one spin convention, kept selectable for comparison.
    """

    INDICATOR = "indicator"
    PM_ONE = "pm_one"


class InitKind(str, enum.Enum):
    ALL_ZERO = "all_zero"
    RANDOM = "random"


@dataclass
class ChainTrace:
    """Post-burn-in draws and phi series of one chain, with timings and seed lineage."""

    draws: np.ndarray
    phi_series: np.ndarray
    wall_seconds_sampling: float
    wall_seconds_precompute: float
    master_seed: int
    stream_id: int
    m: int
    burn_in: int
    sampler: str


def _require_q2(model):
    if model.q != 2:
        raise WrongStateCount("this sampler requires q = 2, got q = %d" % model.q)


def _require_nonnegative(model):
    if np.any(model.coupling.entries < 0):
        raise NegativeCoupling("cluster samplers require all coupling entries >= 0")


def check_compatibility(kind, model):
    """Raise WrongStateCount / NegativeCoupling before any work is done."""
    kind = SamplerKind(kind)
    if kind in (SamplerKind.ISING_AG, SamplerKind.ISING_LOWRANK_AG):
        _require_q2(model)
    if kind in (SamplerKind.SWENDSEN_WANG, SamplerKind.WOLFF):
        _require_nonnegative(model)


def _bond_probability(a, beta, convention):
    c = 2.0 if BondConvention(convention) == BondConvention.PM_ONE else 1.0
    return -np.expm1(-c * beta * a)


def _edge_list(model, convention):
    A = model.coupling.entries
    iu, ju = np.triu_indices(model.n, k=1)
    w = A[iu, ju]
    keep = w > 0
    ei = np.ascontiguousarray(iu[keep].astype(np.int64))
    ej = np.ascontiguousarray(ju[keep].astype(np.int64))
    pbond = _bond_probability(w[keep], model.beta, convention)
    return ei, ej, pbond


def _csr_adjacency(model, convention):
    ei, ej, pbond = _edge_list(model, convention)
    rows = np.concatenate([ei, ej])
    cols = np.concatenate([ej, ei])
    pp = np.concatenate([pbond, pbond])
    order = np.argsort(rows, kind="stable")
    rows, cols, pp = rows[order], cols[order], pp[order]
    indptr = np.zeros(model.n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    indptr = np.cumsum(indptr)
    return indptr, np.ascontiguousarray(cols), np.ascontiguousarray(pp)


class BoundSampler:
    """A sampler kind bound to one model, with its precomputation done."""

    def __init__(self, kind, model, runner, precompute_seconds):
        self.kind = kind
        self.model = model
        self._runner = runner
        self.precompute_seconds = precompute_seconds

    def run(self, x0, m, stream):
        """Advance m iterations from x0; returns (draws, phis, x_final, seconds)."""
        x = np.ascontiguousarray(np.asarray(x0, dtype=np.int64)).copy()
        if x.shape != (self.model.n,):
            raise DimensionMismatch("x0 shape %s, expected (%d,)" % (x.shape, self.model.n))
        draws = np.empty((m, self.model.n), dtype=np.int8)
        phis = np.empty(m)
        t0 = time.perf_counter()
        self._runner(x, m, stream.generator, draws, phis)
        seconds = time.perf_counter() - t0
        return draws, phis, x, seconds


def make_sampler(kind, model, epsilon=DEFAULT_EPSILON,
                 bond_convention=BondConvention.INDICATOR, jitter=DEFAULT_JITTER):
    """Validate compatibility, run the one-time precompute, bind the kernel."""
    kind = SamplerKind(kind)
    A = np.ascontiguousarray(model.coupling.entries)
    beta = float(model.beta)
    q = int(model.q)
    t0 = time.perf_counter()
    if kind == SamplerKind.HEAT_BATH:
        def runner(x, m, rng, draws, phis):
            _kernels.heat_bath_chain(A, beta, x, m, q, rng, draws, phis)
    elif kind == SamplerKind.AG_GIBBS:
        pre = precompute_ag(model.coupling, beta, jitter)
        B = np.ascontiguousarray(pre.B)
        L = np.ascontiguousarray(pre.chol_Binv)

        def runner(x, m, rng, draws, phis):
            _kernels.ag_chain(B, L, A, beta, x, m, q, rng, draws, phis)
    elif kind == SamplerKind.LOWRANK_AG_GIBBS:
        lr = precompute_lowrank(model.coupling, beta, epsilon)
        mu = np.ascontiguousarray(lr.mu)
        P = np.ascontiguousarray(lr.P)

        def runner(x, m, rng, draws, phis):
            _kernels.lowrank_chain(mu, P, A, beta, x, m, q, rng, draws, phis)
    elif kind == SamplerKind.ISING_AG:
        _require_q2(model)
        pre = precompute_ag(model.coupling, beta, jitter)
        B = np.ascontiguousarray(pre.B)
        L = np.ascontiguousarray(pre.chol_Binv)

        def runner(x, m, rng, draws, phis):
            _kernels.ising_ag_chain(B, L, A, beta, x, m, rng, draws, phis)
    elif kind == SamplerKind.ISING_LOWRANK_AG:
        _require_q2(model)
        lr = precompute_lowrank(model.coupling, beta, epsilon)
        mu = np.ascontiguousarray(lr.mu)
        P = np.ascontiguousarray(lr.P)

        def runner(x, m, rng, draws, phis):
            _kernels.ising_lowrank_chain(mu, P, A, beta, x, m, rng, draws, phis)
    elif kind == SamplerKind.SWENDSEN_WANG:
        _require_nonnegative(model)
        ei, ej, pbond = _edge_list(model, bond_convention)

        def runner(x, m, rng, draws, phis):
            _kernels.sw_chain(ei, ej, pbond, A, beta, x, m, q, rng, draws, phis)
    elif kind == SamplerKind.WOLFF:
        _require_nonnegative(model)
        indptr, indices, pedge = _csr_adjacency(model, bond_convention)

        def runner(x, m, rng, draws, phis):
            _kernels.wolff_chain(indptr, indices, pedge, A, beta, x, m, q, rng, draws, phis)
    else:  # pragma: no cover
        raise ValueError("unknown sampler kind %r" % (kind,))
    precompute_seconds = time.perf_counter() - t0
    return BoundSampler(kind, model, runner, precompute_seconds)


def initial_configuration(init, model, stream):
    """Resolve an init spec (array, 'all_zero', or 'random') to a configuration."""
    if isinstance(init, (str, InitKind)):
        how = InitKind(init)
        if how == InitKind.ALL_ZERO:
            return np.zeros(model.n, dtype=np.int64)
        return stream.generator.integers(0, model.q, size=model.n).astype(np.int64)
    x = np.asarray(init, dtype=np.int64)
    if x.shape != (model.n,):
        raise DimensionMismatch("init shape %s, expected (%d,)" % (x.shape, model.n))
    if np.any((x < 0) | (x >= model.q)):
        raise WrongStateCount("init states must lie in [0, q)")
    return x.copy()


def run_chain(kind, model, init, m, burn_in, stream, *, epsilon=DEFAULT_EPSILON,
              bond_convention=BondConvention.INDICATOR, jitter=DEFAULT_JITTER):
    """Precompute once (timed separately), run m kernel steps, keep the tail.

    phi is recorded at every iteration including warm-up; the burn_in rows are
    dropped only when the trace is assembled.
    """
    m = int(m)
    burn_in = int(burn_in)
    if not 0 <= burn_in < m:
        raise ValueError("need 0 <= burn_in < m")
    sampler = make_sampler(kind, model, epsilon=epsilon,
                           bond_convention=bond_convention, jitter=jitter)
    x0 = initial_configuration(init, model, stream)
    draws, phis, _, seconds = sampler.run(x0, m, stream)
    return ChainTrace(
        draws=draws[burn_in:],
        phi_series=phis[burn_in:],
        wall_seconds_sampling=seconds,
        wall_seconds_precompute=sampler.precompute_seconds,
        master_seed=stream.master_seed,
        stream_id=stream.stream_id,
        m=m,
        burn_in=burn_in,
        sampler=SamplerKind(kind).value,
    )


# ------------------------------------------------------ one-step functions

def heat_bath_sweep(model, x, stream):
    """One full sweep of single-site conditional updates; returns the new state."""
    x = np.asarray(x, dtype=np.int64).copy()
    logits = np.empty(model.q)
    _kernels.heat_bath_sweep(np.ascontiguousarray(model.coupling.entries),
                             float(model.beta), x, int(model.q), logits,
                             stream.generator)
    return x


def ag_gibbs_step(precomp, x, stream, q=None):
    """One block-Gibbs step; returns (new state, auxiliary z of shape (q, n)).

    q defaults to max(x) + 1 (at least 2); pass it explicitly when the current
    configuration does not visit every state.
    """
    if not isinstance(precomp, AGPrecomp):
        raise TypeError("expected AGPrecomp")
    x = np.asarray(x, dtype=np.int64).copy()
    q = int(q) if q is not None else max(int(x.max()) + 1, 2)
    z = np.empty((q, precomp.n))
    logits = np.empty(q)
    _kernels.ag_step(np.ascontiguousarray(precomp.B),
                     np.ascontiguousarray(precomp.chol_Binv), x, z, logits,
                     stream.generator)
    return x, z


def lowrank_ag_step(lr, x, stream, q=None):
    """One low-rank block-Gibbs step; returns (new state, z of shape (q, k))."""
    if not isinstance(lr, LowRankPrecomp):
        raise TypeError("expected LowRankPrecomp")
    x = np.asarray(x, dtype=np.int64).copy()
    q = int(q) if q is not None else max(int(x.max()) + 1, 2)
    z = np.empty((q, max(lr.k, 1)))
    zw = np.empty((q, max(lr.k, 1)))
    logits = np.empty(q)
    _kernels.lowrank_step(np.ascontiguousarray(lr.mu), np.ascontiguousarray(lr.P),
                          x, z, zw, logits, stream.generator)
    return x, z[:, :lr.k]


def ising_ag_step(precomp, x, stream):
    """One two-state AG step; returns (new state, auxiliary w of length n)."""
    x = np.asarray(x, dtype=np.int64).copy()
    if np.any((x < 0) | (x > 1)):
        raise WrongStateCount("two-state step needs states in {0, 1}")
    w = np.empty(precomp.n)
    _kernels.ising_ag_step(np.ascontiguousarray(precomp.B),
                           np.ascontiguousarray(precomp.chol_Binv), x, w,
                           stream.generator)
    return x, w


def ising_lowrank_ag_step(lr, x, stream):
    """One two-state low-rank AG step; returns (new state, w of length k)."""
    x = np.asarray(x, dtype=np.int64).copy()
    if np.any((x < 0) | (x > 1)):
        raise WrongStateCount("two-state step needs states in {0, 1}")
    w = np.empty(max(lr.k, 1))
    _kernels.ising_lowrank_step(np.ascontiguousarray(lr.mu),
                                np.ascontiguousarray(lr.P), x, w,
                                stream.generator)
    return x, w[:lr.k]


def swendsen_wang_step(model, x, stream, bond_convention=BondConvention.INDICATOR):
    """One whole-graph cluster refresh; returns the new state."""
    _require_nonnegative(model)
    ei, ej, pbond = _edge_list(model, bond_convention)
    x = np.asarray(x, dtype=np.int64).copy()
    parent = np.empty(model.n, dtype=np.int64)
    comp_state = np.empty(model.n, dtype=np.int64)
    _kernels.sw_step(ei, ej, pbond, x, int(model.q), parent, comp_state,
                     stream.generator)
    return x


def wolff_step(model, x, stream, bond_convention=BondConvention.INDICATOR):
    """One single-cluster update; returns the new state."""
    _require_nonnegative(model)
    indptr, indices, pedge = _csr_adjacency(model, bond_convention)
    x = np.asarray(x, dtype=np.int64).copy()
    in_cluster = np.zeros(model.n, dtype=np.bool_)
    stack = np.empty(model.n, dtype=np.int64)
    members = np.empty(model.n, dtype=np.int64)
    _kernels.wolff_step(indptr, indices, pedge, x, int(model.q), in_cluster,
                        stack, members, stream.generator)
    return x


# ------------------------------------------------- marginal density of Z/W

def marginal_z_logdensity(precomp, z):
    """Log-density (up to an additive constant) of the auxiliary Gaussians,
    with its gradient in z.

    Regular form (z is q x n):
        -1/2 sum_ell z_ell' B z_ell + sum_i logsumexp_ell (B z_ell)_i
    Low-rank form (z is q x k):
        -1/2 sum_ell sum_j mu_j z_ell(j)^2
            + sum_i logsumexp_ell sum_j mu_j z_ell(j) p_j(i)
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2:
        raise DimensionMismatch("z must be 2-d (q x n or q x k)")
    if isinstance(precomp, AGPrecomp):
        if z.shape[1] != precomp.n:
            raise DimensionMismatch("z has %d columns, expected n=%d" % (z.shape[1], precomp.n))
        Bz = z @ precomp.B
        quad = -0.5 * float(np.sum(z * Bz))
        site_logits = Bz.T  # (n, q)
        value = quad + float(np.sum(logsumexp(site_logits, axis=1)))
        S = softmax(site_logits, axis=1)
        grad = -Bz + S.T @ precomp.B
        return value, grad
    if isinstance(precomp, LowRankPrecomp):
        if z.shape[1] != precomp.k:
            raise DimensionMismatch("z has %d columns, expected k=%d" % (z.shape[1], precomp.k))
        q = z.shape[0]
        n = precomp.n
        if precomp.k == 0:
            return n * np.log(q), np.zeros_like(z)
        weighted = precomp.mu * z  # (q, k)
        site_logits = precomp.P @ weighted.T  # (n, q)
        quad = -0.5 * float(np.sum(precomp.mu * z * z))
        value = quad + float(np.sum(logsumexp(site_logits, axis=1)))
        S = softmax(site_logits, axis=1)
        grad = precomp.mu * (S.T @ precomp.P - z)
        return value, grad
    raise TypeError("expected AGPrecomp or LowRankPrecomp")


# ----------------------------------------------------------- serialization

def write_trace(trace, csv_path):
    """Write the trace CSV (iter, phi, x_1..x_n with 1-based states) plus a
    JSON sidecar with timings and seed lineage at <csv_path>.meta.json."""
    n = trace.draws.shape[1]
    header = "iter,phi," + ",".join("x_%d" % (i + 1) for i in range(n))
    lines = [header]
    for t in range(trace.draws.shape[0]):
        it = trace.burn_in + t + 1
        states = ",".join(str(int(s) + 1) for s in trace.draws[t])
        lines.append("%d,%s,%s" % (it, format(trace.phi_series[t], ".17g"), states))
    with open(csv_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    sidecar = {
        "sampler": trace.sampler,
        "master_seed": int(trace.master_seed),
        "stream_id": int(trace.stream_id),
        "m": int(trace.m),
        "burn_in": int(trace.burn_in),
        "wall_seconds_sampling": trace.wall_seconds_sampling,
        "wall_seconds_precompute": trace.wall_seconds_precompute,
    }
    with open(str(csv_path) + ".meta.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ------------------------------------------------------------ kernel bench

def kernel_seconds_per_iteration(kind, model, iters, stream,
                                 epsilon=DEFAULT_EPSILON, repeats=3):
    """Median-free min-of-repeats timing of the bare step kernel.

    Only the two AG variants are supported; the trace recording (which is
    O(n^2) per iteration regardless of kernel) is deliberately excluded so the
    kernel's own complexity is what gets measured.
    """
    kind = SamplerKind(kind)
    q = int(model.q)
    x = stream.generator.integers(0, q, size=model.n).astype(np.int64)
    if kind == SamplerKind.AG_GIBBS:
        pre = precompute_ag(model.coupling, model.beta)
        B = np.ascontiguousarray(pre.B)
        L = np.ascontiguousarray(pre.chol_Binv)

        def call(r):
            _kernels.ag_bench(B, L, x, r, q, stream.generator)
    elif kind == SamplerKind.LOWRANK_AG_GIBBS:
        lr = precompute_lowrank(model.coupling, model.beta, epsilon)
        mu = np.ascontiguousarray(lr.mu)
        P = np.ascontiguousarray(lr.P)

        def call(r):
            _kernels.lowrank_bench(mu, P, x, r, q, stream.generator)
    else:
        raise ValueError("kernel bench supports only the AG variants")
    call(1)  # compile + warm caches
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        call(int(iters))
        best = min(best, time.perf_counter() - t0)
    return best / float(iters)
