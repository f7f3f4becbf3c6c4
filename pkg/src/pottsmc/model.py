"""The Potts target distribution and an exact enumeration oracle.

States are 0-based internally ({0..q-1}); file formats render them 1-based.
The weight of a configuration x is exp(H(x)) with Hamiltonian
H(x) = (beta/2) sum_{i,j} A(i,j) 1{x_i = x_j} over ordered pairs, and the
summary statistic phi(x) = 2 H(x) drops the 1/2. Diagonal entries of A
contribute a configuration-independent constant (zero under the Zeroed
convention); they are kept as stored, never silently removed.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coupling import CouplingMatrix, DiagonalConvention, custom, precompute_lowrank
from .errors import TooLarge
from .numerics import CERT_SLACK, PMF_SUM_TOL

ENUMERATION_GUARD = 2 ** 24  # max q^n the oracle will enumerate
_CHUNK = 1 << 14


@dataclass(frozen=True)
class PottsModel:
    coupling: CouplingMatrix
    beta: float
    q: int

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q must be >= 2")
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    @property
    def n(self):
        return self.coupling.n


@dataclass(frozen=True)
class ExactSummary:
    log_partition: float
    mean_phi: float
    pmf: Optional[np.ndarray]


def one_hot(x, ell):
    """Indicator vector y_ell with y_ell(i) = 1 iff x_i = ell."""
    x = np.asarray(x)
    return (x == ell).astype(float)


def summary_phi(model, x):
    """phi(x) = beta * sum_{i,j} A(i,j) 1{x_i = x_j}, via the one-hot identity."""
    A = model.coupling.entries
    x = np.asarray(x)
    if x.shape != (model.n,):
        raise ValueError("configuration shape %s does not match n=%d" % (x.shape, model.n))
    acc = 0.0
    for ell in range(model.q):
        y = one_hot(x, ell)
        acc += y @ A @ y
    return model.beta * acc


def hamiltonian(model, x):
    """H(x) = (beta/2) * sum_{i,j} A(i,j) 1{x_i = x_j} = phi(x) / 2."""
    return 0.5 * summary_phi(model, x)


def _state_count(model):
    size = model.q ** model.n  # exact integer arithmetic
    if size > ENUMERATION_GUARD:
        raise TooLarge("q^n = %d exceeds enumeration guard %d" % (size, ENUMERATION_GUARD))
    return size


def _decode_configs(idx, n, q):
    """Mixed-radix decode: site j is digit j of the index, base q."""
    X = np.empty((idx.size, n), dtype=np.int64)
    rest = idx.copy()
    for j in range(n):
        X[:, j] = rest % q
        rest //= q
    return X


def config_indices(X, q):
    """Inverse of the mixed-radix decode; X is (m, n) with entries in [0, q)."""
    X = np.asarray(X, dtype=np.int64)
    weights = q ** np.arange(X.shape[-1], dtype=np.int64)
    return X @ weights


def _chunk_hamiltonians(model, idx):
    """H(x) for a chunk of configuration indices, vectorized over the chunk."""
    A = model.coupling.entries
    X = _decode_configs(idx, model.n, model.q)
    H = np.zeros(idx.size)
    for ell in range(model.q):
        Y = (X == ell).astype(float)
        H += np.einsum("ci,ci->c", Y @ A, Y)
    return 0.5 * model.beta * H


def hamiltonian_table(model):
    """H(x) for every configuration, in mixed-radix enumeration order."""
    size = _state_count(model)
    out = np.empty(size)
    for start in range(0, size, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, size), dtype=np.int64)
        out[start:start + idx.size] = _chunk_hamiltonians(model, idx)
    return out


def phi_table(model):
    """phi(x) = 2 H(x) for every configuration, enumeration order."""
    return 2.0 * hamiltonian_table(model)


def exact_summary(model, want_pmf=False):
    """Enumerate all q^n configurations: log Z, E[phi], optionally the pmf.

    The log-partition uses a running-maximum log-sum-exp so large beta cannot
    overflow.
    """
    size = _state_count(model)
    if want_pmf:
        H = hamiltonian_table(model)
        m = H.max()
        w = np.exp(H - m)
        s = w.sum()
        log_z = m + np.log(s)
        pmf = w / s
        total = pmf.sum()
        if abs(total - 1.0) > PMF_SUM_TOL:
            raise ArithmeticError("pmf sums to %.17g, off by more than %g" % (total, PMF_SUM_TOL))
        mean_phi = 2.0 * float(H @ pmf)
        return ExactSummary(float(log_z), mean_phi, pmf)
    m_run = -np.inf
    s_run = 0.0
    t_run = 0.0
    for start in range(0, size, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, size), dtype=np.int64)
        H = _chunk_hamiltonians(model, idx)
        m_new = max(m_run, H.max())
        if m_new > m_run and np.isfinite(m_run):
            scale = np.exp(m_run - m_new)
            s_run *= scale
            t_run *= scale
        m_run = m_new
        w = np.exp(H - m_run)
        s_run += w.sum()
        t_run += H @ w
    log_z = m_run + np.log(s_run)
    mean_phi = 2.0 * t_run / s_run
    return ExactSummary(float(log_z), float(mean_phi), None)


def kl_between(model_p, model_q):
    """(KL(P|Q), KL(Q|P)) from the exact log-pmfs of two same-shaped models."""
    if model_p.n != model_q.n or model_p.q != model_q.q:
        raise ValueError("models must share n and q")
    _state_count(model_p)
    hp = hamiltonian_table(model_p)
    hq = hamiltonian_table(model_q)
    logp = hp - _logsumexp(hp)
    logq = hq - _logsumexp(hq)
    kl_pq = float(np.exp(logp) @ (logp - logq))
    kl_qp = float(np.exp(logq) @ (logq - logp))
    return max(kl_pq, 0.0), max(kl_qp, 0.0)


def _logsumexp(v):
    m = v.max()
    return m + np.log(np.exp(v - m).sum())


def truncated_model(model, epsilon):
    """The truncated target: same (beta, q) with coupling B-tilde / beta.

    B-tilde keeps the spectral components of B = beta (A + |lambda_min| I)
    with eigenvalue > epsilon, so the truncated Hamiltonian is
    (1/2) sum_ell y_ell' B-tilde y_ell. Returns (model_q, lowrank_precomp).
    """
    lr = precompute_lowrank(model.coupling, model.beta, epsilon)
    Bt = lr.truncated_matrix() / model.beta
    q_coupling = custom(Bt, DiagonalConvention.RETAINED)
    return PottsModel(q_coupling, model.beta, model.q), lr


def shifted_model(model):
    """The shift-equivalent target with coupling A + |lambda_min| I.

    Its pmf equals the original model's exactly; its log-partition carries the
    constant n beta lambda / 2 that the truncation bounds are stated against.
    """
    from .numerics import sym_eigen

    A = model.coupling.entries
    lam_abs = abs(float(sym_eigen(A).eigenvalues[-1]))
    M = A + lam_abs * np.eye(model.n)
    M = (M + M.T) / 2.0
    return PottsModel(custom(M, DiagonalConvention.RETAINED), model.beta, model.q)


@dataclass(frozen=True)
class Lemma1Certificate:
    """Exact truncation-error report with both bound conventions.

    bound_* are the proof-level bounds n eps / 2 and n eps (eps thresholds
    eigenvalues of B, which already contains beta); stated_bound_* carry the
    extra beta factor. Pass flags compare against the proof-level bounds with
    arithmetic slack only.
    """

    epsilon: float
    k: int
    delta_log_z: float
    kl_pq: float
    kl_qp: float
    bound_log_z: float
    bound_kl: float
    stated_bound_log_z: float
    stated_bound_kl: float
    pass_log_z: bool
    pass_kl: bool
    pass_log_z_stated: bool
    pass_kl_stated: bool

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "k": self.k,
            "delta_log_z": self.delta_log_z,
            "kl_pq": self.kl_pq,
            "kl_qp": self.kl_qp,
            "bound_log_z": self.bound_log_z,
            "bound_kl": self.bound_kl,
            "stated_bound_log_z": self.stated_bound_log_z,
            "stated_bound_kl": self.stated_bound_kl,
            "pass_log_z": self.pass_log_z,
            "pass_kl": self.pass_kl,
            "pass_log_z_stated": self.pass_log_z_stated,
            "pass_kl_stated": self.pass_kl_stated,
        }


def lemma1_certificate(model, epsilon):
    """Certify |delta log Z| <= n eps / 2 and max KL <= n eps by enumeration."""
    _state_count(model)
    model_b = shifted_model(model)
    model_q, lr = truncated_model(model, epsilon)
    log_z_b = exact_summary(model_b).log_partition
    log_z_q = exact_summary(model_q).log_partition
    delta = log_z_b - log_z_q
    kl_pq, kl_qp = kl_between(model_b, model_q)
    n = model.n
    bound_log_z = n * epsilon / 2.0
    bound_kl = n * epsilon
    stated_log_z = n * model.beta * epsilon / 2.0
    stated_kl = n * model.beta * epsilon
    max_kl = max(kl_pq, kl_qp)
    return Lemma1Certificate(
        epsilon=float(epsilon),
        k=lr.k,
        delta_log_z=float(delta),
        kl_pq=kl_pq,
        kl_qp=kl_qp,
        bound_log_z=bound_log_z,
        bound_kl=bound_kl,
        stated_bound_log_z=stated_log_z,
        stated_bound_kl=stated_kl,
        pass_log_z=bool(abs(delta) <= bound_log_z + CERT_SLACK),
        pass_kl=bool(max_kl <= bound_kl + CERT_SLACK),
        pass_log_z_stated=bool(abs(delta) <= stated_log_z + CERT_SLACK),
        pass_kl_stated=bool(max_kl <= stated_kl + CERT_SLACK),
    )
