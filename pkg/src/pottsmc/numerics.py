"""Seeded random streams and dense linear-algebra primitives.

Every tolerance used as an acceptance threshold elsewhere in the package is a
named constant here, so there is exactly one place to audit them.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, InvalidWeight, NotPositiveDefinite

# Numerical tolerances (engineering choices, kept in one place).
SYMMETRY_TOL = 1e-12          # max |M - M'| entry for "symmetric" inputs
CHOLESKY_RTOL = 1e-9          # relative Frobenius error of L L' vs M
EIGEN_ORTHO_TOL = 1e-10       # max |P'P - I| entry
EIGEN_RECON_RTOL = 1e-8       # relative Frobenius error of P diag(mu) P' vs M
AG_INVERSE_TOL = 1e-7         # ||(L L') B - I||_F / sqrt(n) for the AG precompute
PMF_SUM_TOL = 1e-10           # enumeration oracle pmf normalization slack
DEFAULT_EPSILON = 1e-10       # low-rank truncation threshold
DEFAULT_JITTER = 1e-8         # relative shift padding for the AG precompute
CERT_SLACK = 1e-10            # arithmetic slack when checking certificate bounds


@dataclass
class RngStream:
    """One reproducible random stream, addressed by (master_seed, stream_id).

    The same pair always yields the same sequence; distinct stream_ids from
    one master seed give statistically independent streams. A stream is
    single-owner mutable state: exactly one chain or replica consumes it.
    """

    master_seed: int
    stream_id: int
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.master_seed < 0 or self.stream_id < 0:
            raise ValueError("master_seed and stream_id must be non-negative")
        seq = np.random.SeedSequence([int(self.master_seed), int(self.stream_id)])
        self.generator = np.random.default_rng(seq)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues sorted descending with matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_symmetric(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix, got shape %s" % (M.shape,))
    if M.shape[0] >= 1 and np.max(np.abs(M - M.T)) > SYMMETRY_TOL:
        raise ValueError("matrix is not symmetric within %g" % SYMMETRY_TOL)
    return M


def cholesky_spd(M):
    """Lower-triangular L with L L' = M for symmetric positive-definite M.

    Raises NotPositiveDefinite when a pivot <= 0 is encountered, which for the
    AG precompute signals that the diagonal shift was too small.
    """
    M = _check_symmetric(M)
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    if np.any(np.diag(L) <= 0):
        raise NotPositiveDefinite("non-positive pivot in Cholesky factor")
    return L


def sym_eigen(M):
    """Full symmetric eigendecomposition with eigenvalues sorted descending."""
    M = _check_symmetric(M)
    try:
        vals, vecs = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(vals)[::-1]
    return SpectralDecomposition(eigenvalues=vals[order], eigenvectors=vecs[:, order])


def standard_normal_vec(stream, n):
    """n i.i.d. standard normal draws from the stream."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return stream.generator.standard_normal(int(n))


def categorical_from_logweights(stream, logw):
    """Draw an index in {0..q-1} with P(a) proportional to exp(logw[a]).

    Max-subtraction keeps the exponentials in range for any finite log-weights.
    """
    logw = np.asarray(logw, dtype=float)
    if logw.ndim != 1 or logw.size < 1:
        raise InvalidWeight("logw must be a non-empty 1-d vector")
    if not np.all(np.isfinite(logw)):
        raise InvalidWeight("non-finite categorical log-weight")
    w = np.exp(logw - np.max(logw))
    c = np.cumsum(w)
    u = stream.generator.random() * c[-1]
    return int(min(np.searchsorted(c, u, side="right"), logw.size - 1))
