"""Coupling-matrix families and the one-time sampler precomputations.

A coupling matrix is the symmetric n x n interaction matrix of the model. The
precompute step turns it into either a shifted SPD matrix with the Cholesky
factor of its inverse (regular auxiliary-Gaussian sampling) or an epsilon-
truncated spectral expansion (low-rank sampling).
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DegenerateGraph, NotPositiveDefinite
from .numerics import (
    AG_INVERSE_TOL,
    DEFAULT_EPSILON,
    DEFAULT_JITTER,
    cholesky_spd,
    sym_eigen,
)


class Family(str, enum.Enum):
    LATTICE2D = "Lattice2D"
    CURIE_WEISS = "CurieWeiss"
    ERDOS_RENYI = "ErdosRenyi"
    SK = "SK"
    HOPFIELD = "Hopfield"
    CUSTOM = "Custom"


class DiagonalConvention(str, enum.Enum):
    ZEROED = "Zeroed"
    RETAINED = "Retained"


class LatticeScale(str, enum.Enum):
    NONE = "None"
    AVERAGE_DEGREE = "AverageDegree"


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric real coupling matrix with generator provenance."""

    entries: np.ndarray
    family: Family
    diagonal_convention: DiagonalConvention

    def __post_init__(self):
        A = np.asarray(self.entries, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("coupling must be square, got shape %s" % (A.shape,))
        if not np.all(np.isfinite(A)):
            raise ValueError("coupling entries must be finite")
        if not np.array_equal(A, A.T):
            raise ValueError("coupling must be exactly symmetric")
        if self.diagonal_convention == DiagonalConvention.ZEROED and np.any(np.diag(A) != 0.0):
            raise ValueError("Zeroed convention requires an exactly zero diagonal")
        object.__setattr__(self, "entries", A)

    @property
    def n(self):
        return self.entries.shape[0]


def lattice_2d(side, scale=LatticeScale.NONE):
    """Adjacency of the side x side square grid (no wraparound).

    scale=None keeps unit edge weights; scale=AverageDegree divides every edge
    by the average degree 2E/n.
    """
    side = int(side)
    if side < 2:
        raise ValueError("side must be >= 2")
    scale = LatticeScale(scale) if scale is not None else LatticeScale.NONE
    n = side * side
    A = np.zeros((n, n))
    for r in range(side):
        for c in range(side):
            i = r * side + c
            if c + 1 < side:
                j = i + 1
                A[i, j] = A[j, i] = 1.0
            if r + 1 < side:
                j = i + side
                A[i, j] = A[j, i] = 1.0
    if scale == LatticeScale.AVERAGE_DEGREE:
        dbar = A.sum() / n
        A /= dbar
    return CouplingMatrix(A, Family.LATTICE2D, DiagonalConvention.ZEROED)


def curie_weiss(n):
    """Complete-graph coupling with every off-diagonal entry 1/n."""
    n = int(n)
    if n < 2:
        raise ValueError("n must be >= 2")
    A = np.full((n, n), 1.0 / n)
    np.fill_diagonal(A, 0.0)
    return CouplingMatrix(A, Family.CURIE_WEISS, DiagonalConvention.ZEROED)


def erdos_renyi(n, p, stream):
    """Erdos-Renyi graph adjacency scaled by the realized average degree."""
    n = int(n)
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must be in (0, 1]")
    iu = np.triu_indices(n, k=1)
    edges = stream.generator.random(iu[0].size) < p
    A = np.zeros((n, n))
    A[iu[0][edges], iu[1][edges]] = 1.0
    A = A + A.T
    n_edges = int(edges.sum())
    if n_edges == 0:
        raise DegenerateGraph("realized graph has no edges; degree scaling undefined")
    dbar = 2.0 * n_edges / n
    return CouplingMatrix(A / dbar, Family.ERDOS_RENYI, DiagonalConvention.ZEROED)


def sk(n, stream):
    """Spin-glass coupling: upper triangle i.i.d. Normal(0, 1/n), mirrored."""
    n = int(n)
    if n < 2:
        raise ValueError("n must be >= 2")
    iu = np.triu_indices(n, k=1)
    g = stream.generator.standard_normal(iu[0].size) / np.sqrt(n)
    A = np.zeros((n, n))
    A[iu] = g
    A = A + A.T
    return CouplingMatrix(A, Family.SK, DiagonalConvention.ZEROED)


def hopfield(n, d, stream):
    """Hebbian coupling A = eta' eta / max(n, d) from d Rademacher patterns.

    The diagonal (d/max(n,d) at every site) is retained, so A is positive
    semi-definite with rank at most d.
    """
    n = int(n)
    d = int(d)
    if n < 2 or d < 1:
        raise ValueError("need n >= 2 and d >= 1")
    eta = stream.generator.integers(0, 2, size=(d, n)) * 2.0 - 1.0
    A = (eta.T @ eta) / max(n, d)
    A = (A + A.T) / 2.0
    return CouplingMatrix(A, Family.HOPFIELD, DiagonalConvention.RETAINED)


def custom(entries, diagonal_convention=DiagonalConvention.RETAINED):
    """Wrap an explicit symmetric matrix as a coupling."""
    return CouplingMatrix(np.asarray(entries, dtype=float), Family.CUSTOM,
                          DiagonalConvention(diagonal_convention))


@dataclass(frozen=True)
class AGPrecomp:
    """Shifted matrix B = beta (A + lambda I) with the Cholesky factor of B^-1."""

    B: np.ndarray
    shift: float
    chol_Binv: np.ndarray
    beta: float

    @property
    def n(self):
        return self.B.shape[0]


@dataclass(frozen=True)
class LowRankPrecomp:
    """Truncated spectral expansion of B = beta (A + |lambda_min| I).

    Only the k eigenpairs with eigenvalue > epsilon are kept; k = 0 means the
    truncated model is the uniform product measure.
    """

    k: int
    mu: np.ndarray
    P: np.ndarray
    epsilon: float
    beta: float

    @property
    def n(self):
        return self.P.shape[0]

    def truncated_matrix(self):
        """Reassemble B-tilde = sum_j mu_j p_j p_j' (exactly symmetric)."""
        Bt = (self.P * self.mu) @ self.P.T
        return (Bt + Bt.T) / 2.0


def precompute_ag(A, beta, jitter=DEFAULT_JITTER):
    """Shift, invert, and factor the coupling for auxiliary-Gaussian sampling.

    The shift is lambda = |lambda_min(A)| + jitter * max(1, |lambda_min(A)|);
    on Cholesky failure the jitter escalates tenfold, at most twice.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if jitter <= 0:
        raise ValueError("jitter must be positive")
    M = A.entries
    n = A.n
    lam_abs = abs(float(sym_eigen(M).eigenvalues[-1]))
    eye = np.eye(n)
    jit = float(jitter)
    last_exc = None
    for _ in range(3):
        shift = lam_abs + jit * max(1.0, lam_abs)
        B = beta * (M + shift * eye)
        B = (B + B.T) / 2.0
        try:
            L_B = cholesky_spd(B)
            Linv = solve_triangular(L_B, eye, lower=True)
            Binv = Linv.T @ Linv
            Binv = (Binv + Binv.T) / 2.0
            chol_Binv = cholesky_spd(Binv)
        except NotPositiveDefinite as exc:
            last_exc = exc
            jit *= 10.0
            continue
        resid = np.linalg.norm(chol_Binv @ chol_Binv.T @ B - eye) / np.sqrt(n)
        if resid > AG_INVERSE_TOL:
            last_exc = NotPositiveDefinite(
                "inverse residual %.3g exceeds %.1g" % (resid, AG_INVERSE_TOL))
            jit *= 10.0
            continue
        return AGPrecomp(B=B, shift=shift, chol_Binv=chol_Binv, beta=float(beta))
    raise NotPositiveDefinite(
        "shift failed after two jitter escalations: %s" % last_exc)


def precompute_lowrank(A, beta, epsilon=DEFAULT_EPSILON):
    """Eigendecompose B = beta (A + |lambda_min(A)| I) and keep mu_j > epsilon.

    k = 0 is legal (everything truncated); the |lambda_min| shift makes B
    positive semi-definite, so discarded eigenvalues lie in [0, epsilon] up to
    eigensolver noise.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    M = A.entries
    n = A.n
    lam_abs = abs(float(sym_eigen(M).eigenvalues[-1]))
    B = beta * (M + lam_abs * np.eye(n))
    B = (B + B.T) / 2.0
    dec = sym_eigen(B)
    k = int(np.sum(dec.eigenvalues > epsilon))
    return LowRankPrecomp(k=k,
                          mu=dec.eigenvalues[:k].copy(),
                          P=dec.eigenvectors[:, :k].copy(),
                          epsilon=float(epsilon),
                          beta=float(beta))


def save_coupling(A, path):
    """Write the dense text format: one header line, then n rows of n floats.

    17 significant digits make the round-trip bit-exact for float64.
    """
    lines = ["%d,%s,%s" % (A.n, A.family.value, A.diagonal_convention.value)]
    for row in A.entries:
        lines.append(",".join(format(v, ".17g") for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_coupling(path):
    """Read the format written by save_coupling."""
    with open(path) as fh:
        header = fh.readline().strip()
        parts = header.split(",")
        if len(parts) != 3:
            raise ValueError("bad coupling header: %r" % header)
        n = int(parts[0])
        family = Family(parts[1])
        conv = DiagonalConvention(parts[2])
        rows = []
        for _ in range(n):
            line = fh.readline()
            if not line:
                raise ValueError("coupling file truncated: expected %d rows" % n)
            rows.append([float(v) for v in line.strip().split(",")])
    A = np.array(rows, dtype=float)
    if A.shape != (n, n):
        raise ValueError("coupling body shape %s does not match header n=%d" % (A.shape, n))
    return CouplingMatrix(A, family, conv)
