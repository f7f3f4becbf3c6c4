"""Markov chain Monte Carlo for Potts models on arbitrary symmetric couplings.

The package provides auxiliary-Gaussian block Gibbs samplers (dense and
low-rank variants, with two-state specializations), classical baselines
(single-site heat bath, Swendsen-Wang, Wolff), replica exchange over a
temperature ladder, an exact enumeration oracle for small systems, and
rank-normalized convergence diagnostics.  A command line driver under
``pottsmc.cli`` exposes the same functionality for batch runs.
"""

from .errors import (
    ConfigError,
    ConvergenceFailure,
    DegenerateGraph,
    DimensionMismatch,
    InvalidWeight,
    NegativeCoupling,
    NotPositiveDefinite,
    PottsError,
    TooLarge,
    WrongStateCount,
    ZeroVariance,
)
from .numerics import (
    AG_INVERSE_TOL,
    CERT_SLACK,
    CHOLESKY_RTOL,
    DEFAULT_EPSILON,
    DEFAULT_JITTER,
    EIGEN_ORTHO_TOL,
    EIGEN_RECON_RTOL,
    PMF_SUM_TOL,
    SYMMETRY_TOL,
    RngStream,
    SpectralDecomposition,
    categorical_from_logweights,
    cholesky_spd,
    standard_normal_vec,
    sym_eigen,
)
from .coupling import (
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
from .model import (
    ENUMERATION_GUARD,
    ExactSummary,
    Lemma1Certificate,
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
from .samplers import (
    BondConvention,
    BoundSampler,
    ChainTrace,
    InitKind,
    SamplerKind,
    ag_gibbs_step,
    check_compatibility,
    heat_bath_sweep,
    initial_configuration,
    ising_ag_step,
    ising_lowrank_ag_step,
    kernel_seconds_per_iteration,
    lowrank_ag_step,
    make_sampler,
    marginal_z_logdensity,
    run_chain,
    swendsen_wang_step,
    wolff_step,
    write_trace,
)
from .tempering import (
    ExchangeStats,
    TemperingLadder,
    exchange_probability,
    partial_hamiltonian,
    tempered_run,
)
from .diagnostics import (
    BENCHMARK_COLUMNS,
    DiagnosticsReport,
    benchmark_csv_row,
    diagnostics_report,
    ess,
    ess_per_second,
    split_rank_normalized_rhat,
)

__version__ = "0.1.0"

__all__ = [
    "AGPrecomp",
    "AG_INVERSE_TOL",
    "BENCHMARK_COLUMNS",
    "BondConvention",
    "BoundSampler",
    "CERT_SLACK",
    "CHOLESKY_RTOL",
    "ChainTrace",
    "ConfigError",
    "ConvergenceFailure",
    "CouplingMatrix",
    "DEFAULT_EPSILON",
    "DEFAULT_JITTER",
    "DegenerateGraph",
    "DiagnosticsReport",
    "DiagonalConvention",
    "DimensionMismatch",
    "EIGEN_ORTHO_TOL",
    "EIGEN_RECON_RTOL",
    "ENUMERATION_GUARD",
    "ExactSummary",
    "ExchangeStats",
    "Family",
    "InitKind",
    "InvalidWeight",
    "LatticeScale",
    "Lemma1Certificate",
    "LowRankPrecomp",
    "NegativeCoupling",
    "NotPositiveDefinite",
    "PMF_SUM_TOL",
    "PottsError",
    "PottsModel",
    "RngStream",
    "SYMMETRY_TOL",
    "SamplerKind",
    "SpectralDecomposition",
    "TemperingLadder",
    "TooLarge",
    "WrongStateCount",
    "ZeroVariance",
    "ag_gibbs_step",
    "benchmark_csv_row",
    "categorical_from_logweights",
    "check_compatibility",
    "cholesky_spd",
    "curie_weiss",
    "custom",
    "diagnostics_report",
    "erdos_renyi",
    "ess",
    "ess_per_second",
    "exact_summary",
    "exchange_probability",
    "hamiltonian",
    "hamiltonian_table",
    "heat_bath_sweep",
    "hopfield",
    "initial_configuration",
    "ising_ag_step",
    "ising_lowrank_ag_step",
    "kernel_seconds_per_iteration",
    "kl_between",
    "lattice_2d",
    "lemma1_certificate",
    "load_coupling",
    "lowrank_ag_step",
    "make_sampler",
    "marginal_z_logdensity",
    "one_hot",
    "partial_hamiltonian",
    "phi_table",
    "precompute_ag",
    "precompute_lowrank",
    "run_chain",
    "save_coupling",
    "shifted_model",
    "sk",
    "split_rank_normalized_rhat",
    "standard_normal_vec",
    "summary_phi",
    "swendsen_wang_step",
    "sym_eigen",
    "tempered_run",
    "truncated_model",
    "wolff_step",
    "write_trace",
]
