"""Exception types shared across the package."""


class PottsError(Exception):
    """Base class for all package-specific errors."""


class NotPositiveDefinite(PottsError):
    """A Cholesky pivot <= 0 was encountered; the matrix is not SPD."""


class ConvergenceFailure(PottsError):
    """The iterative eigensolver backend failed to converge."""


class InvalidWeight(PottsError):
    """A categorical log-weight was NaN or infinite."""


class DegenerateGraph(PottsError):
    """A generated random graph has no edges, so degree scaling is undefined."""


class TooLarge(PottsError):
    """Exact enumeration was requested for a state space above the guard."""


class WrongStateCount(PottsError):
    """A q=2 specialized sampler was asked to run with q != 2."""


class NegativeCoupling(PottsError):
    """A cluster sampler was asked to run on a coupling with negative entries."""


class DimensionMismatch(PottsError):
    """An array argument has a shape incompatible with the precomputation."""


class ZeroVariance(PottsError):
    """All diagnostic input values are identical; R-hat/ESS are undefined."""


class ConfigError(PottsError):
    """An experiment config failed validation; message carries the field path."""
