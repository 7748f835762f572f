"""Exception hierarchy shared across the package."""


class FatigueUQError(Exception):
    """Base class for all package errors."""


# --- physics -------------------------------------------------------------

class DegenerateFitError(FatigueUQError):
    """S-N fit is underdetermined (fewer than 2 distinct stresses or cycles)."""


class NonPositiveInputError(FatigueUQError):
    """Stress or cycle values must be strictly positive."""


class ZeroExponentError(FatigueUQError):
    """Power-law inversion is undefined for a zero exponent."""


class NonPositiveStressError(FatigueUQError):
    """Stress must be strictly positive."""


class InvalidRatioError(FatigueUQError):
    """Stress ratio R must satisfy R < 1."""


class MissingParameterError(FatigueUQError):
    """A required model parameter or observable is absent."""


class NonPositiveLifeError(FatigueUQError):
    """Cycle counts must be strictly positive."""


class NoRootError(FatigueUQError):
    """Target damage value lies outside the bracketed range."""


class NonMonotoneError(FatigueUQError):
    """Life model is not strictly decreasing on the bracket."""


# --- dataset -------------------------------------------------------------

class HeaderMismatchError(FatigueUQError):
    """CSV header does not match the schema column set."""


class RowParseError(FatigueUQError):
    """One or more CSV rows contain unparseable or invalid cells."""


class SchemaMismatchError(FatigueUQError):
    """Two datasets (or a dataset and a model) disagree on columns."""


class EmptySplitError(FatigueUQError):
    """Operation requires a non-empty data split."""


class NonPositiveTargetError(FatigueUQError):
    """Log transform requires strictly positive targets."""


class InvalidKError(FatigueUQError):
    """Fold count must satisfy 2 <= k <= n."""


class InvalidSpecError(FatigueUQError):
    """Configuration object violates its invariants."""


# --- model contract ------------------------------------------------------

class EmptyTrainingSetError(FatigueUQError):
    """Cannot fit a model on zero rows."""


class UnsupportedLossError(FatigueUQError):
    """The physics loss is only available to gradient-trained families."""


# --- classical regressors ------------------------------------------------

class EmptyInputError(FatigueUQError):
    """Tree fitting requires at least one row."""


class DegenerateVarianceError(FatigueUQError):
    """All targets identical: the initial scale parameter would be zero."""


class NotPositiveDefiniteError(FatigueUQError):
    """Kernel matrix stayed indefinite after jitter escalation."""


# --- neural / bayesian ---------------------------------------------------

class DimensionMismatchError(FatigueUQError):
    """Input dimension does not match the network architecture."""


class NonFiniteLossError(FatigueUQError):
    """Training diverged to a non-finite loss."""


class NoMembersError(FatigueUQError):
    """Ensemble prediction requires at least one trained member."""


class NoSamplesError(FatigueUQError):
    """Monte Carlo prediction requires at least one sample."""


class AllRejectedError(FatigueUQError):
    """Sampler accepted no proposals after warmup."""


class EmptyChainError(FatigueUQError):
    """Posterior prediction requires a non-empty chain."""


# --- evaluation ----------------------------------------------------------

class LengthMismatchError(FatigueUQError):
    """Paired vectors must have equal non-zero length."""


class ZeroWidthError(FatigueUQError):
    """Composite metric is undefined for zero mean interval width."""


class EmptyReportError(FatigueUQError):
    """Rendering requires a non-empty report."""
