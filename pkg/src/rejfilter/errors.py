"""Exception types raised by the library."""


class RejectionFilterError(Exception):
    """Base class for all errors raised by rejfilter."""


class CorruptModelError(RejectionFilterError, ValueError):
    """A Gaussian model whose covariance is not symmetric PSD within tolerance."""


class DimensionMismatchError(RejectionFilterError, ValueError):
    pass


class InvalidLikelihoodError(RejectionFilterError, ValueError):
    """A likelihood evaluation returned a negative or non-finite value."""


class DegenerateModelError(RejectionFilterError, ValueError):
    """Experiment design is undefined for a zero-spread model."""


class DegenerateCloudError(RejectionFilterError):
    """Every feature has zero variance across the particle cloud."""


class CorpusIntegrityError(RejectionFilterError, ValueError):
    pass


class IncomparableRegistersError(RejectionFilterError, ValueError):
    """Two log-likelihood registers were fed a different number of updates."""
