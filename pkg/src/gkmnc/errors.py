"""Exception hierarchy shared by all gkmnc modules."""


class GkmncError(Exception):
    """Base class for every error raised by this package."""


# --- dataset ---------------------------------------------------------------

class SchemaError(GkmncError):
    """Schema file is malformed or violates schema invariants."""


class MissingColumn(GkmncError):
    """A column required by the schema is absent from the data file."""


class TypeMismatch(GkmncError):
    """A cell does not parse as the type its column declares."""


class UnknownTargetLabel(GkmncError):
    """A target cell is empty, so it cannot be mapped to +1 / -1."""


class EmptyInput(GkmncError):
    """An operation that needs at least one row received none."""


class KTooLarge(GkmncError):
    """More folds requested than there are rows."""


class DimensionMismatch(GkmncError):
    """Vector or matrix dimensions do not agree."""


# --- infogain --------------------------------------------------------------

class AllZero(GkmncError):
    """Entropy of an all-zero count vector is undefined."""


class SplitInfoZero(GkmncError):
    """Gain ratio is undefined for a single-valued attribute."""


# --- kmeans ----------------------------------------------------------------

class KExceedsRows(GkmncError):
    """Fewer distinct points than requested clusters."""


class EmptyCentroidList(GkmncError):
    """Cannot assign a point against zero centroids."""


class SingleCluster(GkmncError):
    """Davies-Bouldin is undefined for a single cluster."""


# --- optim -----------------------------------------------------------------

class NoBracketFound(GkmncError):
    """Forward bracketing ran out of expansions on a descending function."""


class InvalidInterval(GkmncError):
    """Line-search interval has non-positive length."""


# --- classifiers -----------------------------------------------------------

class EmptyData(GkmncError):
    """Classifier training received an empty partition."""


class CholeskyFailure(GkmncError):
    """Kernel matrix is not positive definite; increase jitter."""


class NonConvergence(GkmncError):
    """Newton mode finding did not converge within its iteration cap."""


class PartitionTooLarge(GkmncError):
    """Partition exceeds the GPC size cap; use grouping or clustering to
    split the data before training a Gaussian-process leaf."""


# --- pipeline --------------------------------------------------------------

class UnseenNominalLabel(GkmncError):
    """A forecast example carries a grouping label never seen in training."""


class EmptyValidation(GkmncError):
    """Evaluation needs at least one validation row."""


class ZeroTotal(GkmncError):
    """Weighted accuracy aggregation received zero total weight."""


class FormatVersionMismatch(GkmncError):
    """Model file was written by an unsupported format version."""


class CorruptFile(GkmncError):
    """Model file is truncated or structurally invalid."""
