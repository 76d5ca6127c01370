"""Exception hierarchy shared across the toolkit."""


class StableShapError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(StableShapError):
    """Invalid run configuration, dataset, or argument combination."""


class ModelBridgeError(StableShapError):
    """The external model process failed or produced malformed output."""

    def __init__(self, message: str, batch_index: int | None = None):
        if batch_index is not None:
            message = f"batch {batch_index}: {message}"
        super().__init__(message)
        self.batch_index = batch_index


class OracleCapError(StableShapError):
    """Exact enumeration refused because the feature count exceeds the cap."""

    def __init__(self, n_features: int, cap: int, required: str | None = None):
        if required is None:
            required = f"{2**n_features} coalition evaluations"
        super().__init__(
            f"exact computation over {n_features} features needs {required}; "
            f"the cap is {cap} features"
        )
        self.n_features = n_features
        self.cap = cap


class RankDeficiencyError(StableShapError):
    """Normal equations stayed singular even after the diagonal jitter retry."""


class GameTableError(StableShapError):
    """A coalition mask is missing from an exhaustive game table."""
