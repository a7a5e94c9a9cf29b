"""Custom exception types for the ranking toolkit."""

# Exit codes per CLI contract
EXIT_VALIDATION = 1
EXIT_IO = 2


class RankerError(Exception):
    """Base exception for all toolkit errors."""

    exit_code: int = EXIT_VALIDATION

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class ManifestParseError(RankerError):
    """Raised when a manifest line is not a well-formed record object."""

    def __init__(self, line_number: int, details: str = ""):
        self.line_number = line_number
        message = f"Malformed manifest line {line_number}"
        if details:
            message += f": {details}"
        super().__init__(message)


class ManifestValidationError(RankerError):
    """Raised when manifest content violates the record schema."""

    def __init__(self, details: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"Invalid manifest record at line {line_number}: {details}"
        else:
            message = f"Invalid manifest: {details}"
        super().__init__(message)


class UndefinedScoreError(RankerError):
    """Raised when a proxy score is requested for a record without votes."""

    def __init__(self, record_ids: list[str]):
        self.record_ids = list(record_ids)
        shown = ", ".join(self.record_ids[:10])
        if len(self.record_ids) > 10:
            shown += f", ... ({len(self.record_ids)} total)"
        super().__init__(f"Proxy score undefined (upvotes + downvotes = 0) for: {shown}")


class DegenerateImageError(RankerError):
    """Raised when an image or a crop window has no pixels."""

    def __init__(self, details: str):
        super().__init__(f"Degenerate image: {details}")


class ImageNotFoundError(RankerError):
    """Raised when an input path doesn't exist."""

    exit_code = EXIT_IO

    def __init__(self, path: str):
        self.path = path
        super().__init__(f"Input file not found: {path}")


class ImageDecodeError(RankerError):
    """Raised when a file exists but cannot be decoded as an RGB image."""

    exit_code = EXIT_IO

    def __init__(self, path: str, details: str = ""):
        self.path = path
        message = f"Image cannot be decoded: {path}"
        if details:
            message += f" ({details})"
        super().__init__(message)


class OutputWriteError(RankerError):
    """Raised when an output file cannot be written."""

    exit_code = EXIT_IO

    def __init__(self, path: str, details: str = ""):
        message = f"Failed to write output file: {path}"
        if details:
            message += f" ({details})"
        super().__init__(message)


class NoPairDataError(RankerError):
    """Raised when no pair class has eligible images."""

    def __init__(self, details: str = "all six pair classes are empty"):
        super().__init__(f"No pair data: {details}")


class PairDropError(RankerError):
    """Raised when too many pairs fail to materialize."""

    def __init__(self, dropped: int, total: int):
        self.dropped = dropped
        self.total = total
        super().__init__(
            f"{dropped} of {total} pairs dropped during materialization (limit is 10%)"
        )


class ContractViolationError(RankerError):
    """Raised when a feature extractor breaks its output contract."""

    def __init__(self, extractor: str, details: str):
        super().__init__(f"Extractor '{extractor}' violates its contract: {details}")


class DimensionMismatchError(RankerError):
    """Raised when vector lengths disagree."""

    def __init__(self, expected: int, got: int, what: str = "feature vector"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} has dimension {got}, expected {expected}")


class NumericError(RankerError):
    """Raised when a non-finite value appears in scores, losses or gradients."""

    def __init__(self, details: str):
        self.details = details
        super().__init__(f"Numeric failure: {details}")


class CheckpointError(RankerError):
    """Raised when a checkpoint file cannot be read."""

    exit_code = EXIT_IO

    def __init__(self, path: str, details: str):
        super().__init__(f"Invalid checkpoint {path}: {details}")


class FeatureStoreError(RankerError):
    """Raised when a feature store file is malformed or lacks a key."""

    exit_code = EXIT_IO

    def __init__(self, path: str, details: str):
        super().__init__(f"Invalid feature store {path}: {details}")


class LeakageError(RankerError):
    """Raised when test records also appear in train or val."""

    def __init__(self, record_ids: list[str]):
        self.record_ids = sorted(record_ids)
        super().__init__(
            "Train/test leakage detected for ids: " + ", ".join(self.record_ids)
        )


class UndefinedMetricError(RankerError):
    """Raised when a correlation or accuracy has no defined value."""

    def __init__(self, metric: str, details: str):
        self.metric = metric
        super().__init__(f"{metric} undefined: {details}")


class ExtractorUnavailableError(RankerError):
    """Raised when a neural extractor cannot be loaded."""

    exit_code = EXIT_IO

    def __init__(self, name: str, details: str = ""):
        message = f"Feature extractor unavailable: {name}"
        if details:
            message += f" ({details})"
        super().__init__(message)


class FeatureExtractionError(RankerError):
    """Raised when images a command depends on cannot be turned into features."""

    exit_code = EXIT_IO

    def __init__(self, failures: list[tuple[str, str]]):
        self.failures = list(failures)
        key, details = self.failures[0]
        super().__init__(
            f"Cannot extract features for {len(self.failures)} image(s) (first: {key}: {details})"
        )


class ExtractorMismatchWarning(UserWarning):
    """Checkpoint was trained with a different extractor pair."""
