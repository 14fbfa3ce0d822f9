"""Exception types shared across the package."""


class KvarError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(KvarError, ValueError):
    """A parameter is outside its admissible domain."""


class ShapeError(KvarError, ValueError):
    """Array arguments have incompatible or invalid shapes."""


class UnsupportedFamilyError(KvarError, ValueError):
    """The requested operation is not defined for this measure family."""


class DatasetError(KvarError, ValueError):
    """Base class for dataset ingestion failures."""


class DatasetFormatError(DatasetError):
    """Structurally malformed dataset (e.g. ragged rows). Names the row."""


class DatasetParseError(DatasetError):
    """A field failed numeric parsing. Names row and column."""


class EmptyDatasetError(DatasetError):
    """The dataset contains no data rows."""


class SingularityError(KvarError, ValueError):
    """A quantile-density evaluation hit a zero-density point."""


class InsufficientDataError(KvarError, ValueError):
    """Not enough records survive filtering for the requested fit."""
