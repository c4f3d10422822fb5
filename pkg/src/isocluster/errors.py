"""Exception hierarchy shared by the package."""


class IsoClusterError(Exception):
    pass


class DimensionError(IsoClusterError, ValueError):
    """A coordinate index is outside the configured dimensionality."""


class InvalidPointError(IsoClusterError, ValueError):
    pass


class StatsUnderflowError(IsoClusterError, ValueError):
    """Removing a point from an empty summary."""


class EmptySummaryError(IsoClusterError, ValueError):
    """Deviation requested for a summary with no points."""


class DegenerateInputError(IsoClusterError, ValueError):
    pass


class DegeneratePlaneError(DegenerateInputError):
    pass


class SplitError(IsoClusterError, ValueError):
    pass


class DecodeError(IsoClusterError, ValueError):
    pass


class MalformedBase64Error(DecodeError):
    pass


class TruncatedPayloadError(DecodeError):
    pass


class UnsortedKeysError(DecodeError):
    pass


class ZeroValueError(DecodeError):
    pass


class SnapshotError(IsoClusterError):
    pass


class SnapshotVersionError(SnapshotError):
    pass


class SnapshotCorruptError(SnapshotError):
    pass


class SnapshotCountError(SnapshotCorruptError):
    pass


class IngestError(IsoClusterError, ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
        self.message = message


class LexiconError(IsoClusterError, ValueError):
    pass
