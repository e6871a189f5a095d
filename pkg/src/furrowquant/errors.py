"""Exception hierarchy. Everything raised on purpose derives from FurrowQuantError."""


class FurrowQuantError(Exception):
    """Base class for all errors raised by this package."""


class RasterError(FurrowQuantError):
    """Image decode/encode failures and malformed rasters."""


class MaskClassError(RasterError):
    """A mask contains a class id outside the governing scheme."""

    def __init__(self, value: int, pixel_index: int, class_count: int):
        self.value = value
        self.pixel_index = pixel_index
        self.class_count = class_count
        super().__init__(
            f"unknown class id {value} at pixel {pixel_index} "
            f"(scheme has {class_count} classes)"
        )


class SequenceError(RasterError):
    """Frame-directory scanning problems (empty dir, duplicate stems)."""


class MetricError(FurrowQuantError):
    """Metric preconditions violated (empty frames, shape mismatches)."""


class SegmenterError(FurrowQuantError):
    """A segmentation backend failed to produce a valid mask."""


class ProtocolError(SegmenterError):
    """Remote segmentation wire-protocol violation or transport failure."""


class RemoteStatusError(SegmenterError):
    """The remote worker answered with a non-OK status."""

    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(f"worker returned status {status}: {message}")


class SceneError(FurrowQuantError):
    """Synthetic scene generation cannot satisfy the requested parameters."""


class ReportError(FurrowQuantError):
    """Report construction, emission, or parsing failed."""
