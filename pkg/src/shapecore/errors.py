"""Exception types raised across the pipeline."""


class ShapeCoreError(Exception):
    """Base class for all shapecore errors."""


class MalformedHeader(ShapeCoreError):
    """NPY file has a bad magic string, version, or header dict."""


class UnsupportedDtype(ShapeCoreError):
    """NPY element type is outside the supported set."""


class NotThreeDimensional(ShapeCoreError):
    """Mask input does not have exactly three axes."""


class TruncatedPayload(ShapeCoreError):
    """NPY payload is shorter than the header-declared element count."""


class NonPositiveSpacing(ShapeCoreError):
    """A spacing component is zero, negative, or not finite."""


class ShapeExceedsBounds(ShapeCoreError):
    """Synthetic shape does not fit its grid with a one-voxel margin."""


class IoFailure(ShapeCoreError):
    """File could not be read or written."""


class EmptyRoi(ShapeCoreError):
    """Mask contains no occupied voxels."""


class NoVertices(ShapeCoreError):
    """Diameter computation was asked for an empty vertex set."""


class NoCasesFound(ShapeCoreError):
    """Benchmark dataset directory contains no NPY masks."""


class MissingBaseline(ShapeCoreError):
    """Speedup table requested against a baseline with no records."""


class NoRecords(ShapeCoreError):
    """Plot data requested from an empty record list."""
