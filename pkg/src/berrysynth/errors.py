"""Exception types shared across the package."""


class BerrySynthError(Exception):
    """Base class for all errors raised by this package."""


class InvalidCameraError(BerrySynthError):
    """Camera construction with a degenerate view basis or bad parameters."""


class BehindCameraError(BerrySynthError):
    """A point (or mesh vertex) lies at or behind the camera plane."""


class OffScreenError(BerrySynthError):
    """A projected bounding box falls entirely outside the image."""


class InvalidConfigError(BerrySynthError):
    """A generation config violates its own invariants (empty ranges etc.)."""


class InvalidSettingsError(BerrySynthError):
    """Render settings or framebuffer dimensions are unusable."""


class InconsistentSceneError(BerrySynthError):
    """An instance id shows up in a framebuffer without a known class."""


class CapacityError(BerrySynthError):
    """A dataset pool is too small for the requested mix preset."""


class AnnotationParseError(BerrySynthError):
    """A label or prediction file could not be parsed.

    Carries the offending path and (1-based) line number when known.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)


class UnknownImageError(BerrySynthError):
    """Predictions reference image ids absent from the ground-truth manifest."""
