"""Exception types raised by the drcpo package.

Plain I/O failures (missing files, permission errors) surface as the
builtin OSError family; everything that is a *format* or *domain* problem
gets a dedicated class below so callers can react to specific failures.
"""


class DrcpoError(Exception):
    """Base class for all drcpo-specific errors."""


class FormatError(DrcpoError):
    """A file or byte stream does not match its documented layout."""


class SizeNotMultipleOf16(FormatError):
    """Velodyne binary whose size is not a multiple of 16 bytes."""


class MalformedLine(FormatError):
    """A text record that cannot be parsed. Carries the 1-based line number."""

    def __init__(self, line_no, message=""):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}" if message else f"line {line_no}")


class MissingCalibKey(FormatError):
    """A KITTI calibration file lacks a required matrix."""

    def __init__(self, key):
        self.key = key
        super().__init__(key)


class BadMagic(FormatError):
    """Database file does not start with the expected magic bytes."""


class UnsupportedVersion(FormatError):
    """Database file version is not readable by this build."""


class TruncatedSection(FormatError):
    """Database file ends in the middle of a length-prefixed section."""


class EmptyDatabase(DrcpoError):
    """No labeled objects of any class were found in the input frames."""


class NonCanonicalBox(DrcpoError):
    """Box similarity requested on a box that is not centered/axis-aligned."""


class PointAtViewpoint(DrcpoError):
    """Spherical flip is undefined for a point coincident with the viewpoint."""


class PointBeyondRadius(DrcpoError):
    """Spherical flip requires every point inside the flip sphere."""


class TooManyPoints(DrcpoError):
    """Guard on brute-force oracles to prevent accidental O(n^4) blowups."""
