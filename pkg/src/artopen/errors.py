"""Error taxonomy shared by every module.

Each class maps to one failure mode of one operation so callers can
branch on type rather than parse messages.  The CLI maps these to exit
code 2 (bad input / unmet precondition); plain I/O problems stay
OSError / ValueError and map to exit code 1.
"""


class ArtopenError(Exception):
    """Base class for all library-defined failures."""


class InvalidDepth(ArtopenError):
    """Depth sample is zero/negative where a positive range is required."""


class OutOfBounds(ArtopenError):
    """Pixel coordinate outside the image raster."""


class DegenerateInput(ArtopenError):
    """Geometric input without a well-defined answer (collinear points,
    triangle where a quad is required, ...)."""


class DegeneratePlane(ArtopenError):
    """Plane fit impossible: points span less than two dimensions."""


class DegenerateQuad(ArtopenError):
    """Lifted quad corners too close together to define a hinge axis."""


class InsufficientPoints(ArtopenError):
    """Fewer samples than the operation's stated minimum."""


class InsufficientDepth(ArtopenError):
    """Not enough mask pixels carry valid depth."""


class MissingAxis(ArtopenError):
    """Hinged articulation parameters lack a hinge axis."""


class BadCount(ArtopenError):
    """Requested waypoint count below the minimum of 2."""


class LimitViolation(ArtopenError):
    """Joint value outside its limits where an in-range value is required."""


class EmptyPlan(ArtopenError):
    """Motion plan with zero accepted waypoints where one is required."""


class NoContact(ArtopenError):
    """Contact search exhausted its step budget without touching."""


class EmptyHeatmap(ArtopenError):
    """Placement grid contains no cells."""
