"""Exception hierarchy shared by all engines."""


class GeometryError(Exception):
    """Base class for every error raised by geodistort."""


class DomainError(GeometryError):
    """A chart point lies outside the metric's domain (or too close to its edge)."""


class SingularMetricError(GeometryError):
    """The metric matrix is not invertible at the requested point."""


class DomainEscapeError(GeometryError):
    """A geodesic left the chart before reaching the requested length.

    ``last_t`` is the largest arc length that was integrated safely.
    """

    def __init__(self, message, last_t):
        super().__init__(message)
        self.last_t = float(last_t)


class StepError(GeometryError):
    """Invalid step count for a fixed-step integration."""


class ConvergenceError(GeometryError):
    pass


class SingularityError(GeometryError):
    """A radial solve hit a blow-up of the metric or the cut radius.

    ``boundary`` is the radius at which integration stopped.
    """

    def __init__(self, message, boundary):
        super().__init__(message)
        self.boundary = float(boundary)


class RangeError(GeometryError):
    """A radius outside the tabulated range of a radial profile."""


class SupportEscapeError(GeometryError):
    """A mollifier support does not fit inside the chart."""


class SpecError(GeometryError):
    """Malformed manifold spec file."""
