"""Exception hierarchy.

Input problems derive from :class:`KnotValidationError`, numerical and
combinatorial failures from :class:`GeometryError`.  The CLI maps the two
families to different exit codes.
"""


class PLWritheError(Exception):
    """Base class for every error raised by the package."""


class KnotValidationError(PLWritheError, ValueError):
    pass


class GeometryError(PLWritheError, ArithmeticError):
    pass


# sphere primitives
class ZeroVector(GeometryError):
    pass


class DegenerateCircle(GeometryError):
    pass


class OpenCycle(GeometryError):
    pass


# knot construction
class NotClosedDegenerate(KnotValidationError):
    pass


class SelfIntersecting(KnotValidationError):
    pass


class Backtracking(KnotValidationError):
    pass


class ZeroEdge(KnotValidationError):
    pass


class BadCharacter(KnotValidationError):
    pass


class NotClosed(KnotValidationError):
    pass


# projections
class ParallelStrands(GeometryError):
    pass


class NotGeneric(GeometryError):
    pass


class OnIndicatrix(GeometryError):
    pass


# arrangement
class OnBoundary(GeometryError):
    pass


class DegenerateArrangement(GeometryError):
    pass


class InconsistentOffsets(GeometryError):
    pass
