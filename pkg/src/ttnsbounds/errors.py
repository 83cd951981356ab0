"""Exception types raised across the package."""


class TtnsError(ValueError):
    """Base class for all domain errors."""


# tree graphs
class CycleDetected(TtnsError):
    pass


class Disconnected(TtnsError):
    pass


class DuplicateEdge(TtnsError):
    pass


class EdgeOutOfRange(TtnsError):
    pass


# dense states
class DimMismatch(TtnsError):
    pass


class EmptyPart(TtnsError):
    pass


class FullPart(TtnsError):
    pass


class NotNormalized(TtnsError):
    pass


class StateFormatError(TtnsError):
    """Malformed state or container file; ``offset`` is the byte position."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


# TTNS
class ShapeInconsistent(TtnsError):
    pass


class SpectraUnavailable(TtnsError):
    pass


# truncation
class PlanShapeMismatch(TtnsError):
    pass


class NotLinearTree(TtnsError):
    pass


# entropy bounds
class BadDistribution(TtnsError):
    pass


class NonpositiveAlpha(TtnsError):
    pass


class BadRange(TtnsError):
    pass


class AlphaOutOfRange(TtnsError):
    pass


class BadEps(TtnsError):
    pass


class Infeasible(TtnsError):
    pass


class NoValidAlpha(TtnsError):
    pass


# target states
class BadDims(TtnsError):
    pass


class TooLarge(TtnsError):
    pass


class DegenerateGroundSpace(UserWarning):
    """Emitted (not raised) when the ground-state gap is below resolution."""
