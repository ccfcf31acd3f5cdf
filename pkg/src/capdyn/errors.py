"""Exception types shared across the package."""


class CapdynError(Exception):
    """Base class for all package errors."""


class MarkingNotCentered(CapdynError, ValueError):
    pass


class UnknownFamily(CapdynError, KeyError):
    pass


class OrbitOverflow(CapdynError, ArithmeticError):
    """Raised when an iterate leaves the representable range.

    The orbit computed up to (and including) the offending iterate is kept on
    ``self.orbit``.
    """

    def __init__(self, message, orbit):
        super().__init__(message)
        self.orbit = orbit


class NewtonFailed(CapdynError, RuntimeError):
    pass


class NoConvergence(CapdynError, RuntimeError):
    pass


class NotSuperattracting(CapdynError, ValueError):
    def __init__(self, message, point, multiplier):
        super().__init__(message)
        self.point = point
        self.multiplier = multiplier


class NotInBasin(CapdynError, ValueError):
    pass


class ContinuityViolation(CapdynError, RuntimeError):
    def __init__(self, message, depth):
        super().__init__(message)
        self.depth = depth


class RootSelectionAmbiguous(CapdynError, RuntimeError):
    def __init__(self, message, depth):
        super().__init__(message)
        self.depth = depth


class PathEntersFilledSet(CapdynError, ValueError):
    pass


class ArgumentJump(CapdynError, ValueError):
    pass


class Unresolved(CapdynError, RuntimeError):
    pass


class IndexOutOfScheme(CapdynError, KeyError):
    pass


class InvalidScheme(CapdynError, ValueError):
    pass


class BisectionRangeExhausted(CapdynError, RuntimeError):
    pass


class StepTooLarge(CapdynError, RuntimeError):
    pass


class DerivativeUnderflow(CapdynError, ArithmeticError):
    pass


class BracketFailure(CapdynError, RuntimeError):
    pass


class ScaleRangeTooNarrow(CapdynError, ValueError):
    pass


class DegenerateChord(CapdynError, ValueError):
    pass


class DepthInsufficient(CapdynError, ValueError):
    pass


class RayNeverExits(CapdynError, RuntimeError):
    pass


class ResolutionExceeded(CapdynError, ValueError):
    pass
