"""Exception hierarchy shared by all modules."""


class SclError(Exception):
    """Base class for every error raised by this package."""

    #: process exit code used by the command line front end
    exit_code = 2


class NonUnit(SclError, ValueError):
    pass


class NotARotation(SclError, ValueError):
    pass


class OutOfDomain(SclError, ValueError):
    pass


class JunctionMismatch(SclError, ValueError):
    pass


class NotImmersed(SclError, ValueError):
    pass


class RefinementExceeded(SclError, RuntimeError):
    exit_code = 3


class Degenerate(SclError, ValueError):
    """Curve is a multiply traversed circle; its self-intersection set is a continuum."""


class NonConvergence(SclError, RuntimeError):
    exit_code = 3


class NotLocallyConvex(SclError, ValueError):
    pass


class NotGeneric(SclError, ValueError):
    pass


class EndpointMismatch(SclError, ValueError):
    pass


class NotInX1(SclError, ValueError):
    pass


class NotInA(SclError, ValueError):
    pass


class ConvexityFailed(SclError, RuntimeError):
    pass


class ValidityFailed(SclError, RuntimeError):
    def __init__(self, msg, s=None, t=None):
        super().__init__(msg)
        self.s = s
        self.t = t


class MissingPetalFamily(SclError, KeyError):
    pass


class NonRegular(SclError, RuntimeError):
    exit_code = 3


class ResidualTooLarge(SclError, RuntimeError):
    exit_code = 3


class SchemaError(SclError, ValueError):
    pass


class ParseError(SclError, ValueError):
    pass


class InvariantViolation(SclError, ValueError):
    pass
