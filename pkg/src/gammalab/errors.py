class GammaLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInstance(GammaLabError, ValueError):
    pass


class InvalidIndex(GammaLabError, ValueError):
    pass


class InvalidAppend(InvalidIndex):
    """Appending pairs to an index broke one of the index invariants."""


class DimensionMismatch(GammaLabError, ValueError):
    pass


class ParseError(GammaLabError, ValueError):
    pass


class PreconditionError(GammaLabError, ValueError):
    pass


class RuleError(GammaLabError, RuntimeError):
    """A product rule emitted a symbol violating the admissibility condition.

    This is never expected; an occurrence is a finding against the rule.
    """


class CertificateFailure(GammaLabError, RuntimeError):
    """A certificate that should hold did not verify."""


class CapExceeded(GammaLabError, ValueError):
    pass


class InternalError(GammaLabError, RuntimeError):
    pass
