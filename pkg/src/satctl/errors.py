"""Exception types raised across the package."""


class SatCtlError(Exception):
    """Base class for all package errors."""


class ParameterError(SatCtlError, ValueError):
    """A parameter violates its declared constraint."""


class InputError(SatCtlError, ValueError):
    """An input value (state, sample point, region) is not admissible."""


class SingularityError(SatCtlError, ArithmeticError):
    """An evaluator hit a denominator that should be analytically nonzero."""


class NotApplicableError(SatCtlError):
    """The requested check does not apply to the given controller option."""


class ReportError(SatCtlError):
    """A report is structurally incomplete."""
