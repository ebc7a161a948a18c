"""Exception hierarchy.

Every failure mode the library can signal maps onto one subclass of
:class:`HausdorffError`; ``code`` carries the stable upper-case tag used in
reports and CLI diagnostics.
"""


class HausdorffError(Exception):
    code = "ERROR"


class ToleranceNotMet(HausdorffError):
    """Quadrature error estimate exceeds the requested relative tolerance.

    The best value and its estimate are kept so callers can decide whether
    to rerun with a larger budget or accept the result.
    """

    code = "TOLERANCE_NOT_MET"

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class NonFiniteSample(HausdorffError):
    code = "NON_FINITE_SAMPLE"


class OutOfCarrier(HausdorffError):
    code = "OUT_OF_CARRIER"


class PreimageUnavailable(HausdorffError):
    code = "PREIMAGE_UNAVAILABLE"


class Divergent(HausdorffError):
    code = "DIVERGENT"

    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values


class NotFiniteDiscrete(HausdorffError):
    code = "NOT_FINITE_DISCRETE"


class SingularMatrix(HausdorffError):
    code = "SINGULAR_MATRIX"


class HypothesesViolated(HausdorffError):
    code = "HYPOTHESES_VIOLATED"


class NoConvergence(HausdorffError):
    code = "NO_CONVERGENCE"


class EmptyFamily(HausdorffError):
    code = "EMPTY_FAMILY"


class InadmissibleExponents(HausdorffError, ValueError):
    code = "INADMISSIBLE_EXPONENTS"


class ConfigInvalid(HausdorffError):
    code = "CONFIG_INVALID"

    def __init__(self, message, section=None, key=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if section is not None:
            where.append(f"[{section}]" + (f" {key}" if key else ""))
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.section = section
        self.key = key
        self.line = line
