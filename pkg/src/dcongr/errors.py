"""Error taxonomy shared by all modules.

CLI exit codes: 2 parse errors, 3 precondition violations, 4 precision
failures, 5 horizon failures.
"""


class DcongrError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class ParseError(DcongrError):
    """Malformed expression text. Carries a byte offset."""

    exit_code = 2

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


# -- precondition violations (exit 3) --------------------------------------

class DivisionByZero(DcongrError):
    pass


class ZeroInput(DcongrError):
    pass


class ZeroOperator(DcongrError):
    pass


class NotAUnit(DcongrError):
    pass


class NotInvertible(DcongrError):
    pass


class LevelMismatch(DcongrError):
    pass


class ZeroDivisor(DcongrError):
    pass


class NonNormalizedLead(DcongrError):
    pass


class CapExceeded(DcongrError):
    pass


class BoxTooSmall(DcongrError):
    pass


class BasisUnavailable(DcongrError):
    pass


class RangeError(DcongrError):
    pass


# -- precision failures (exit 4) --------------------------------------------

class PrecisionExhausted(DcongrError):
    exit_code = 4


class NormOverflow(DcongrError):
    exit_code = 4


class TruncationInsufficient(DcongrError):
    exit_code = 4


# -- horizon failures (exit 5) -----------------------------------------------

class HorizonInconclusive(DcongrError):
    exit_code = 5
