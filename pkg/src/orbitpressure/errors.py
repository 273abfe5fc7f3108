"""Exception hierarchy.

Every error carries a stable ``code`` string so that CLI result rows can record
failures (``status=error:<CODE>``) without fabricating values.
"""


class OrbitPressureError(Exception):
    code = "ERROR"


class KindMismatch(OrbitPressureError):
    code = "KIND_MISMATCH"


class HorizonExhausted(OrbitPressureError):
    code = "HORIZON_EXHAUSTED"


class LengthTooShort(OrbitPressureError):
    code = "LENGTH_TOO_SHORT"


class SpecMismatch(OrbitPressureError):
    code = "SPEC_MISMATCH"


class EmptyBall(OrbitPressureError):
    code = "EMPTY_BALL"


class Infeasible(OrbitPressureError):
    code = "INFEASIBLE"


class ExactTooLarge(OrbitPressureError):
    code = "EXACT_TOO_LARGE"


class GridTooCoarse(OrbitPressureError):
    code = "GRID_TOO_COARSE"


class ProblemTooLarge(OrbitPressureError):
    """Raised when an all-pairs ball matrix would not fit the memory budget."""

    code = "PROBLEM_TOO_LARGE"


class NotPrimitive(OrbitPressureError):
    code = "NOT_PRIMITIVE"


class ConfigError(OrbitPressureError):
    """Config parse error; ``line``/``column`` are 1-based when known."""

    code = "CONFIG_ERROR"

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)
