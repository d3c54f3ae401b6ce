"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class BehmmError(Exception):
    exit_code = 6


class ParseError(BehmmError):
    exit_code = 2


class ValidationError(BehmmError, ValueError):
    exit_code = 3


class DimensionMismatch(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class NotHermitian(ValidationError):
    pass


class NotProjection(ValidationError):
    pass


class NotStochastic(ValidationError):
    pass


class NotDensity(ValidationError):
    pass


class NotUnital(ValidationError):
    pass


class NotCP(ValidationError):
    pass


class EmptyWord(ValidationError):
    pass


class BudgetExceeded(BehmmError):
    exit_code = 4


class DegenerateTrace(BehmmError):
    exit_code = 5


class UndefinedRecurrence(BehmmError):
    exit_code = 5
