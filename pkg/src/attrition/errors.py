"""Exception hierarchy shared by every stage of the toolkit."""


class AttritionError(Exception):
    """Base class; ``stage`` is filled in by the experiment runner."""

    stage = None

    def __str__(self):
        msg = super().__str__()
        return f"[{self.stage}] {msg}" if self.stage else msg


# tabular
class EmptyFile(AttritionError):
    pass


class DuplicateColumn(AttritionError):
    pass


class MissingValue(AttritionError):
    def __init__(self, row, col):
        super().__init__(f"missing or unparseable value at row {row}, column {col!r}")
        self.row = row
        self.col = col


class UnknownColumn(AttritionError, KeyError):
    def __str__(self):
        return AttritionError.__str__(self)


class NonNumericColumn(AttritionError, TypeError):
    pass


# preprocess
class DegenerateColumn(AttritionError, ValueError):
    pass


class NegativeValue(AttritionError, ValueError):
    def __init__(self, col, row):
        super().__init__(f"log1p domain error: column {col!r} row {row} is negative")
        self.col = col
        self.row = row


class UnseenCategory(AttritionError, KeyError):
    def __init__(self, col, value):
        super().__init__(f"value {value!r} in column {col!r} is not in the fitted encoder map")
        self.col = col
        self.value = value

    def __str__(self):
        return AttritionError.__str__(self)


class ClassTooSmall(AttritionError, ValueError):
    pass


class ZeroVariance(AttritionError, ValueError):
    pass


# resample
class TooFewMinoritySamples(AttritionError, ValueError):
    pass


class SingleClass(AttritionError, ValueError):
    pass


# learners
class SingleClassTraining(AttritionError, ValueError):
    pass


class DimensionMismatch(AttritionError, ValueError):
    pass


class NoValidSplit(AttritionError):
    pass


class KTooLarge(AttritionError, ValueError):
    pass


class VersionMismatch(AttritionError, ValueError):
    pass


class CorruptPayload(AttritionError, ValueError):
    pass


# metrics
class LengthMismatch(AttritionError, ValueError):
    pass


class NonBinaryLabel(AttritionError, ValueError):
    pass


class EmptyReport(AttritionError, ValueError):
    pass


# llm client / mock service
class AuthError(AttritionError):
    pass


class ServiceError(AttritionError):
    def __init__(self, status, body):
        super().__init__(f"service returned HTTP {status}: {body}")
        self.status = status
        self.body = body


class RateLimited(ServiceError):
    pass


class Timeout(AttritionError):
    pass


class PortInUse(AttritionError, OSError):
    pass


# config
class ConfigError(AttritionError, ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, line, msg):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class UnknownKey(ConfigError):
    pass


class MissingRequired(ConfigError):
    pass


class StageError(AttritionError):
    """Wraps an unexpected exception raised inside a named pipeline stage."""
