"""Exception types shared across the toolkit."""


class FppError(Exception):
    """Base class for all toolkit errors."""


# arithmetic
class NotAResidue(FppError, ArithmeticError):
    pass


class Ramified(FppError, ArithmeticError):
    pass


class BadPrime(FppError, ArithmeticError):
    pass


class NoSeventhRoot(FppError, ArithmeticError):
    pass


# equations
class ParseError(FppError, ValueError):
    def __init__(self, msg, line=None, col=None):
        self.line, self.col = line, col
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + msg)


class DegreeMismatch(ParseError):
    pass


# schemes
class BudgetExceeded(FppError):
    pass


class NotOnScheme(FppError, ValueError):
    pass


class EmptySample(FppError, ValueError):
    pass


class SingularPoint(FppError):
    pass


class InconsistentLift(FppError):
    pass


# lifting
class SingularSeed(FppError):
    pass


class Inconsistent(FppError):
    pass


class CountTooLarge(FppError, ValueError):
    pass


class CutNotRigid(FppError):
    pass


# linear algebra / reconstruction
class PrecisionExhausted(FppError):
    pass


class DependentBasis(FppError, ValueError):
    pass


class RecognitionFailed(FppError):
    """No small integer relation was found (the 'Fail' outcome)."""


class NoUnitEntry(FppError, ValueError):
    pass


# pipelines
class SeedShortage(FppError):
    pass


class FixtureMismatch(FppError):
    pass


class DatasetMissing(FppError, FileNotFoundError):
    pass
