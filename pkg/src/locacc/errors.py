"""Exception hierarchy.

``InputError`` subclasses map to CLI exit code 2, ``NumericalError``
subclasses to 3 and ``BudgetExhausted`` to 4.
"""


class LocaccError(Exception):
    """Base class for every error raised by this package."""

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self)}


class InputError(LocaccError):
    pass


class NumericalError(LocaccError):
    pass


# densmat
class ValidationError(InputError):
    pass


class NonHermitian(ValidationError):
    pass


class TraceDeviation(ValidationError):
    pass


class NegativeEigenvalue(ValidationError):
    pass


class DimensionMismatch(InputError):
    pass


class BadPartyIndex(InputError):
    pass


class NoConvergence(NumericalError):
    pass


# entropy
class NegativeProbability(InputError):
    pass


class IncompleteBasis(InputError):
    pass


class NonOrthonormal(InputError):
    pass


# ensembles
class SchemaError(InputError):
    pass


class DegenerateParameters(InputError):
    pass


class SizeCap(InputError):
    pass


class NonIsometric(InputError):
    pass


# bounds
class NegativeEoutTerm(InputError):
    pass


class QuadratureUnsupported(InputError):
    pass


class SampleBudgetTooSmall(InputError):
    pass


class AverageNotProduct(InputError):
    pass


class NotBellDiagonal(InputError):
    pass


class ConsistencyFailure(NumericalError):
    pass


# scrooge
class SupportMismatch(InputError):
    pass


# oracle
class BudgetExhausted(LocaccError):
    pass
