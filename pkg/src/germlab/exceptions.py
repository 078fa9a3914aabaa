"""Exception hierarchy.

Every error raised by the package derives from :class:`GermlabError`; the
CLI maps the three broad families below onto its exit codes.
"""


class GermlabError(Exception):
    """Base class for all package errors."""


class UsageError(GermlabError, ValueError):
    """Malformed input: bad expression, bad document, bad flag."""


class GenericityError(GermlabError, ValueError):
    """The input is not generic, or violates a normal-form constraint."""


class NumericError(GermlabError, ArithmeticError):
    """A numerical procedure failed (divergence, empty region, ...)."""


# jets
class NonUnitDivisor(GermlabError, ZeroDivisionError):
    pass


class NonPositiveConstantTerm(GermlabError, ValueError):
    pass


class InexactRootError(GermlabError, ValueError):
    """A root of a rational constant is irrational, so exact mode cannot hold it."""


class InnerNotBased(GermlabError, ValueError):
    pass


class NotInvertible(GermlabError, ValueError):
    pass


class SingularAtOrigin(NotInvertible):
    pass


class NotXRegularOrder2(GermlabError, ValueError):
    pass


class ImplicitDegenerate(GermlabError, ValueError):
    pass


# expr
class ParseError(UsageError):
    def __init__(self, position, message):
        self.position = position
        self.message = message
        super().__init__(f"{message} (at offset {position})")


class DomainError(GermlabError, ValueError):
    pass


class NotExpandableAtOrigin(GermlabError, ValueError):
    pass


# germs
class NoDoublePoints(GenericityError):
    pass


class DegenerateBranch(GenericityError):
    pass


class ContactExceedsDegree(GenericityError):
    pass


class NoCriticalPoint(GenericityError):
    pass


class DegenerateCritical(GenericityError):
    pass


class ZeroCurve(GenericityError):
    pass


class UnsupportedCombination(GenericityError):
    pass


# normal_forms
class ModuliConstraintViolated(GenericityError):
    pass


class NotFold(GenericityError):
    pass


class DiscriminantsTangent(GenericityError):
    pass


class WrongType(GenericityError):
    pass


class NonUnit(GenericityError):
    pass


class BoundaryDegenerate(GenericityError):
    pass


class NotASolution(GenericityError):
    pass


# moduli
class NotMonotone(NumericError):
    pass


class NewtonDiverged(NumericError):
    pass


class DomainExceeded(NumericError):
    pass


# webs
class BadModulus(GenericityError):
    pass


class EmptySampleRegion(NumericError):
    pass


class NoWeb(GenericityError):
    pass


# render
class EmptyLevelSet(NumericError):
    pass
