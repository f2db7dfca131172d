"""Exception hierarchy.

Every error raised by the library derives from :class:`MVError`, so callers
(and the CLI) can catch one base class and still report the concrete name.
"""


class MVError(Exception):
    """Base class for all domain errors."""


# lattice construction and element access

class LatticeError(MVError):
    pass


class NotALattice(LatticeError):
    pass


class CycleInOrder(LatticeError):
    pass


class DuplicateLabel(LatticeError):
    pass


class BadLabel(LatticeError):
    pass


class BadMonoid(LatticeError):
    pass


class ForeignElement(LatticeError):
    pass


class NotBrouwer(LatticeError):
    pass


class NotResiduated(LatticeError):
    pass


class NotAtomRepresentable(LatticeError):
    pass


class SumNotInLattice(LatticeError):
    pass


class LatticeTooLarge(LatticeError):
    pass


# terms and multi-valued sets

class TermError(MVError):
    pass


class UninterpretableTerm(TermError):
    pass


class UnknownConstant(TermError):
    pass


class MissingVariable(TermError):
    pass


class ArityMismatch(TermError):
    pass


class MismatchedScales(MVError):
    pass


# aggregation

class MismatchedCarriers(MVError):
    pass


class FewerThanTwoSets(MVError):
    pass


class EmptyAssessmentSet(MVError):
    pass


# cognitive maps

class MapSpecError(MVError):
    pass


class NotConverged(MVError):
    pass


# text input

class DSLSyntaxError(MVError):
    def __init__(self, line, col, expected, found=None):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        msg = f"line {line}, col {col}: expected {expected}"
        if found is not None:
            msg += f", found {found!r}"
        super().__init__(msg)


class UnresolvedReference(MVError):
    pass


class DuplicateName(MVError):
    pass


class UnknownFixture(MVError):
    pass
