# services/errors.py
from fractions import Fraction
from typing import Optional


class BerkDynError(ValueError):
    """Base class for every arithmetic, geometric or document error raised by the services."""


class DivisionByZero(BerkDynError):
    pass


class NotAUnit(BerkDynError):
    pass


class ZeroPolynomial(BerkDynError):
    pass


class NotCoprime(BerkDynError):
    pass


class TypeIPoint(BerkDynError):
    pass


class CutOffPath(BerkDynError):
    pass


class RamificationNeeded(BerkDynError):
    """A radius or center outside the value group of K_e was required.

    `e_needed` is the ramification index the caller should re-run with
    (the field is then refined to K_lcm(e, e_needed)).
    """

    def __init__(self, e_needed: int, value: Optional[Fraction] = None):
        self.e_needed = e_needed
        self.value = value
        super().__init__(f"ramification index {e_needed} needed to represent {value}")


class CenterNotRepresentable(BerkDynError):
    pass


class InseparableMap(BerkDynError):
    pass


class NotPeriodic(BerkDynError):
    pass


class TemplateViolation(BerkDynError):
    def __init__(self, assumption: str):
        self.assumption = assumption
        super().__init__(f"template assumption violated: {assumption}")


class MalformedCertificate(BerkDynError):
    pass


class SingularSystem(BerkDynError):
    pass


class NegativeMass(BerkDynError):
    pass


class NotStronglyConnected(BerkDynError):
    pass


class CountableState(BerkDynError):
    pass


class NoRootInDisk(BerkDynError):
    pass


class DegenerateMap(BerkDynError):
    """The map collapses a disk or segment where a nonconstant action was needed."""


class NotIrreducible(BerkDynError):
    pass
