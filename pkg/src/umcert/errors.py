"""Exception hierarchy shared by all umcert modules."""


class UmcertError(Exception):
    """Base class for every error raised by this package."""


class MalformedDescriptor(UmcertError):
    """Ring descriptor text does not match the grammar."""


class NonPrimeCharacteristic(UmcertError):
    """GF(q) requested with q not prime."""


class ModulusTooSmall(UmcertError):
    """Residue ring modulus below 2."""


class NotFinite(UmcertError):
    """Operation requires a finite ring."""


class UnsupportedRing(UmcertError):
    """Operation not defined for this ring kind."""


class NotUnimodular(UmcertError):
    """Row entries do not generate the unit ideal."""


class NotRightInvertible(UmcertError):
    """Matrix admits no exact right inverse."""


class PreconditionViolated(UmcertError):
    """Documented precondition of an oracle does not hold."""


class DimensionMismatch(UmcertError):
    """Vector or matrix dimensions are inconsistent."""


class IndexOutOfBounds(UmcertError):
    """Elementary operation index outside the acted dimension."""


class LeftOpOnRow(UmcertError):
    """Row operations are meaningless on a single row."""


class RangeConditionViolated(UmcertError):
    """Stable-dimension hypothesis of a normalization is not satisfied."""


class OracleFailure(UmcertError):
    """An internal oracle failed on input it was expected to handle."""


class SubsetUnimodularizationExhausted(UmcertError):
    """Every strategy rung failed to unimodularize the target entries."""


class HypothesisViolated(UmcertError):
    """Congruence-chain parameters do not satisfy the required hypothesis."""


class CapExceeded(UmcertError):
    """Enumeration size exceeds the configured cap."""
