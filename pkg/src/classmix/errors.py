"""Exception types shared across the package, each with a stable process exit code."""

from __future__ import annotations


class ClassmixError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class SpecSyntax(ClassmixError):
    """A group spec, coupling, or input file failed to parse."""

    exit_code = 2


class UnsupportedParameters(ClassmixError):
    """Parameters parse but fall outside the supported ranges."""

    exit_code = 3


class NonPrimeCharacteristic(UnsupportedParameters):
    """Field characteristic is not prime."""

    exit_code = 3


class NoIrreducibleFound(ClassmixError):
    """Defensive: exhausted the monic polynomial search without an irreducible."""

    exit_code = 3


class CapExceeded(ClassmixError):
    """Group enumeration would exceed the configured maximum order."""

    exit_code = 4


class LoopBudgetExceeded(ClassmixError):
    """An exact enumeration would exceed the configured loop budget."""

    exit_code = 5


class NoSuitablePrime(ClassmixError):
    """No prime P = 1 (mod exponent) with P > 2*sqrt(|G|) below the search bound."""

    exit_code = 6


class GoldenMismatch(ClassmixError):
    """A golden-mode comparison found drift beyond tolerance."""

    exit_code = 7


class UncoveredProbe(ClassmixError):
    """A sampled (a, b) pair fell in no protocol rectangle."""

    exit_code = 8


class EigensplitFailure(ClassmixError):
    """Simultaneous eigenspace splitting stalled or produced inconsistent data."""

    exit_code = 9


class MixedGroups(ClassmixError):
    """Elements from different group tables were combined."""

    exit_code = 10


class ArityMismatch(ClassmixError):
    """Tuples of different arity were combined."""

    exit_code = 11


class OverlappingRectangles(ClassmixError):
    """A probed pair was covered by more than one protocol rectangle."""

    exit_code = 12


class InvariantViolation(ClassmixError):
    """A hard mathematical invariant failed; the computed tables are suspect."""

    exit_code = 13
