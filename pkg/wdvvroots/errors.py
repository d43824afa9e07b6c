"""Error types raised by the wdvvroots package."""

from __future__ import annotations


class WdvvError(ValueError):
    """Base class for all input and verification errors."""


# ---- root systems ----
class UnknownFamily(WdvvError):
    pass


class InadmissibleRank(WdvvError):
    pass


class ZeroRoot(WdvvError):
    pass


class NonCrystallographic(WdvvError):
    pass


class NoConvergence(WdvvError):
    pass


class NotABase(WdvvError):
    pass


# ---- exact forms ----
class MultiplicityOrbitMismatch(WdvvError):
    pass


class DegenerateRank(WdvvError):
    pass


# ---- prepotential ----
class DomainError(WdvvError):
    pass


class NearSingular(WdvvError):
    pass


class ChamberViolation(WdvvError):
    pass


class StepTooLarge(WdvvError):
    pass


class SamplingExhausted(WdvvError):
    pass


# ---- wdvv ----
class NonPositiveC(WdvvError):
    pass


class SingularPivot(WdvvError):
    pass
