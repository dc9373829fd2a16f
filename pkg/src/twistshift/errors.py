"""Exception types raised by the library.

The CLI maps these onto exit codes, so each class carries the code it
should produce when it escapes an experiment.
"""

from __future__ import annotations


class TwistShiftError(Exception):
    exit_code = 1


class ConfigError(TwistShiftError):
    exit_code = 2


class Inconclusive(TwistShiftError):
    """A numerical procedure neither converged nor certified divergence."""

    exit_code = 3


class NoConvergence(Inconclusive):
    def __init__(self, message: str, best_estimate: float | None = None):
        super().__init__(message)
        self.best_estimate = best_estimate


class PrecisionExhausted(Inconclusive):
    pass


class DegreeOverflow(TwistShiftError):
    exit_code = 3


class ZeroOnGrid(TwistShiftError):
    exit_code = 3


class ZeroEigenvalue(TwistShiftError):
    exit_code = 3


class RefusedDecision(TwistShiftError):
    """Base for decisions the library declines to make on the given input."""

    exit_code = 4


class InexactZeroSet(RefusedDecision):
    pass


class EmptyZeroSet(RefusedDecision):
    pass


class HypothesisFailed(RefusedDecision):
    pass
