"""Rotation numbers and their continued-fraction convergents.

Quadratic surds are expanded with the exact integer recurrence for
``(P + sqrt(D)) / Q``, so every partial quotient is certified without any
floating point.  Decimal inputs carry a stated precision and a convergent is
only released when the whole uncertainty interval shares its partial
quotients, or when Legendre's criterion ``|x - p/q| < 1/(2 q^2)`` holds for
every ``x`` in the interval.  Either way ``p/q`` is a genuine convergent of
the unknown true value; the first uncertified step raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from functools import cached_property
from typing import Iterator

import mpmath
import numpy as np

from .circlefn import Angle, RationalTurns, RealTurns, ShiftedRational, shifted
from .errors import PrecisionExhausted

_DPS = 60


@dataclass(frozen=True)
class RotationAngle:
    """An irrational rotation number in (0, 1).

    ``kind`` is one of ``"golden"``, ``"silver"``, ``"surd"`` or ``"decimal"``.
    Use the classmethod constructors rather than building one by hand.
    """

    kind: str
    surd: tuple[int, int, int, int] | None = None  # (a, b, c, d): (a + b sqrt c) / d
    decimal: str | None = None
    precision_digits: int | None = None

    def __post_init__(self):
        if self.kind in ("golden", "silver", "surd"):
            a, b, c, d = self.surd_parts
            if c <= 0 or math.isqrt(c) ** 2 == c:
                raise ValueError("surd radicand must be a positive non-square")
            if b == 0 or d == 0:
                raise ValueError("surd needs b != 0 and d != 0")
        elif self.kind == "decimal":
            if self.decimal is None or self.precision_digits is None:
                raise ValueError("decimal rotation needs a value and a precision")
        else:
            raise ValueError(f"unknown rotation kind {self.kind!r}")
        if not 0.0 < self.value < 1.0:
            raise ValueError("rotation number must lie in (0, 1)")

    @classmethod
    def golden(cls) -> "RotationAngle":
        return cls("golden")

    @classmethod
    def silver(cls) -> "RotationAngle":
        return cls("silver")

    @classmethod
    def from_surd(cls, a: int, b: int, c: int, d: int) -> "RotationAngle":
        return cls("surd", surd=(a, b, c, d))

    @classmethod
    def from_decimal(cls, value: str, precision_digits: int | None = None) -> "RotationAngle":
        value = str(value).strip()
        if precision_digits is None:
            precision_digits = len(value.split(".")[1]) if "." in value else 0
        return cls("decimal", decimal=value, precision_digits=int(precision_digits))

    @property
    def surd_parts(self) -> tuple[int, int, int, int]:
        if self.kind == "golden":
            return (-1, 1, 5, 2)
        if self.kind == "silver":
            return (-1, 1, 2, 1)
        if self.kind == "surd":
            return self.surd
        raise AttributeError("decimal rotations have no surd form")

    @cached_property
    def mp_value(self) -> mpmath.mpf:
        with mpmath.workdps(_DPS):
            if self.kind == "decimal":
                return mpmath.mpf(self.decimal)
            a, b, c, d = self.surd_parts
            return (a + b * mpmath.sqrt(c)) / d

    @property
    def value(self) -> float:
        return float(self.mp_value)

    @cached_property
    def fixed_point64(self) -> int:
        """``floor(theta * 2**64)``, used for exact orbit stepping mod 1."""
        with mpmath.workdps(_DPS):
            return int(mpmath.floor(self.mp_value * mpmath.mpf(2) ** 64))

    def shifted_turns(self, r: Fraction, m: int) -> float:
        """``(r + m*theta) mod 1`` as a float, computed at high precision."""
        with mpmath.workdps(_DPS):
            x = mpmath.mpf(r.numerator) / r.denominator + m * self.mp_value
            return float(x - mpmath.floor(x))

    def orbit_phases(self, n: int) -> np.ndarray:
        """``k*theta mod 1`` for ``k = 0..n-1``.

        Uses wrapping 64-bit fixed point: the only error is the truncation of
        theta itself, at most ``k * 2**-64``.
        """
        k = np.arange(n, dtype=np.uint64)
        with np.errstate(over="ignore"):
            fixed = k * np.uint64(self.fixed_point64)
        return (fixed.astype(np.float64) / 2.0**64) % 1.0

    def __str__(self):
        if self.kind == "decimal":
            return f"decimal:{self.decimal}"
        if self.kind == "surd":
            return "surd:" + ",".join(map(str, self.surd))
        return self.kind


@dataclass(frozen=True)
class Convergent:
    p: int
    q: int
    error_bound: float

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.p, self.q)


def _surd_quotients(a: int, b: int, c: int, d: int) -> Iterator[int]:
    # x = (P + sqrt(D)) / Q with Q | D - P^2
    s = 1 if b > 0 else -1
    P, D, Q = a * s, b * b * c, d * s
    if (D - P * P) % Q:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    root = math.isqrt(D)
    while True:
        A = P + root
        q = A // Q if Q > 0 else (A + 1) // Q
        yield q
        P = q * Q - P
        Q = (D - P * P) // Q


def _recurrence(quotients) -> Iterator[tuple[int, int]]:
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    for a in quotients:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        yield p, q


def _decimal_quotients(x: Fraction) -> Iterator[int]:
    while True:
        a = math.floor(x)
        yield a
        frac = x - a
        if frac == 0:
            return
        x = 1 / frac


def convergents(theta: RotationAngle, count: int) -> list[Convergent]:
    """The first ``count`` continued-fraction convergents of ``theta``.

    ``error_bound`` is ``1/(q_k q_{k+1})`` for exact surds and the
    interval-certified distance for decimal inputs.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if theta.kind != "decimal":
        pairs = _recurrence(_surd_quotients(*theta.surd_parts))
        seq = [next(pairs) for _ in range(count + 1)]
        return [
            Convergent(p, q, 1.0 / (q * seq[i + 1][1]))
            for i, (p, q) in enumerate(seq[:count])
        ]

    mid = Fraction(Decimal(theta.decimal))
    radius = Fraction(1, 2 * 10**theta.precision_digits)
    ends = [list(_take(_decimal_quotients(x), count + 1)) for x in (mid - radius, mid + radius)]
    out: list[Convergent] = []
    quotients: list[int] = []
    for a, (p, q) in zip(_decimal_quotients(mid), _recurrence(_decimal_quotients(mid))):
        quotients.append(a)
        k = len(quotients)
        dist = abs(mid - Fraction(p, q)) + radius
        # the whole interval shares the prefix, or Legendre's criterion holds
        shared = all(e[:k] == quotients and len(e) > k for e in ends)
        if not shared and dist >= Fraction(1, 2 * q * q):
            raise PrecisionExhausted(
                f"{theta.precision_digits} digits cannot certify the convergent after "
                + (f"{out[-1].p}/{out[-1].q}" if out else "the integer part")
            )
        out.append(Convergent(p, q, float(dist)))
        if len(out) == count:
            return out
    raise PrecisionExhausted(
        f"expansion of {theta.decimal} terminates after {out[-1].p}/{out[-1].q}; "
        "a rational input cannot certify further convergents"
    )


def _take(it, n):
    for _, x in zip(range(n), it):
        yield x


def orbit_angle(theta: RotationAngle, n: int, t: Angle) -> Angle:
    """``t + n*theta (mod 1)``, staying exact on exact inputs."""
    if isinstance(t, RealTurns):
        return RealTurns(theta.shifted_turns(Fraction(0), n) + t.t)
    if isinstance(t, RationalTurns):
        return shifted(t.fraction, n, theta)
    if isinstance(t, ShiftedRational):
        if t.theta != theta:
            raise ValueError("angle is shifted by a different rotation number")
        return shifted(t.r, t.m + n, theta)
    raise TypeError(f"not an angle: {t!r}")
