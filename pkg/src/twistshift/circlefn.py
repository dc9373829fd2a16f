"""Functions on the unit circle, exact angles, zero sets and Fourier data.

Angles are measured in turns: ``t`` stands for the point ``exp(2*pi*i*t)``.
Three angle kinds exist.  ``RationalTurns`` and ``ShiftedRational`` are exact
(the latter is ``r + m*theta`` for a rotation number ``theta``), ``RealTurns``
is a plain float and never takes part in exact orbit decisions.

Every circle function can be evaluated on float arrays of turns and can
return ``log|f|`` relative to an anchor angle.  The anchored form is what the
quadrature uses near zeros: offsets as small as 1e-20 survive because they
are never added to an O(1) angle before the singular factor is formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import DegreeOverflow

if TYPE_CHECKING:
    from .diophantine import RotationAngle

TAU_ZERO = 1e-10
TAU_CIRCLE = 1e-9
ESSENTIAL_UNDERFLOW = 1e-15
MAX_SHIFT = 2**31


# ---------------------------------------------------------------------------
# angles


@dataclass(frozen=True)
class RationalTurns:
    numerator: int
    denominator: int = 1

    def __post_init__(self):
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")
        fr = Fraction(self.numerator, self.denominator) % 1
        object.__setattr__(self, "numerator", fr.numerator)
        object.__setattr__(self, "denominator", fr.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def turns(self) -> float:
        return self.numerator / self.denominator

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"


@dataclass(frozen=True)
class ShiftedRational:
    """The angle ``r + m*theta (mod 1)``; only ``r`` is reduced."""

    r: Fraction
    m: int
    theta: "RotationAngle" = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "r", Fraction(self.r) % 1)
        if abs(self.m) > MAX_SHIFT:
            raise ValueError(f"shift multiple {self.m} exceeds 2**31")

    def turns(self) -> float:
        return self.theta.shifted_turns(self.r, self.m)

    def __str__(self):
        return f"{self.r}+{self.m}θ"


@dataclass(frozen=True)
class RealTurns:
    t: float

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t) % 1.0)

    def turns(self) -> float:
        return self.t

    def __str__(self):
        return repr(self.t)


Angle = Union[RationalTurns, ShiftedRational, RealTurns]


def shifted(r, m: int, theta: "RotationAngle") -> Angle:
    """Build ``r + m*theta``, collapsing to ``RationalTurns`` when ``m == 0``."""
    r = Fraction(r)
    if m == 0:
        return RationalTurns(r.numerator, r.denominator)
    return ShiftedRational(r, m, theta)


def is_exact(a: Angle) -> bool:
    return isinstance(a, (RationalTurns, ShiftedRational))


def exact_parts(a: Angle) -> tuple[Fraction, int, object]:
    """``(r, m, theta)`` for an exact angle; theta is None when m == 0."""
    if isinstance(a, RationalTurns):
        return a.fraction, 0, None
    if isinstance(a, ShiftedRational):
        return a.r, a.m, a.theta
    raise TypeError(f"{a!r} is not an exact angle")


def angle_add(a: Angle, b: Angle) -> Angle:
    if isinstance(a, RealTurns) or isinstance(b, RealTurns):
        return RealTurns(a.turns() + b.turns())
    ra, ma, ta = exact_parts(a)
    rb, mb, tb = exact_parts(b)
    if ta is not None and tb is not None and ta != tb:
        raise ValueError("cannot add angles shifted by different rotation numbers")
    return shifted(ra + rb, ma + mb, ta if ta is not None else tb)


def angle_neg(a: Angle) -> Angle:
    if isinstance(a, RealTurns):
        return RealTurns(-a.t)
    r, m, th = exact_parts(a)
    return shifted(-r, -m, th)


def angles_equal(a: Angle, b: Angle, atol: float = 1e-12) -> bool:
    if is_exact(a) and is_exact(b):
        ra, ma, _ = exact_parts(a)
        rb, mb, _ = exact_parts(b)
        return ra == rb and ma == mb
    d = (a.turns() - b.turns() + 0.5) % 1.0 - 0.5
    return abs(d) <= atol


def parse_angle(text) -> Angle:
    """Parse ``"p/q"`` or an integer as exact turns, anything else as a real."""
    if isinstance(text, (RationalTurns, ShiftedRational, RealTurns)):
        return text
    if isinstance(text, Fraction):
        return RationalTurns(text.numerator, text.denominator)
    if isinstance(text, int):
        return RationalTurns(text, 1)
    if isinstance(text, float):
        return RealTurns(text)
    s = str(text).strip()
    if "/" in s:
        num, den = s.split("/")
        return RationalTurns(int(num), int(den))
    try:
        return RationalTurns(int(s), 1)
    except ValueError:
        return RealTurns(float(s))


def _wrap(x):
    """Signed representative of ``x`` mod 1 in [-1/2, 1/2)."""
    return (np.asarray(x, dtype=float) + 0.5) % 1.0 - 0.5


# ---------------------------------------------------------------------------
# circle functions


class CircleFunction:
    """Base class.  Subclasses implement ``_values`` and usually ``_log_abs``."""

    def _values(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _log_abs(self, t: np.ndarray, anchor: float) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self._values(anchor + t)))

    def _exact_value(self, a: Angle) -> complex | None:
        return None

    def __call__(self, t):
        return evaluate(self, t)


@dataclass(frozen=True)
class LaurentPolynomial(CircleFunction):
    terms: tuple[tuple[int, complex], ...]

    def __post_init__(self):
        merged: dict[int, complex] = {}
        for k, c in self.terms:
            merged[int(k)] = merged.get(int(k), 0) + complex(c)
        cleaned = tuple(sorted((k, c) for k, c in merged.items() if c != 0))
        object.__setattr__(self, "terms", cleaned)

    @property
    def coefficients(self) -> dict[int, complex]:
        return dict(self.terms)

    def _values(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for k, c in self.terms:
            out += c * np.exp(2j * np.pi * ((k * t) % 1.0))
        return out

    def _exact_value(self, a):
        # exact only where e^{2 pi i t} is a power of i
        if isinstance(a, RationalTurns) and 4 % a.denominator == 0:
            step = a.numerator * (4 // a.denominator)
            units = (1, 1j, -1, -1j)
            return sum((c * units[(k * step) % 4] for k, c in self.terms), 0j)
        return None


RootSpec = Union[complex, Angle]


@dataclass(frozen=True)
class FactoredPolynomial(CircleFunction):
    """``scalar * prod (z - root)**mult``.

    On-circle roots must be given as angles; complex roots are asserted to be
    off the circle by more than ``TAU_CIRCLE``.
    """

    scalar: complex
    roots: tuple[tuple[RootSpec, int], ...] = ()

    def __post_init__(self):
        roots = []
        for root, mult in self.roots:
            if mult <= 0:
                raise ValueError("root multiplicity must be positive")
            if isinstance(root, (RationalTurns, ShiftedRational, RealTurns)):
                roots.append((root, int(mult)))
            else:
                root = complex(root)
                if abs(abs(root) - 1.0) < TAU_CIRCLE:
                    raise ValueError(
                        f"root {root} lies on the unit circle; pass it as an exact angle"
                    )
                roots.append((root, int(mult)))
        object.__setattr__(self, "scalar", complex(self.scalar))
        object.__setattr__(self, "roots", tuple(roots))

    def circle_roots(self):
        return [(a, m) for a, m in self.roots if not isinstance(a, complex)]

    def off_circle_roots(self):
        return [(r, m) for r, m in self.roots if isinstance(r, complex)]

    def _values(self, t):
        t = np.asarray(t, dtype=float)
        z = np.exp(2j * np.pi * (t % 1.0))
        out = np.full(t.shape, self.scalar, dtype=complex)
        for root, mult in self.roots:
            if isinstance(root, complex):
                out *= (z - root) ** mult
            else:
                a = root.turns()
                d = _wrap(t - a)
                # z - e^{2 pi i a} = 2i sin(pi d) e^{i pi (t + a)}
                out *= (2j * np.sin(np.pi * d) * np.exp(1j * np.pi * (a + (a + d)))) ** mult
        return out

    def _log_abs(self, t, anchor):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.full(t.shape, math.log(abs(self.scalar)) if self.scalar else -np.inf)
            z = None
            for root, mult in self.roots:
                if isinstance(root, complex):
                    if z is None:
                        z = np.exp(2j * np.pi * ((anchor + t) % 1.0))
                    out += mult * np.log(np.abs(z - root))
                else:
                    d = float(_wrap(anchor - root.turns())) + t
                    out += mult * np.log(np.abs(2.0 * np.sin(np.pi * d)))
        return out

    def _exact_value(self, a):
        for root, _ in self.circle_roots():
            if is_exact(a) and is_exact(root) and angles_equal(a, root):
                return 0j
        return None


@dataclass(frozen=True)
class EssentialZero(CircleFunction):
    """``exp(-1/x**p)`` on (0, 1/2], mirrored on [1/2, 1), zero at angle 0."""

    p: float = 1.0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be at least 1")

    def _values(self, t):
        d = np.abs(_wrap(t))
        out = np.zeros(d.shape)
        live = d >= ESSENTIAL_UNDERFLOW
        out[live] = np.exp(-(d[live] ** -self.p))
        return out.astype(complex)

    def _log_abs(self, t, anchor):
        d = np.abs(float(_wrap(anchor)) + np.asarray(t, dtype=float))
        with np.errstate(divide="ignore"):
            return -(d ** -self.p)

    def _exact_value(self, a):
        if is_exact(a) and angles_equal(a, RationalTurns(0)):
            return 0j
        return None


@dataclass(frozen=True)
class Product(CircleFunction):
    factors: tuple[CircleFunction, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def _values(self, t):
        out = np.ones(np.shape(t), dtype=complex)
        for f in self.factors:
            out = out * f._values(t)
        return out

    def _log_abs(self, t, anchor):
        out = np.zeros(np.shape(t))
        for f in self.factors:
            out = out + f._log_abs(t, anchor)
        return out

    def _exact_value(self, a):
        for f in self.factors:
            if f._exact_value(a) == 0:
                return 0j
        return None


@dataclass(frozen=True)
class Scaled(CircleFunction):
    """``z -> base(exp(2 pi i rotation) * z)``."""

    base: CircleFunction
    rotation: Angle

    def _values(self, t):
        return self.base._values(np.asarray(t, dtype=float) + self.rotation.turns())

    def _log_abs(self, t, anchor):
        return self.base._log_abs(t, anchor + self.rotation.turns())

    def _exact_value(self, a):
        if is_exact(a) and is_exact(self.rotation):
            return self.base._exact_value(angle_add(a, self.rotation))
        return None


# ---------------------------------------------------------------------------
# constructors


def laurent(coefficients: Mapping[int, complex]) -> LaurentPolynomial:
    return LaurentPolynomial(tuple(coefficients.items()))


def constant(c: complex) -> LaurentPolynomial:
    return laurent({0: c})


def factored(scalar: complex, roots: Iterable[tuple[RootSpec, int]] = ()) -> FactoredPolynomial:
    return FactoredPolynomial(scalar, tuple(roots))


def product(*factors: CircleFunction) -> Product:
    return Product(tuple(factors))


def lambda_plus_z(lam: complex) -> FactoredPolynomial:
    """``lam + z`` in factored form (single root at ``-lam``).

    When ``|lam| == 1`` the root must be an exact angle, which is only
    possible here for ``lam = ±1, ±i``.
    """
    lam = complex(lam)
    root = -lam
    if abs(abs(root) - 1.0) < TAU_CIRCLE:
        turns = Fraction(round(4 * (math.atan2(root.imag, root.real) / (2 * math.pi))), 4)
        if abs(np.exp(2j * np.pi * float(turns)) - root) > 1e-12:
            raise ValueError("on-circle lam must be a fourth root of unity in factored form")
        return factored(1.0, [(RationalTurns(turns.numerator, turns.denominator), 1)])
    return factored(1.0, [(root, 1)])


def u_plus_lambda_v(lam: complex) -> LaurentPolynomial:
    """Symbol of ``u + lam*v = u(1 + lam*w)``, i.e. ``f(z) = 1 + lam*z``."""
    return laurent({0: 1.0, 1: lam})


# ---------------------------------------------------------------------------
# evaluation


def evaluate(f: CircleFunction, t) -> complex | np.ndarray:
    """Value of ``f`` at an angle (exact or real) or at an array of turns."""
    if isinstance(t, (RationalTurns, ShiftedRational, RealTurns)):
        exact = f._exact_value(t)
        if exact is not None:
            return exact
        return complex(f._values(np.array([t.turns()]))[0])
    arr = np.asarray(t, dtype=float)
    out = f._values(arr)
    return complex(out) if arr.ndim == 0 else out


def log_abs(f: CircleFunction, t, anchor: float = 0.0) -> np.ndarray:
    """``ln|f|`` at angles ``anchor + t`` with ``t`` kept as a separate offset."""
    return f._log_abs(np.asarray(t, dtype=float), float(anchor))


# ---------------------------------------------------------------------------
# zero sets


@dataclass(frozen=True)
class ZeroSet:
    points: tuple[tuple[Angle, int], ...]
    exactness: str  # "exact" | "sampled"

    def __post_init__(self):
        pts = tuple(self.points)
        if self.exactness == "exact" and not all(is_exact(a) for a, _ in pts):
            raise ValueError("an exact zero set needs exact angles")
        object.__setattr__(self, "points", pts)

    @property
    def is_exact(self) -> bool:
        return self.exactness == "exact"

    def angles(self) -> list[Angle]:
        return [a for a, _ in self.points]

    def __len__(self):
        return len(self.points)

    def __bool__(self):
        return bool(self.points)


def _merge(points: Iterable[tuple[Angle, int]]) -> list[tuple[Angle, int]]:
    out: list[list] = []
    for a, m in points:
        for entry in out:
            if angles_equal(entry[0], a, atol=1e-9):
                entry[1] += m
                break
        else:
            out.append([a, m])
    return [(a, m) for a, m in out]


def zero_set(f: CircleFunction) -> ZeroSet:
    """Zeros of ``f`` on the circle with multiplicities."""
    if isinstance(f, FactoredPolynomial):
        pts = _merge(f.circle_roots())
        exact = all(is_exact(a) for a, _ in pts)
        return ZeroSet(tuple(pts), "exact" if exact else "sampled")
    if isinstance(f, EssentialZero):
        return ZeroSet(((RationalTurns(0), 1),), "exact")
    if isinstance(f, Product):
        parts = [zero_set(g) for g in f.factors]
        pts = _merge(p for z in parts for p in z.points)
        exact = all(z.is_exact for z in parts)
        return ZeroSet(tuple(pts), "exact" if exact else "sampled")
    if isinstance(f, Scaled):
        inner = zero_set(f.base)
        back = angle_neg(f.rotation)
        pts = [(angle_add(a, back), m) for a, m in inner.points]
        exact = inner.is_exact and (is_exact(f.rotation) or not pts)
        if not exact:
            pts = [(RealTurns(a.turns()), m) for a, m in pts]
        return ZeroSet(tuple(pts), "exact" if exact else "sampled")
    if isinstance(f, LaurentPolynomial):
        if len(f.terms) == 1 and f.terms[0][1] != 0:
            return ZeroSet((), "exact")  # c z^k never vanishes on the circle
        return _sampled_zeros(f)
    raise TypeError(f"unsupported circle function {type(f).__name__}")


def _sampled_zeros(f: LaurentPolynomial) -> ZeroSet:
    """Local minima of |f| on a grid, polished by Newton's method in z."""
    if not f.terms:
        raise ValueError("the zero polynomial vanishes everywhere")
    ks = np.array([k for k, _ in f.terms])
    cs = np.array([c for _, c in f.terms])
    span = int(ks.max() - ks.min())
    if span == 0:
        return ZeroSet((), "sampled")
    n = max(4096, 64 * span)
    grid = np.arange(n) / n
    mag = np.abs(f._values(grid))
    scale = mag.max()
    minima = np.nonzero((mag <= np.roll(mag, 1)) & (mag <= np.roll(mag, -1)))[0]

    def val(z):
        return np.sum(cs * z**ks)

    def der(z):
        return np.sum(ks * cs * z ** (ks - 1))

    found: list[tuple[Angle, int]] = []
    for i in minima:
        z = np.exp(2j * np.pi * grid[i])
        for _ in range(200):
            d = der(z)
            if d == 0:
                break
            step = val(z) / d
            z = z - step
            if abs(step) < 1e-16:
                break
        if not np.isfinite(z) or abs(abs(z) - 1.0) > 1e-6:
            continue
        t = (np.angle(z) / (2 * np.pi)) % 1.0
        if abs(f._values(np.array([t]))[0]) >= TAU_ZERO * scale:
            continue
        h1, h2 = 1e-4, 1e-3
        v1 = abs(f._values(np.array([t + h1]))[0])
        v2 = abs(f._values(np.array([t + h2]))[0])
        mult = max(1, int(round(math.log(v2 / v1) / math.log(h2 / h1)))) if v1 > 0 else 1
        found.append((RealTurns(t), mult))
    return ZeroSet(tuple(_merge(found)), "sampled")


# ---------------------------------------------------------------------------
# Fourier data of |f|^2


@dataclass(frozen=True)
class FourierCoefficients:
    coeffs: dict[int, complex]
    exact: bool
    aliasing_error: float = 0.0

    def support(self, tol: float) -> list[int]:
        return sorted(k for k, c in self.coeffs.items() if abs(c) > tol)


def to_laurent(f: CircleFunction) -> dict[int, complex] | None:
    """Laurent coefficients of ``f`` when it is a polynomial, else None."""
    if isinstance(f, LaurentPolynomial):
        return f.coefficients
    if isinstance(f, FactoredPolynomial):
        roots = []
        for root, mult in f.roots:
            r = root if isinstance(root, complex) else _unit(root)
            roots.extend([r] * mult)
        poly = np.polynomial.polynomial.polyfromroots(roots) if roots else np.array([1.0])
        return {k: f.scalar * complex(c) for k, c in enumerate(poly)}
    if isinstance(f, Product):
        acc: dict[int, complex] = {0: 1.0}
        for g in f.factors:
            cg = to_laurent(g)
            if cg is None:
                return None
            acc = _convolve(acc, cg)
        return acc
    if isinstance(f, Scaled):
        cb = to_laurent(f.base)
        if cb is None:
            return None
        return {k: c * _unit_power(f.rotation, k) for k, c in cb.items()}
    return None


def _unit(a: Angle) -> complex:
    if isinstance(a, RationalTurns) and 4 % a.denominator == 0:
        return (1, 1j, -1, -1j)[a.numerator * (4 // a.denominator) % 4]
    return complex(np.exp(2j * np.pi * a.turns()))


def _unit_power(a: Angle, k: int) -> complex:
    if isinstance(a, RationalTurns):
        return _unit(RationalTurns(a.numerator * k, a.denominator))
    return complex(np.exp(2j * np.pi * ((k * a.turns()) % 1.0)))


def _convolve(a: Mapping[int, complex], b: Mapping[int, complex]) -> dict[int, complex]:
    out: dict[int, complex] = {}
    for i, ca in a.items():
        for j, cb in b.items():
            out[i + j] = out.get(i + j, 0) + ca * cb
    return out


def _hermitian(coeffs: dict[int, complex]) -> dict[int, complex]:
    out = {}
    for k in coeffs:
        ck = coeffs.get(k, 0)
        cm = coeffs.get(-k, 0)
        out[k] = 0.5 * (ck + np.conj(cm))
        if k == 0:
            out[k] = complex(out[k].real, 0.0)
    return {k: complex(v) for k, v in out.items()}


def fourier_abs_squared(f: CircleFunction, K: int, method: str = "auto") -> FourierCoefficients:
    """Fourier coefficients of ``|f|^2`` for ``|k| <= K``.

    Polynomial inputs are expanded symbolically as ``f * conj(f)`` unless
    ``method="sampled"``; everything else goes through an FFT on at least
    ``4K`` samples, with the aliasing error estimated against twice as many.
    """
    if K < 1:
        raise ValueError("K must be positive")
    coeffs = to_laurent(f) if method in ("auto", "symbolic") else None
    if method == "symbolic" and coeffs is None:
        raise ValueError("symbolic Fourier data needs a polynomial")
    if coeffs is not None:
        reflected = {-k: np.conj(c) for k, c in coeffs.items()}
        sq = _convolve(coeffs, reflected)
        span = max((abs(k) for k in sq), default=0)
        if span > K:
            raise DegreeOverflow(f"|f|^2 has degree span {span} > K={K}")
        sq = _hermitian(sq)
        scale = max((abs(c) for c in sq.values()), default=0.0)
        sq = {k: c for k, c in sq.items() if abs(c) > 1e-13 * scale}
        return FourierCoefficients(dict(sorted(sq.items())), exact=True)

    n = 1 << max(6, math.ceil(math.log2(4 * K)))
    first = _fft_coeffs(f, n, K)
    second = _fft_coeffs(f, 2 * n, K)
    alias = max(abs(first[k] - second[k]) for k in first)
    return FourierCoefficients(second, exact=False, aliasing_error=float(alias))


def _fft_coeffs(f: CircleFunction, n: int, K: int) -> dict[int, complex]:
    grid = np.arange(n) / n
    vals = np.abs(f._values(grid)) ** 2
    c = np.fft.fft(vals) / n
    return _hermitian({k: complex(c[k % n]) for k in range(-K, K + 1)})


def coefficient_triples(coeffs: Mapping[int, complex]) -> list[tuple[int, float, float]]:
    """Serialize an exponent map as ``(k, re, im)`` triples."""
    return [(int(k), float(np.real(c)), float(np.imag(c))) for k, c in sorted(coeffs.items())]


def from_triples(triples: Sequence[Sequence[float]]) -> dict[int, complex]:
    return {int(k): complex(re, im) for k, re, im in triples}
