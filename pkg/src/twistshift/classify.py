"""Decision procedures for u f(v): spectrum shape, Brown measure, index,
period of |f|, orbit conditions on zero sets and C*-simplicity.

Orbit questions are answered exactly.  Zeros written as ``r + m*theta`` with
rational ``r`` make "does ``t_i - t_j = n*theta (mod 1)`` for some n != 0"
a finite comparison, because an irrational theta cannot be a rational
combination of itself.  Sampled (floating) zero sets are refused instead of
guessed.

For ``u + lam*v = u(1 + lam*w)`` the radius computed here is
``Δ(1 + lam z) = max(1, |lam|)``.  A circle of radius ``|lam|`` is sometimes
quoted for every lam; that only agrees when ``|lam| >= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .circlefn import (
    CircleFunction,
    ZeroSet,
    evaluate,
    exact_parts,
    fourier_abs_squared,
    to_laurent,
    zero_set,
)
from .diophantine import RotationAngle
from .errors import EmptyZeroSet, HypothesisFailed, InexactZeroSet
from .fkdet import DeterminantResult, fk_determinant

TAU_INV = 1e-6
INVERTIBILITY_GRID = 1 << 16
SUPPORT_RTOL = 1e-9
SAMPLED_K = 64
UNDECIDED = "undecided"


@dataclass(frozen=True)
class SpectrumVerdict:
    shape: str  # "circle" | "disk"
    radius: float
    invertible: bool
    evidence: str  # "exact zero set" | "sampled minimum of |f|"
    determinant: DeterminantResult = field(repr=False)
    min_abs: float | None = None


def _sampled_min(f: CircleFunction) -> float:
    grid = np.arange(INVERTIBILITY_GRID) / INVERTIBILITY_GRID
    return float(np.min(np.abs(evaluate(f, grid))))


def classify_spectrum(f: CircleFunction) -> SpectrumVerdict:
    """Circle of radius Δ(f) when f(v) is invertible, closed disk otherwise."""
    zs = zero_set(f)
    det = fk_determinant(f)
    if zs.is_exact:
        invertible = not zs
        evidence, min_abs = "exact zero set", None
    else:
        min_abs = _sampled_min(f)
        invertible = not zs and min_abs > TAU_INV
        evidence = "sampled minimum of |f|"
    return SpectrumVerdict(
        "circle" if invertible else "disk", det.delta, invertible, evidence, det, min_abs
    )


@dataclass(frozen=True)
class BrownMeasure:
    radius: float
    description: str

    @property
    def is_point_mass(self) -> bool:
        return self.radius == 0.0


def brown_measure(f: CircleFunction) -> BrownMeasure:
    """Haar measure on the circle of radius Δ(f); a point mass at 0 if Δ = 0."""
    det = fk_determinant(f)
    if det.delta == 0.0:
        return BrownMeasure(0.0, "point mass at 0")
    return BrownMeasure(det.delta, f"Haar measure on the circle of radius {det.delta!r}")


# ---------------------------------------------------------------------------
# index and period


@dataclass(frozen=True)
class IndexReport:
    n: int | None  # None when |f| is constant
    support: tuple[int, ...]
    notes: str
    exact: bool = True
    aliasing_error: float = 0.0

    @property
    def degenerate(self) -> bool:
        return self.n is None


def _default_k(f: CircleFunction) -> int:
    coeffs = to_laurent(f)
    if coeffs is None:
        return SAMPLED_K
    ks = list(coeffs)
    return max(1, max(ks) - min(ks))


def subfactor_index(
    f: CircleFunction, tol: float | None = None, K: int | None = None, method: str = "auto"
) -> IndexReport:
    """gcd of the nonzero Fourier support of ``|f|^2``.

    ``|f|^2`` has the same minimal period as ``|f|`` and is a Laurent
    polynomial whenever f is, so the support is exact on the symbolic path.
    """
    K = _default_k(f) if K is None else K
    fc = fourier_abs_squared(f, K, method=method)
    scale = max((abs(c) for c in fc.coeffs.values()), default=0.0)
    if tol is None:
        tol = SUPPORT_RTOL * scale
    support = tuple(fc.support(tol))
    notes = "period of |f| read from |f|^2; "
    notes += "symbolic expansion" if fc.exact else f"FFT, aliasing {fc.aliasing_error:.2e}"
    nonzero = [abs(k) for k in support if k != 0]
    if not nonzero:
        return IndexReport(None, support, notes + "; |f| is constant", fc.exact, fc.aliasing_error)
    return IndexReport(math.gcd(*nonzero), support, notes, fc.exact, fc.aliasing_error)


def minimal_period(f: CircleFunction, tol: float | None = None, **kw) -> int | None:
    """n such that |f| has minimal period exp(2 pi i/n); None if |f| is constant."""
    return subfactor_index(f, tol, **kw).n


# ---------------------------------------------------------------------------
# orbits and simplicity


@dataclass(frozen=True)
class OrbitCheck:
    holds: bool
    witness: tuple[int, int, int] | None = None  # (i, j, n): t_i - t_j = n*theta


def orbit_condition(Y: ZeroSet, theta: RotationAngle, horizon: int | None = None) -> OrbitCheck:
    """Is ``rot^n(Y) ∩ Y`` empty for every n != 0, rot = rotation by theta?

    Exact: ``t_i - t_j = n*theta (mod 1)`` with n != 0 happens iff the
    rational parts agree and the theta-multiples differ, with
    ``n = m_i - m_j``.  ``horizon`` is accepted for symmetry with approximate
    checks and does not affect the answer.
    """
    if not Y.is_exact:
        raise InexactZeroSet("orbit decisions need exact zero angles")
    parts = []
    for a in Y.angles():
        r, m, th = exact_parts(a)
        if th is not None and th != theta:
            raise ValueError("zero set is shifted by a different rotation number")
        parts.append((r, m))
    for i, (ri, mi) in enumerate(parts):
        for j, (rj, mj) in enumerate(parts):
            # report the collision with n > 0; (j, i, -n) is the mirror image
            if ri == rj and mi > mj:
                return OrbitCheck(False, (i, j, mi - mj))
    return OrbitCheck(True)


@dataclass(frozen=True)
class SimplicityVerdict:
    simple: Union[bool, str]
    failing_witness: tuple[int, int, int] | None
    conditions_checked: tuple[str, ...]
    note: str = ""


def simplicity(f: CircleFunction, theta: RotationAngle) -> SimplicityVerdict:
    """C*(u f(v), 1) is simple iff no two zeros of f share a rotation orbit.

    Stated for f with zeros and non-periodic |f|; periodic |f| yields an
    undecided verdict rather than an answer.
    """
    zs = zero_set(f)
    checked = ["zero set nonempty"]
    if not zs:
        raise EmptyZeroSet("f has no zeros; the invertible case is covered by algebra_A")
    checked.append("zero set exact")
    if not zs.is_exact:
        raise InexactZeroSet("zero set is sampled; orbit condition cannot be certified")
    checked.append("|f| not periodic")
    period = minimal_period(f)
    if period != 1:
        return SimplicityVerdict(
            UNDECIDED, None, tuple(checked), f"|f| has minimal period 1/{period}; hypothesis fails"
        )
    checked.append("orbit condition")
    check = orbit_condition(zs, theta)
    return SimplicityVerdict(check.holds, check.witness, tuple(checked))


@dataclass(frozen=True)
class AlgebraReport:
    n: int | None
    statement: str
    isomorphism: str


def algebra_A(f: CircleFunction, theta: RotationAngle) -> AlgebraReport:
    """Identify ``A = C*(|f|(alpha^k v) : k)`` as ``C*(v^n)`` and the
    resulting model of ``C*(u f(v), 1)``."""
    zs = zero_set(f)
    if zs:
        if not zs.is_exact:
            raise InexactZeroSet("zero set is sampled; orbit condition cannot be certified")
        if not orbit_condition(zs, theta).holds:
            raise HypothesisFailed("two zeros share a rotation orbit")
    n = minimal_period(f)
    if n is None:
        return AlgebraReport(None, "A = C*(1)", "C*(u)")
    vn = "v" if n == 1 else f"v^{n}"
    statement = f"A = C*({vn})"
    if not zs:
        return AlgebraReport(n, statement, f"C*(u, {vn})")
    if n == 1:
        return AlgebraReport(1, statement, "A_{θ,|f|^2}")
    return AlgebraReport(n, statement, f"A_{{{n}θ,|g|^2}} with |f|(z) = g(z^{n})")
