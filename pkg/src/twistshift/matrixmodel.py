"""Finite clock-and-shift models of u f(v) at a rational rotation p/q.

In dimension q the shift ``S e_k = e_{k+1 mod q}`` and the clock
``V = diag(exp(2 pi i k p/q))`` satisfy ``V S = exp(2 pi i p/q) S V``.
Replacing v by the clock turns u f(v) into the weighted cyclic shift
``M = S diag(d)``, ``d_k = f(exp(2 pi i k p/q) z0)``, whose spectrum is known
in closed form: the q-th roots of ``prod d_k``.  No general nonsymmetric
eigensolver is involved; the closed form is checked against direct matrix
action instead.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
import scipy.sparse as sp
from numba import config, njit, prange, set_num_threads

from .circlefn import TAU_ZERO, Angle, CircleFunction, RationalTurns, evaluate, to_laurent
from .diophantine import Convergent
from .errors import NoConvergence, ZeroEigenvalue

# the bundled TBB is too old for numba; pick the OpenMP pool explicitly
config.THREADING_LAYER = "omp"

SIGMA_RTOL = 1e-10
SIGMA_MAXITER = 500
JACOBI_TOL = 1e-10


@dataclass(frozen=True)
class FiniteModel:
    p: int
    q: int
    base_angle: Angle
    weights: np.ndarray

    @property
    def degenerate(self) -> bool:
        mags = np.abs(self.weights)
        return bool(np.any(mags < TAU_ZERO * max(mags.max(), 1.0)))

    def matrix(self) -> sp.csr_matrix:
        """``M = S D`` as a sparse matrix: row k+1 holds d_k in column k."""
        q = self.q
        rows = (np.arange(q) + 1) % q
        return sp.csr_matrix((self.weights, (rows, np.arange(q))), shape=(q, q))

    def log_polar_product(self) -> tuple[float, float]:
        """``(sum ln|d_k|, principal arg of prod d_k)``."""
        with np.errstate(divide="ignore"):
            log_mod = float(np.sum(np.log(np.abs(self.weights))))
        phase = float(np.sum(np.angle(self.weights)))
        phase = math.remainder(phase, 2 * math.pi)
        return log_mod, phase

    @property
    def radius(self) -> float:
        """``|prod d_k|^{1/q}``, the common modulus of all eigenvalues."""
        log_mod, _ = self.log_polar_product()
        return math.exp(log_mod / self.q) if log_mod > -math.inf else 0.0


def radius_high_precision(
    f: CircleFunction, conv: Convergent, base_angle: Angle = RationalTurns(0), dps: int | None = None
) -> mpmath.mpf:
    """``|prod d_k|^{1/q}`` for a polynomial ``f`` evaluated with mpmath.

    Needed when ``rho(q)`` is closer to its limit than double precision can
    resolve (for ``2 + z`` the gap is about ``2**-q``).
    """
    coeffs = to_laurent(f)
    if coeffs is None:
        raise ValueError("high-precision radius needs a polynomial f")
    p, q = conv.p, conv.q
    if dps is None:
        dps = 30 + q
    if not isinstance(base_angle, RationalTurns):
        raise ValueError("high-precision radius needs a rational base angle")
    with mpmath.workdps(dps):
        base = mpmath.mpf(base_angle.numerator) / base_angle.denominator
        cs = [(k, mpmath.mpc(c.real, c.imag)) for k, c in coeffs.items()]
        total = mpmath.mpf(0)
        for j in range(q):
            t = mpmath.mpf((j * p) % q) / q + base
            val = mpmath.fsum(c * mpmath.expjpi(2 * k * t) for k, c in cs)
            total += mpmath.log(abs(val))
        return +mpmath.exp(total / q)


@dataclass(frozen=True)
class EigenPair:
    value: complex
    vector: np.ndarray


def clock_matrix(p: int, q: int) -> np.ndarray:
    return np.diag(np.exp(2j * np.pi * ((np.arange(q) * p) % q) / q))


def shift_matrix(q: int) -> np.ndarray:
    return np.roll(np.eye(q), 1, axis=0)


def build_model(f: CircleFunction, conv: Convergent, base_angle: Angle = RationalTurns(0)) -> FiniteModel:
    """Sample ``f`` at ``exp(2 pi i (k p/q + base))`` for k = 0..q-1."""
    p, q = conv.p, conv.q
    if q < 1:
        raise ValueError("q must be positive")
    if isinstance(base_angle, RationalTurns) and q <= 4096:
        # exact sample angles keep exact zeros exactly zero
        b = base_angle.fraction
        weights = [evaluate(f, _turns(Fraction(k * p, q) + b)) for k in range(q)]
        return FiniteModel(p, q, base_angle, np.array(weights, dtype=complex))
    angles = ((np.arange(q) * p) % q) / q + base_angle.turns()
    return FiniteModel(p, q, base_angle, np.asarray(evaluate(f, angles), dtype=complex))


def _turns(x: Fraction) -> RationalTurns:
    return RationalTurns(x.numerator, x.denominator)


def model_from_weights(weights: Sequence[complex], p: int = 0) -> FiniteModel:
    w = np.asarray(weights, dtype=complex)
    return FiniteModel(p, w.size, RationalTurns(0), w)


_QUARTERS = (1 + 0j, 1j, -1 + 0j, -1j)


def _cis_turns(t: float) -> complex:
    """``exp(2 pi i t)``, exact at quarter turns."""
    four = 4 * t
    if four == round(four):
        return _QUARTERS[int(round(four)) % 4]
    return cmath.exp(2j * math.pi * t)


def eigenpairs_closed_form(model: FiniteModel) -> list[EigenPair]:
    """All q eigenpairs ``lambda_j = rho e^{i phi/q} e^{2 pi i j/q}``."""
    q = model.q
    d = model.weights
    log_mod, phase = model.log_polar_product()
    if log_mod == -math.inf:
        # nilpotent: every eigenvalue is 0, vectors only generalized
        return [EigenPair(0j, np.eye(q, dtype=complex)[:, j]) for j in range(q)]
    rho = math.exp(log_mod / q)
    base = phase / (2 * math.pi)
    pairs = []
    for j in range(q):
        lam = rho * _cis_turns((base + j) / q)
        ratios = d[:-1] / lam
        vec = np.concatenate(([1.0 + 0j], np.cumprod(ratios)))
        pairs.append(EigenPair(lam, vec))
    return pairs


def eigen_residual(model: FiniteModel, pair: EigenPair) -> float:
    """``||M x - lambda x|| / ||x||`` by explicit sparse matrix-vector product."""
    if pair.value == 0:
        raise ZeroEigenvalue("residual is undefined for the nilpotent case")
    x = pair.vector
    r = model.matrix() @ x - pair.value * x
    return float(np.linalg.norm(r) / np.linalg.norm(x))


# ---------------------------------------------------------------------------
# smallest singular value of M - lambda I


@njit(cache=True)
def _prepare(a, c):
    """Sweep data for ``a_k x_k + c_k x_{k+1} = r_k`` (indices mod q).

    The sweep runs in the direction whose multiplier product has modulus at
    most one; ``x_k = u_k + w_k x_0`` and one scalar equation closes the cycle.
    """
    q = a.size
    la = 0.0
    lc = 0.0
    for k in range(q):
        la += np.log(np.abs(a[k])) if a[k] != 0 else -np.inf
        lc += np.log(np.abs(c[k])) if c[k] != 0 else -np.inf
    back = la >= lc
    inv = np.empty(q, dtype=np.complex128)
    mult = np.empty(q, dtype=np.complex128)
    w = np.ones(q + 1, dtype=np.complex128)
    ok = True
    for k in range(q):
        div = a[k] if back else c[k]
        if div == 0:
            ok = False
            div = 1.0
        inv[k] = 1.0 / div
        mult[k] = -(c[k] if back else a[k]) * inv[k]
    if back:
        for k in range(q - 1, -1, -1):
            w[k] = mult[k] * w[k + 1]
        closing = 1.0 - w[0]
    else:
        for k in range(q):
            w[k + 1] = mult[k] * w[k]
        closing = 1.0 - w[q]
    if closing == 0 or not np.isfinite(closing.real) or not np.isfinite(closing.imag):
        ok = False
    return back, inv, mult, w, closing, ok


@njit(cache=True)
def _sweep(back, inv, mult, w, closing, r):
    q, b = r.shape
    u = np.zeros((q + 1, b), dtype=np.complex128)
    x = np.empty((q, b), dtype=np.complex128)
    if back:
        for k in range(q - 1, -1, -1):
            for j in range(b):
                u[k, j] = r[k, j] * inv[k] + mult[k] * u[k + 1, j]
        for j in range(b):
            x0 = u[0, j] / closing
            x[0, j] = x0
            for k in range(1, q):
                x[k, j] = u[k, j] + w[k] * x0
    else:
        for k in range(q):
            for j in range(b):
                u[k + 1, j] = r[k, j] * inv[k] + mult[k] * u[k, j]
        for j in range(b):
            x0 = u[q, j] / closing
            for k in range(q):
                x[k, j] = u[k, j] + w[k] * x0
    return x


@njit(cache=True)
def _orthonormalize(z):
    q, b = z.shape
    for j in range(b):
        for _ in range(2):
            for i in range(j):
                proj = 0j
                for k in range(q):
                    proj += np.conj(z[k, i]) * z[k, j]
                for k in range(q):
                    z[k, j] -= proj * z[k, i]
        nrm = 0.0
        for k in range(q):
            nrm += z[k, j].real ** 2 + z[k, j].imag ** 2
        nrm = np.sqrt(nrm)
        if nrm == 0 or not np.isfinite(nrm):
            return False
        for k in range(q):
            z[k, j] /= nrm
    return True


@njit(cache=True)
def _sigma_min_point(d, lam, z, rtol, maxiter):
    """Block inverse iteration on ``(A^* A)^{-1}`` for ``A = S diag(d) - lam I``.

    A block of vectors with Rayleigh-Ritz extraction keeps the rate healthy
    when the two smallest singular values nearly coincide, which happens all
    along the circle of eigenvalues.  Returns ``(sigma, converged)``.
    """
    q, b = z.shape
    lam_vec = np.full(q, lam, dtype=np.complex128)
    # A x = r:   d_k x_k - lam x_{k+1} = r_{k+1}
    # A^* y = r: -conj(lam) y_k + conj(d_k) y_{k+1} = r_k
    ba, ia, ma, wa, ca, oka = _prepare(d, -lam_vec)
    bh, ih, mh, wh, chh, okh = _prepare(-np.conj(lam_vec), np.conj(d))
    if not (oka and okh):
        return 0.0, True
    if not _orthonormalize(z):
        return 0.0, True
    sigma = np.inf
    shifted = np.empty((q, b), dtype=np.complex128)
    for _ in range(maxiter):
        y = _sweep(bh, ih, mh, wh, chh, z)
        for k in range(q):
            for j in range(b):
                shifted[k, j] = y[(k + 1) % q, j]
        x = _sweep(ba, ia, ma, wa, ca, shifted)
        small = np.conj(z.T) @ x
        small = 0.5 * (small + np.conj(small.T))
        mu = np.linalg.eigvalsh(small)[-1]
        if not np.isfinite(mu) or mu <= 0:
            return 0.0, True
        est = 1.0 / np.sqrt(mu)
        if abs(est - sigma) <= rtol * est:
            return est, True
        sigma = est
        if not _orthonormalize(x):
            return 0.0, True
        z = x
    return sigma, False


@njit(cache=True, parallel=True)
def _sigma_min_many(d, lams, starts, rtol, maxiter):
    n = lams.size
    sigma = np.empty(n)
    done = np.empty(n, dtype=np.bool_)
    for i in prange(n):
        sigma[i], done[i] = _sigma_min_point(d, lams[i], starts[i].copy(), rtol, maxiter)
    return sigma, done


def _sigma_min_batch(weights, lams, seed: int = 0, block: int = 4):
    weights = np.ascontiguousarray(weights, dtype=np.complex128)
    lams = np.ascontiguousarray(np.asarray(lams, dtype=np.complex128).ravel())
    q = weights.size
    b = min(block, q)
    rng = np.random.default_rng(seed)
    start = rng.standard_normal((q, b)) + 1j * rng.standard_normal((q, b))
    starts = np.ascontiguousarray(np.broadcast_to(start, (lams.size, q, b)))
    return _sigma_min_many(weights, lams, starts, SIGMA_RTOL, SIGMA_MAXITER)


def sigma_min(model: FiniteModel, lam: complex, iterative: bool = False) -> float:
    """Smallest singular value of ``M - lam I``.

    At ``lam = 0`` the answer is ``min |d_k|`` exactly because S is unitary;
    pass ``iterative=True`` to force the inverse iteration there as well.
    """
    if lam == 0 and not iterative:
        return float(np.min(np.abs(model.weights)))
    sigma, done = _sigma_min_batch(model.weights, np.array([lam]))
    if not done[0]:
        raise NoConvergence(
            f"inverse iteration did not settle in {SIGMA_MAXITER} steps", float(sigma[0])
        )
    return float(sigma[0])


@dataclass(frozen=True)
class PseudospectrumField:
    re: np.ndarray
    im: np.ndarray
    sigma: np.ndarray  # shape (len(im), len(re))
    converged: np.ndarray

    def fraction_below(self, eps: float, inside_radius: float | None = None) -> float:
        R, I = np.meshgrid(self.re, self.im)
        mask = np.ones_like(self.sigma, dtype=bool)
        if inside_radius is not None:
            mask = np.abs(R + 1j * I) < inside_radius
        return float(np.count_nonzero((self.sigma < eps) & mask) / self.sigma.size)

    def sublevel(self, eps: float) -> np.ndarray:
        return self.sigma < eps


def pseudospectrum_grid(
    model: FiniteModel,
    re_range: tuple[float, float],
    im_range: tuple[float, float],
    resolution: tuple[int, int],
    threads: int = 0,
    seed: int = 0,
) -> PseudospectrumField:
    nx, ny = resolution
    if nx > 512 or ny > 512:
        raise ValueError("resolution is capped at 512x512")
    re = np.linspace(*re_range, nx)
    im = np.linspace(*im_range, ny)
    lams = (re[None, :] + 1j * im[:, None]).ravel()
    if threads > 0:
        set_num_threads(min(threads, config.NUMBA_NUM_THREADS))
    sigma, done = _sigma_min_batch(model.weights, lams, seed)
    zero = lams == 0
    sigma[zero] = np.min(np.abs(model.weights))
    done[zero] = True
    return PseudospectrumField(re, im, sigma.reshape(ny, nx), done.reshape(ny, nx))


# ---------------------------------------------------------------------------
# Harper / almost Mathieu


def harper_matrix(coupling: float, p: int, q: int) -> np.ndarray:
    """``(U + U^*) + coupling (V + V^*)`` at rotation p/q (real symmetric)."""
    s = shift_matrix(q)
    h = s + s.T
    h += np.diag(2.0 * coupling * np.cos(2 * np.pi * ((np.arange(q) * p) % q) / q))
    return h


def _round_robin(m: int):
    """Pairings for m (even) players: m-1 rounds, each a perfect matching."""
    players = list(range(m))
    for _ in range(m - 1):
        yield [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        players = [players[0], players[-1]] + players[1:-1]


def jacobi_eigenvalues(a: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Rotations inside a round act on disjoint index pairs, so each round is
    applied as one vectorised block update.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy()
    m = n + (n % 2)
    rounds = []
    for pairs in _round_robin(m):
        pr = np.array([(i, j) if i < j else (j, i) for i, j in pairs if i < n and j < n])
        rounds.append((pr[:, 0], pr[:, 1]))
    scale = max(np.linalg.norm(a), 1.0)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off <= tol * scale:
            return np.sort(a.diagonal())
        for P, Q in rounds:
            apq = a[P, Q]
            app = a[P, P]
            aqq = a[Q, Q]
            nz = apq != 0
            t = np.zeros_like(apq)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                tau = (aqq - app) / (2.0 * apq)
                t[nz] = np.sign(tau[nz]) / (np.abs(tau[nz]) + np.sqrt(1.0 + tau[nz] ** 2))
            t[nz & (tau == 0)] = 1.0
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            rp, rq = a[P, :].copy(), a[Q, :].copy()
            a[P, :] = c[:, None] * rp - s[:, None] * rq
            a[Q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = a[:, P].copy(), a[:, Q].copy()
            a[:, P] = cp * c[None, :] - cq * s[None, :]
            a[:, Q] = cp * s[None, :] + cq * c[None, :]
    raise NoConvergence(f"Jacobi did not reach off-diagonal norm {tol:g}")


def harper_eigenvalues(coupling: float, conv: Convergent) -> np.ndarray:
    """Ascending eigenvalues of the Harper matrix at ``conv = p/q``."""
    if coupling < 0:
        raise ValueError("coupling must be nonnegative")
    if conv.q > 4096:
        raise ValueError("q is capped at 4096")
    return jacobi_eigenvalues(harper_matrix(coupling, conv.p, conv.q))


def butterfly(q_max: int, coupling: float = 1.0):
    """``(p, q, eigenvalue)`` rows for every reduced p/q with q <= q_max."""
    rows = []
    for q in range(1, q_max + 1):
        for p in range(q):
            if math.gcd(p, q) != 1:
                continue
            for e in harper_eigenvalues(coupling, Convergent(p, q, 0.0)):
                rows.append((p, q, float(e)))
    return rows
