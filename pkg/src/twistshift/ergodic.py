"""Birkhoff products of |f| along an irrational rotation.

``P_n(z) = prod_{k<n} |f(alpha^k z)|`` is the modulus of the symbol of
``(u f(v))^n``.  Products are accumulated as sums of logarithms, so a single
zero factor makes the product exactly zero and ``n`` in the thousands never
overflows.

The supremum over a finite grid is a lower estimate of the essential
supremum; refine ``grid_size`` to tighten it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circlefn import TAU_ZERO, CircleFunction, log_abs
from .diophantine import RotationAngle
from .errors import ZeroOnGrid

EVALUATION_BUDGET = 10**9
_CHUNK = 1 << 21  # evaluations per vectorised block


@dataclass(frozen=True)
class BirkhoffTrace:
    n: int
    grid_size: int
    offset: float
    log_values: np.ndarray  # ln P_n(z_j), -inf where a factor vanishes

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    @property
    def roots(self) -> np.ndarray:
        return np.exp(self.log_values / self.n)

    @property
    def sup_root(self) -> float:
        return float(np.exp(np.max(self.log_values) / self.n))

    @property
    def inf_root(self) -> float:
        return float(np.exp(np.min(self.log_values) / self.n))

    @property
    def gap(self) -> float:
        return self.sup_root - self.inf_root


@dataclass(frozen=True)
class EmpiricalDistribution:
    samples: np.ndarray  # sorted

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.samples.size, 1.0 / self.samples.size)

    def mass_in(self, lo: float, hi: float) -> float:
        inside = np.count_nonzero((self.samples >= lo) & (self.samples <= hi))
        return inside / self.samples.size

    def cdf(self, x: float) -> float:
        return np.searchsorted(self.samples, x, side="right") / self.samples.size


def grid_angles(grid_size: int, offset: float | None = None) -> np.ndarray:
    """``j/grid_size + offset``; the default offset is half a cell."""
    if offset is None:
        offset = 0.5 / grid_size
    return (np.arange(grid_size) / grid_size + offset) % 1.0


def _log_factors(f, theta, n, grid_size, offset, start=0):
    """Yield blocks of ``ln|f(alpha^k z_j)|`` with shape (k-block, grid)."""
    if n * grid_size > EVALUATION_BUDGET:
        raise ValueError(f"n*grid_size = {n * grid_size} exceeds the evaluation budget")
    z = grid_angles(grid_size, offset)
    phases = theta.orbit_phases(start + n)[start:]
    rows = max(1, _CHUNK // grid_size)
    for i in range(0, n, rows):
        ph = phases[i : i + rows]
        angles = (ph[:, None] + z[None, :]) % 1.0
        yield log_abs(f, angles.ravel()).reshape(angles.shape)


def birkhoff_product(
    f: CircleFunction,
    theta: RotationAngle,
    n: int,
    grid_size: int,
    offset: float | None = None,
) -> BirkhoffTrace:
    if n < 1 or grid_size < 1:
        raise ValueError("n and grid_size must be positive")
    if offset is None:
        offset = 0.5 / grid_size
    acc = np.zeros(grid_size)
    with np.errstate(invalid="ignore"):
        for block in _log_factors(f, theta, n, grid_size, offset):
            acc += block.sum(axis=0)
    acc[np.isnan(acc)] = -np.inf
    return BirkhoffTrace(n, grid_size, float(offset), acc)


def spectral_radius_estimate(
    f: CircleFunction,
    theta: RotationAngle,
    schedule: Sequence[int],
    grid_size: int = 256,
    offset: float | None = None,
) -> list[tuple[int, float]]:
    """``(n, sup_z P_n(z)^{1/n})`` for each n; the limit is the spectral
    radius of u f(v), which equals Δ(f(v)) for continuous f."""
    schedule = list(schedule)
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be increasing")
    return [(n, birkhoff_product(f, theta, n, grid_size, offset).sup_root) for n in schedule]


def uniformity_gap(
    f: CircleFunction,
    theta: RotationAngle,
    n: int,
    grid_size: int,
    offset: float | None = None,
) -> float:
    """``sup_root - inf_root``; requires |f| bounded away from zero on the orbit."""
    trace = birkhoff_product(f, theta, n, grid_size, offset)
    floor = math.log(TAU_ZERO)
    if not np.all(np.isfinite(trace.log_values)):
        raise ZeroOnGrid("f vanishes at a sampled orbit point")
    for block in _log_factors(f, theta, n, grid_size, trace.offset):
        if np.any(block < floor):
            raise ZeroOnGrid(f"|f| drops below {TAU_ZERO:g} on the sampled orbit")
    return trace.gap


def nu_n_distribution(
    f: CircleFunction,
    theta: RotationAngle,
    n: int,
    grid_size: int,
    offset: float | None = None,
) -> EmpiricalDistribution:
    """Empirical law of ``P_n(z)^{2/n}`` over the grid: the spectral
    distribution of ``((T^n)^* T^n)^{1/n}`` for ``T = u f(v)``."""
    trace = birkhoff_product(f, theta, n, grid_size, offset)
    samples = np.sort(np.exp(2.0 * trace.log_values / n))
    return EmpiricalDistribution(samples)


def cocycle_defect(f, theta, n, m, grid_size, offset=None) -> float:
    """``max |ln P_{n+m}(z) - ln P_n(z) - ln P_m(alpha^n z)|`` over the grid."""
    if offset is None:
        offset = 0.5 / grid_size
    whole = birkhoff_product(f, theta, n + m, grid_size, offset).log_values
    head = birkhoff_product(f, theta, n, grid_size, offset).log_values
    tail = np.zeros(grid_size)
    for block in _log_factors(f, theta, m, grid_size, offset, start=n):
        tail += block.sum(axis=0)
    return float(np.max(np.abs(whole - head - tail)))
