import math

import numpy as np
import pytest

from twistshift.circlefn import (
    EssentialZero,
    RationalTurns,
    Scaled,
    factored,
    lambda_plus_z,
    laurent,
    log_abs,
    product,
)
from twistshift.errors import Inconclusive
from twistshift.fkdet import fk_determinant


def midpoint_oracle(f, n=1 << 20):
    t = (np.arange(n) + 0.5) / n
    return float(np.mean(log_abs(f, t)))


@pytest.mark.parametrize(
    "f,want",
    [
        (factored(1.0, [(RationalTurns(0), 1)]), 1.0),
        (lambda_plus_z(2.0), 2.0),
        (lambda_plus_z(3.0), 3.0),
        (lambda_plus_z(0.3), 1.0),
        (lambda_plus_z(0.9), 1.0),
    ],
)
def test_anchors(f, want):
    for method in ("auto", "quadrature"):
        assert abs(fk_determinant(f, method=method).delta - want) <= 1e-6


def test_log_singular_lambda_one():
    assert abs(fk_determinant(laurent({0: 1, 1: 1})).delta - 1.0) <= 1e-3
    assert fk_determinant(lambda_plus_z(1.0)).delta == 1.0


@pytest.mark.parametrize("p", [1, 2])
def test_essential_zero_certified(p):
    det = fk_determinant(EssentialZero(p))
    assert det.delta == 0.0 and det.log_delta == -math.inf
    assert det.method == "quadrature"
    assert det.trace[-1][1] < -60


@pytest.mark.parametrize(
    "coeffs",
    [{0: 2, 1: 1}, {0: 0.9, 1: 1}, {0: 1, 2: 3}, {-1: 0.5, 0: 1j, 3: 0.25}],
)
def test_quadrature_matches_midpoint_oracle(coeffs):
    f = laurent(coeffs)
    got = fk_determinant(f).log_delta
    assert got == pytest.approx(midpoint_oracle(f), abs=1e-7)


def test_jensen_matches_quadrature():
    f = factored(1.5 - 0.5j, [(0.3 + 0.4j, 2), (2.0 - 1.0j, 1), (RationalTurns(2, 7), 1)])
    a = fk_determinant(f)
    q = fk_determinant(f, method="quadrature")
    assert a.method == "analytic"
    assert a.log_delta == pytest.approx(q.log_delta, abs=1e-8)
    want = math.log(abs(1.5 - 0.5j)) + math.log(abs(2.0 - 1.0j))
    assert a.log_delta == pytest.approx(want, abs=1e-14)


def test_product_and_scaled():
    f = product(lambda_plus_z(2.0), Scaled(lambda_plus_z(3.0), RationalTurns(1, 3)))
    assert fk_determinant(f).delta == pytest.approx(6.0, abs=1e-12)


def test_short_schedule_is_inconclusive():
    with pytest.raises(Inconclusive):
        fk_determinant(EssentialZero(1), levels=(4, 5, 6))


def test_trace_levels_recorded():
    det = fk_determinant(laurent({0: 1, 1: 1}))
    levels = [row[0] for row in det.trace]
    assert levels == list(range(4, 4 + len(levels)))
    assert det.error_estimate <= 1e-8
