from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistshift.circlefn import (
    EssentialZero,
    RationalTurns,
    RealTurns,
    Scaled,
    ShiftedRational,
    angles_equal,
    coefficient_triples,
    evaluate,
    factored,
    fourier_abs_squared,
    from_triples,
    lambda_plus_z,
    laurent,
    parse_angle,
    product,
    shifted,
    zero_set,
)
from twistshift.errors import DegreeOverflow


def dft_abs_squared(f, n=256):
    """Brute-force oracle: sample |f|^2 and take an explicit DFT sum."""
    t = np.arange(n) / n
    vals = np.abs(evaluate(f, t)) ** 2
    ks = np.arange(-n // 2, n // 2)
    coeffs = np.exp(-2j * np.pi * np.outer(ks, t)) @ vals / n
    return {int(k): c for k, c in zip(ks, coeffs) if abs(c) > 1e-9}


class TestAngles:
    def test_rational_reduced_mod_one(self):
        a = RationalTurns(6, 4)
        assert (a.numerator, a.denominator) == (1, 2)
        assert RationalTurns(-1, 4) == RationalTurns(3, 4)

    def test_parse(self):
        assert parse_angle("1/3") == RationalTurns(1, 3)
        assert parse_angle(2) == RationalTurns(0, 1)
        assert isinstance(parse_angle("0.25"), RealTurns)

    def test_shifted_keeps_m(self, golden):
        a = shifted(Fraction(5, 4), 2, golden)
        assert isinstance(a, ShiftedRational)
        assert a.r == Fraction(1, 4) and a.m == 2
        assert a.turns() == pytest.approx((0.25 + 2 * golden.value) % 1.0, abs=1e-15)
        assert shifted(Fraction(1, 3), 0, golden) == RationalTurns(1, 3)

    def test_angles_equal_wraps(self):
        assert angles_equal(RealTurns(0.9999999999999), RationalTurns(0))


class TestEvaluate:
    def test_examples(self):
        assert evaluate(laurent({2: 1}), RationalTurns(1, 4)) == -1
        assert evaluate(EssentialZero(1), RationalTurns(0)) == 0
        assert evaluate(laurent({0: 2, 1: 1}), RationalTurns(1, 2)) == 1

    def test_essential_zero_formula(self):
        for p in (1, 2, 1.5):
            g = EssentialZero(p)
            assert evaluate(g, 0.2) == pytest.approx(np.exp(-(0.2**-p)), rel=1e-12)
            assert evaluate(g, 0.7) == pytest.approx(np.exp(-(0.3**-p)), rel=1e-12)
            assert evaluate(g, 1e-16) == 0

    def test_factored_matches_expanded(self):
        f = factored(2.0, [(RationalTurns(1, 3), 1), (0.5 + 0.2j, 2)])
        t = np.linspace(0, 1, 37, endpoint=False)
        z = np.exp(2j * np.pi * t)
        want = 2.0 * (z - np.exp(2j * np.pi / 3)) * (z - (0.5 + 0.2j)) ** 2
        np.testing.assert_allclose(evaluate(f, t), want, rtol=1e-12, atol=1e-14)

    def test_off_circle_root_on_circle_rejected(self):
        with pytest.raises(ValueError):
            factored(1.0, [(1.0 + 0j, 1)])

    @given(st.floats(0, 1, exclude_max=True), st.fractions(0, 1, max_denominator=50))
    def test_scaled_shifts_argument(self, t, s):
        f = laurent({-1: 0.5j, 0: 2.0, 3: 1 - 1j})
        g = Scaled(f, RationalTurns(s.numerator, s.denominator))
        assert abs(evaluate(g, t) - evaluate(f, t + float(s))) < 1e-12

    def test_array_input(self):
        t = np.array([0.0, 0.25, 0.5])
        np.testing.assert_allclose(evaluate(laurent({1: 1}), t), [1, 1j, -1], atol=1e-15)


class TestFourier:
    @pytest.mark.parametrize(
        "coeffs,want",
        [
            ({1: 1}, {0: 1}),
            ({0: 1, 2: 3}, {-2: 3, 0: 10, 2: 3}),
            ({0: 2, 1: 1}, {-1: 2, 0: 5, 1: 2}),
        ],
    )
    def test_examples_against_dft(self, coeffs, want):
        f = laurent(coeffs)
        got = fourier_abs_squared(f, 8).coeffs
        assert set(got) == set(want)
        for k, c in want.items():
            assert got[k] == pytest.approx(c, abs=1e-12)
        oracle = dft_abs_squared(f)
        assert set(oracle) == set(want)
        for k in want:
            assert got[k] == pytest.approx(oracle[k], abs=1e-9)

    def test_sampled_path_agrees(self):
        f = factored(1.0, [(RationalTurns(1, 5), 1), (2.0 + 0j, 1)])
        sym = fourier_abs_squared(f, 4, method="symbolic")
        smp = fourier_abs_squared(f, 4, method="sampled")
        assert not smp.exact and smp.aliasing_error < 1e-9
        for k in sym.coeffs:
            assert smp.coeffs[k] == pytest.approx(sym.coeffs[k], abs=1e-9)

    def test_degree_overflow(self):
        with pytest.raises(DegreeOverflow):
            fourier_abs_squared(laurent({0: 1, 5: 1}), 3, method="symbolic")

    @settings(max_examples=40, deadline=None)
    @given(
        st.dictionaries(
            st.integers(-4, 4),
            st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
            min_size=1,
            max_size=5,
        )
    )
    def test_conjugate_symmetry_and_mean(self, coeffs):
        f = laurent(coeffs)
        K = 8
        c = fourier_abs_squared(f, K).coeffs
        for k, v in c.items():
            assert abs(c.get(-k, 0) - np.conj(v)) <= 1e-12 * (1 + abs(v))
        t = np.arange(4 * K) / (4 * K)
        mean = np.mean(np.abs(evaluate(f, t)) ** 2)
        assert abs(c.get(0, 0) - mean) <= 1e-9 * max(1.0, mean)

    def test_triples_roundtrip(self):
        coeffs = {-2: 1 + 2j, 0: 3.5, 4: -1j}
        assert from_triples(coefficient_triples(coeffs)) == coeffs


class TestZeroSet:
    def test_examples(self):
        zs = zero_set(factored(1.0, [(RationalTurns(0), 1)]))
        assert zs.is_exact and list(zs.points) == [(RationalTurns(0), 1)]
        assert not zero_set(laurent({0: 2, 1: 1}))
        zs = zero_set(EssentialZero(2))
        assert zs.is_exact and list(zs.points) == [(RationalTurns(0), 1)]

    def test_lambda_plus_z_unit(self):
        zs = zero_set(lambda_plus_z(1.0))
        assert list(zs.points) == [(RationalTurns(1, 2), 1)]

    def test_product_is_union(self):
        a = factored(1.0, [(RationalTurns(1, 4), 1)])
        b = factored(1.0, [(RationalTurns(1, 4), 2), (RationalTurns(1, 2), 1)])
        zs = zero_set(product(a, b))
        assert zs.is_exact
        assert sorted(zs.points, key=lambda p: p[0].turns()) == [
            (RationalTurns(1, 4), 3),
            (RationalTurns(1, 2), 1),
        ]

    def test_scaled_moves_zeros(self):
        g = Scaled(factored(1.0, [(RationalTurns(1, 4), 1)]), RationalTurns(1, 8))
        assert list(zero_set(g).points) == [(RationalTurns(1, 8), 1)]
        assert abs(evaluate(g, RationalTurns(1, 8))) < 1e-15

    def test_laurent_zeros_are_sampled(self):
        zs = zero_set(laurent({0: -1, 1: 1}))
        assert not zs.is_exact
        (a, m), = zs.points
        assert m == 1 and angles_equal(a, RationalTurns(0), 1e-9)

    def test_laurent_double_zero(self):
        zs = zero_set(laurent({0: 1, 1: 2, 2: 1}))  # (1 + z)^2
        (a, m), = zs.points
        assert m == 2 and angles_equal(a, RationalTurns(1, 2), 1e-6)
