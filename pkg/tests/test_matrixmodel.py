import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistshift.circlefn import RationalTurns, factored, laurent
from twistshift.diophantine import Convergent, RotationAngle, convergents
from twistshift.errors import ZeroEigenvalue
from twistshift.matrixmodel import (
    build_model,
    butterfly,
    clock_matrix,
    eigen_residual,
    eigenpairs_closed_form,
    harper_eigenvalues,
    harper_matrix,
    jacobi_eigenvalues,
    model_from_weights,
    pseudospectrum_grid,
    radius_high_precision,
    shift_matrix,
    sigma_min,
)


def dense(model):
    return model.matrix().toarray()


def test_clock_shift_commutation():
    p, q = 3, 7
    S, V = shift_matrix(q), clock_matrix(p, q)
    w = np.exp(2j * np.pi * p / q)
    np.testing.assert_allclose(V @ S, w * S @ V, atol=1e-14)


def test_example_z_at_half():
    m = build_model(laurent({1: 1.0}), Convergent(1, 2, 0.0))
    vals = [e.value for e in eigenpairs_closed_form(m)]
    assert vals == [1j, -1j]


def test_constant_weights_give_roots_of_unity():
    m = model_from_weights(np.full(5, 2.0))
    vals = np.array([e.value for e in eigenpairs_closed_form(m)])
    np.testing.assert_allclose(np.sort_complex(vals**5), np.full(5, 32.0 + 0j), atol=1e-11)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_closed_form_against_dense_eigvals(q, seed):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(q) + 1j * rng.standard_normal(q) + 0.5
    m = model_from_weights(w)
    mine = np.array([e.value for e in eigenpairs_closed_form(m)])
    ref = np.linalg.eigvals(dense(m))
    # match as multisets: every reference eigenvalue has a close partner
    scale = max(1.0, np.abs(ref).max())
    for r in ref:
        assert np.min(np.abs(mine - r)) < 1e-8 * scale
    assert abs(np.prod(np.abs(mine)) / np.prod(np.abs(w)) - 1) < 1e-9
    det = np.linalg.det(dense(m))
    assert abs(abs(det) - np.prod(np.abs(w))) < 1e-8 * np.prod(np.abs(w))


def test_residuals_random_models():
    rng = np.random.default_rng(7)
    for _ in range(20):
        q = int(rng.integers(1, 1025))
        w = rng.standard_normal(q) + 1j * rng.standard_normal(q) + 0.1
        m = model_from_weights(w)
        bound = 1e-12 * q * np.abs(w).max()
        for e in eigenpairs_closed_form(m)[:: max(1, q // 16)]:
            assert eigen_residual(m, e) <= bound


def test_nilpotent_model():
    m = model_from_weights([1.0, 0.0, 2.0])
    pairs = eigenpairs_closed_form(m)
    assert all(e.value == 0 for e in pairs)
    with pytest.raises(ZeroEigenvalue):
        eigen_residual(m, pairs[0])


def test_radius_high_precision_closed_form():
    # prod_k (2 + w^k) = 2^q - (-1)^q for w a primitive q-th root of unity
    f = laurent({0: 2.0, 1: 1.0})
    for c in convergents(RotationAngle.golden(), 12)[3:]:
        got = radius_high_precision(f, c)
        with mpmath.workdps(60 + c.q):
            want = (mpmath.mpf(2) ** c.q - (-1) ** c.q) ** (mpmath.mpf(1) / c.q)
            assert abs(got - want) < mpmath.mpf(10) ** (-(25 + c.q))


def test_exact_zero_weight():
    f = factored(1.0, [(RationalTurns(0), 1)])
    m = build_model(f, Convergent(5, 8, 0.0))
    assert m.weights[0] == 0 and m.degenerate and m.radius == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 60), st.integers(0, 2**32 - 1))
def test_sigma_min_against_dense_svd(q, seed):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(q) + 1j * rng.standard_normal(q)
    m = model_from_weights(w)
    lam = complex(*rng.uniform(-1.5, 1.5, 2))
    ref = np.linalg.svd(dense(m) - lam * np.eye(q), compute_uv=False).min()
    assert sigma_min(m, lam) == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_sigma_min_at_zero_exact():
    w = np.array([0.3, -2.0, 1j, 0.7 + 0.1j])
    m = model_from_weights(w)
    assert sigma_min(m, 0) == np.min(np.abs(w))
    assert sigma_min(m, 0, iterative=True) == pytest.approx(np.min(np.abs(w)), rel=1e-9)


def test_pseudospectrum_grid_matches_pointwise():
    rng = np.random.default_rng(3)
    w = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    m = model_from_weights(w)
    field = pseudospectrum_grid(m, (-1, 1), (-1, 1), (5, 4))
    assert field.sigma.shape == (4, 5) and field.converged.all()
    for i, y in enumerate(field.im):
        for j, x in enumerate(field.re):
            ref = np.linalg.svd(dense(m) - complex(x, y) * np.eye(24), compute_uv=False).min()
            assert field.sigma[i, j] == pytest.approx(ref, rel=1e-8, abs=1e-12)
    with pytest.raises(ValueError):
        pseudospectrum_grid(m, (-1, 1), (-1, 1), (513, 2))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_jacobi_against_eigvalsh(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    a = a + a.T
    np.testing.assert_allclose(jacobi_eigenvalues(a), np.linalg.eigvalsh(a), atol=1e-9 * max(1, np.abs(a).max()))


def test_harper_examples():
    q = 233
    c = next(c for c in convergents(RotationAngle.golden(), 20) if c.q == q)
    e = harper_eigenvalues(0.0, c)
    np.testing.assert_allclose(e, np.sort(2 * np.cos(2 * np.pi * np.arange(q) / q)), atol=1e-9)
    e = harper_eigenvalues(1.0, Convergent(1, 2, 0.0))
    np.testing.assert_allclose(e, [-2 * math.sqrt(2), 2 * math.sqrt(2)], atol=1e-12)


@pytest.mark.parametrize("p,q", [(1, 7), (3, 10), (5, 13)])
def test_harper_symmetry_and_trace(p, q):
    e = harper_eigenvalues(1.3, Convergent(p, q, 0.0))
    e2 = harper_eigenvalues(1.3, Convergent(q - p, q, 0.0))
    np.testing.assert_allclose(e, e2, atol=1e-10)
    assert np.sum(e) == pytest.approx(np.trace(harper_matrix(1.3, p, q)), abs=1e-9)
    np.testing.assert_allclose(e, np.linalg.eigvalsh(harper_matrix(1.3, p, q)), atol=1e-9)


def test_butterfly_rows():
    rows = butterfly(6)
    qs = {q for _, q, _ in rows}
    assert qs == set(range(1, 7))
    assert len(rows) == sum(q * sum(math.gcd(p, q) == 1 for p in range(q)) for q in range(1, 7))
