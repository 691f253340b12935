import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from equilab.sl2 import (THETA, U, V, X, R, LieVector, adjoint, as_sl2, bracket, cayley, exp_lie,
                         from_iwasawa, hyperbolic_distance, hyperbolic_homothety, inverse,
                         inverse_cayley, iwasawa, moebius, renormalize)

coef = st.floats(-3, 3, allow_nan=False)
lie = st.builds(LieVector, coef, coef, coef)


def random_sl2(rng):
    return from_iwasawa(rng.normal(), np.exp(rng.normal()), rng.uniform(0, 2 * np.pi))


def test_basis_matrices():
    assert np.allclose(X.matrix, [[0.5, 0], [0, -0.5]])
    assert np.allclose(U.matrix, [[0, 1], [0, 0]])
    assert np.allclose(V.matrix, [[0, 0], [1, 0]])
    assert np.allclose(THETA.matrix, [[0, 1], [-1, 0]])
    assert np.allclose(R.matrix, [[0, 1], [1, 0]])


def test_xtr_coordinates_roundtrip():
    W = LieVector(0.3, -1.2, 0.7)
    assert W.alpha == 0.3
    assert np.isclose(W.beta, (-1.2 - 0.7) / 2)
    assert np.isclose(W.gamma, (-1.2 + 0.7) / 2)
    back = LieVector.from_xtr(*W.xtr)
    assert np.allclose(back.coefficients, W.coefficients)


@given(lie, st.floats(-2, 2))
@settings(max_examples=60, deadline=None)
def test_exp_matches_expm(W, s):
    assert np.allclose(exp_lie(W, s), expm(s * W.matrix), atol=1e-10, rtol=1e-10)


def test_exp_parabolic_branch():
    W = LieVector(0.0, 1.0, 1e-13)
    assert np.allclose(exp_lie(W, 2.0), expm(2.0 * W.matrix), atol=1e-14)


def test_exp_vectorized_det_one():
    g = exp_lie(LieVector(0.4, -0.2, 1.3), np.linspace(-3, 3, 11))
    assert g.shape == (11, 2, 2)
    assert np.allclose(np.linalg.det(g), 1.0, atol=1e-12)


@given(lie, lie)
@settings(max_examples=40, deadline=None)
def test_bracket_antisymmetric(A, B):
    assert np.allclose(bracket(A, B).coefficients, -bracket(B, A).coefficients, atol=1e-12)


@given(lie, lie, lie)
@settings(max_examples=40, deadline=None)
def test_jacobi_identity(A, B, C):
    total = (bracket(A, bracket(B, C)) + bracket(B, bracket(C, A)) + bracket(C, bracket(A, B)))
    assert np.allclose(total.coefficients, 0.0, atol=1e-10)


def test_adjoint_of_exponential_is_exponential_of_ad(rng):
    W, Z = LieVector(*rng.normal(size=3)), LieVector(*rng.normal(size=3))
    t = 0.7
    lhs = adjoint(exp_lie(W, t), Z).matrix
    rhs = expm(t * W.matrix) @ Z.matrix @ expm(-t * W.matrix)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_inverse_and_renormalize(rng):
    g = random_sl2(rng)
    assert np.allclose(g @ inverse(g), np.eye(2), atol=1e-12)
    assert np.isclose(np.linalg.det(renormalize(1.0000001 * g)), 1.0)
    with pytest.raises(ValueError):
        as_sl2(np.diag([2.0, 1.0]))


@given(st.floats(-3, 3), st.floats(0.05, 20), st.floats(-np.pi, np.pi))
@settings(max_examples=60, deadline=None)
def test_iwasawa_roundtrip(x, y, th):
    g = from_iwasawa(x, y, th)
    x2, y2, th2 = iwasawa(g)
    assert np.allclose([x2, y2], [x, y], rtol=1e-9, atol=1e-9)
    assert np.isclose(np.angle(np.exp(1j * (th2 - th))), 0.0, atol=1e-9)


def test_moebius_is_an_action(rng):
    g, h = random_sl2(rng), random_sl2(rng)
    z = 0.3 + 1.7j
    assert np.isclose(moebius(g @ h, z), moebius(g, moebius(h, z)))
    assert np.isclose(moebius(g, 1j), complex(iwasawa(g)[0], iwasawa(g)[1]))


def test_moebius_rejects_bad_points():
    with pytest.raises(ValueError):
        moebius(np.eye(2), -1j)
    with pytest.raises(ValueError):
        moebius(np.eye(2), complex("nan"))


def test_distance_invariant(rng):
    g = random_sl2(rng)
    z1, z2 = 0.2 + 0.5j, -1.0 + 3.0j
    d = hyperbolic_distance(z1, z2)
    assert np.isclose(d, hyperbolic_distance(moebius(g, z1), moebius(g, z2)))
    assert np.isclose(hyperbolic_distance(1j, np.exp(2.0) * 1j), 2.0)


def test_cayley_roundtrip():
    z = np.array([0.3 + 2j, -1 + 0.1j])
    assert np.allclose(inverse_cayley(cayley(z, 0.5 + 1j), 0.5 + 1j), z)
    assert abs(cayley(0.5 + 1j, 0.5 + 1j)) < 1e-15


def test_homothety_scales_distance():
    x0, y = 0.1 + 1.2j, 1.5 + 0.4j
    z = hyperbolic_homothety(x0, 2.5, y)
    assert np.isclose(hyperbolic_distance(x0, z), 2.5 * hyperbolic_distance(x0, y))
