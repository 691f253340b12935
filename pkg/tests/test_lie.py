import numpy as np
import pytest

from equilab.lie import (FourierMode, GaussianEnvelope, HyperbolicBump, PowerEnvelope,
                         ProductFunction, VonMisesFiber, bump_profile)
from equilab.sl2 import THETA, U, V, X, LieVector, exp_lie, from_iwasawa

FUNCS = [
    ProductFunction(GaussianEnvelope(0.2, 1.3, 0.8), FourierMode(2)),
    ProductFunction(HyperbolicBump(0.1 + 1.2j, 1.5), VonMisesFiber(1.3, 0.4)),
    ProductFunction(PowerEnvelope(0.7), FourierMode(-1)),
]
DIRS = [X, U, V, THETA, LieVector(0.3, -0.8, 1.1)]


def point(rng):
    return from_iwasawa(0.1 + 0.3 * rng.normal(), np.exp(0.2 + 0.2 * rng.normal()), rng.uniform(0, 6))


@pytest.mark.parametrize("h", FUNCS)
@pytest.mark.parametrize("Z", DIRS)
def test_first_derivative_finite_difference(h, Z, rng):
    g = point(rng)
    eps = 1e-5
    fd = (h(g @ exp_lie(Z, eps)) - h(g @ exp_lie(Z, -eps))) / (2 * eps)
    assert abs(h.lie(Z, g) - fd) < 1e-7 * (1 + abs(fd))


@pytest.mark.parametrize("h", FUNCS)
@pytest.mark.parametrize("Z1, Z2", [(X, X), (U, X), (U, U), (THETA, U), (DIRS[4], V)])
def test_second_derivative_finite_difference(h, Z1, Z2, rng):
    g = point(rng)
    eps = 1e-5
    # Z1 (Z2 h)(g) = d/du (Z2 h)(g exp(u Z1))
    fd = (h.lie(Z2, g @ exp_lie(Z1, eps)) - h.lie(Z2, g @ exp_lie(Z1, -eps))) / (2 * eps)
    assert abs(h.lie2(Z1, Z2, g) - fd) < 1e-6 * (1 + abs(fd))


def test_casimir_on_power_function(rng):
    # -X^2 + X - UV applied to y^s gives s (1 - s) y^s
    s = 0.3 + 0.9j
    h = ProductFunction(PowerEnvelope(s), FourierMode(0))
    g = point(rng)
    uv = h.lie2(U, U, g) - h.lie2(U, THETA, g)  # V = U - Theta
    cas = -h.lie2(X, X, g) + h.lie(X, g) - uv
    assert np.isclose(cas, s * (1 - s) * h(g), rtol=1e-10)


def test_theta_eigenrelation(rng):
    h = ProductFunction(GaussianEnvelope(), FourierMode(3))
    g = point(rng)
    assert np.isclose(h.lie(THETA, g), 3j * h(g))
    assert np.isclose(h(g @ exp_lie(THETA, 0.7)), np.exp(2.1j) * h(g))


def test_bump_profile_support_and_derivative():
    w = np.array([0.0, 0.5, 0.999, 1.0, 1.5])
    b, b1, _ = bump_profile(w)
    assert b[0] == 1.0 and np.all(b[3:] == 0)
    eps = 1e-6
    fd = (bump_profile(0.5 + eps)[0] - bump_profile(0.5 - eps)[0]) / (2 * eps)
    assert np.isclose(b1[1], fd, rtol=1e-6)


def test_bump_integral_by_polar_quadrature():
    from scipy.integrate import quad

    bump = HyperbolicBump(0.4 + 2j, 1.2)
    # polar coordinates around the center: area element 2 pi sinh(rho) d rho
    val, _ = quad(lambda r: 2 * np.pi * np.sinh(r) * bump_profile((np.cosh(r) - 1) * bump.scale)[0],
                  0, 1.2, epsabs=1e-13)
    assert np.isclose(bump.integral(), val, rtol=1e-10)


def test_von_mises_mean():
    from scipy.integrate import quad

    fib = VonMisesFiber(2.0, 0.3)
    val, _ = quad(lambda th: fib.jet(th)[0], 0, np.pi)
    assert np.isclose(fib.mean(), val / np.pi)
