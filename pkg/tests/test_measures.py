import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from equilab.measures import (AtomicMeasure, CircleMeasure, IfsMeasure, LiftedCircleMeasure,
                              ParaboloidMeasure, SegmentMeasure, SphereMeasure,
                              TorusOfRevolutionMeasure, decay_exponent_fit, fourier_monte_carlo,
                              fourier_transform, measure_from_dict, rotation_ifs, sierpinski_ifs)

freq = st.floats(-30, 30, allow_nan=False)


def test_circle_matches_bessel():
    m = CircleMeasure(0.7)
    xi = np.array([[3.1, -4.2], [0.0, 12.0], [25.0, 1.0]])
    r = np.linalg.norm(xi, axis=1)
    assert np.allclose(m.fourier(xi), special.j0(2 * np.pi * 0.7 * r), atol=1e-12)


def test_circle_center_phase():
    m = CircleMeasure(1.0, center=[0.3, -0.1])
    xi = np.array([2.0, 5.0])
    expected = np.exp(-2j * np.pi * xi @ [0.3, -0.1]) * special.j0(2 * np.pi * np.linalg.norm(xi))
    assert np.isclose(m.fourier(xi), expected, atol=1e-12)


def test_sphere_matches_sinc():
    m = SphereMeasure(1.0)
    xi = np.array([[0.3, 1.0, -2.0], [10.0, 0.0, 0.0]])
    x = 2 * np.pi * np.linalg.norm(xi, axis=1)
    assert np.allclose(m.fourier(xi), np.sin(x) / x, atol=1e-12)


def test_lifted_circle_matches_bessel_series():
    m = LiftedCircleMeasure()
    a, b, k = 1.3, -0.4, 2
    rho, phi = np.hypot(a, b), np.arctan2(b, a)
    expected = np.exp(-1j * k * phi) * (-1j) ** k * special.jv(k, 2 * np.pi * rho)
    # the helix (cos 2pi u, sin 2pi u, u) has transform sum over the angle
    val = m.fourier(np.array([a, b, k]))
    assert np.isclose(val, expected, atol=1e-11)


@pytest.mark.parametrize("m", [CircleMeasure(0.5), SphereMeasure(0.4), SegmentMeasure([1, 2]),
                               TorusOfRevolutionMeasure(0.5, 0.2), ParaboloidMeasure(1.0, 0.5),
                               sierpinski_ifs(), rotation_ifs(), LiftedCircleMeasure()])
def test_unit_mass_and_modulus(m):
    zero = np.zeros(m.dim)
    assert np.isclose(m.fourier(zero), 1.0, atol=1e-10)
    rng = np.random.default_rng(3)
    xi = rng.normal(scale=5, size=(6, m.dim))
    assert np.all(np.abs(m.fourier(xi)) <= 1 + 1e-9)


@given(freq, freq)
@settings(max_examples=30, deadline=None)
def test_conjugate_symmetry(a, b):
    m = CircleMeasure(0.6, center=[0.1, 0.2])
    xi = np.array([a, b])
    assert np.isclose(m.fourier(-xi), np.conj(m.fourier(xi)), atol=1e-10)


def test_segment_exact_vs_quadrature():
    m = SegmentMeasure([1.0, 2.0], origin=[0.2, 0.1])
    for xi in ([3.3, -0.7], [10.0, 4.0], [0.0, 0.0]):
        exact = fourier_transform(m, xi, "native").value
        quad = fourier_transform(m, xi, "quadrature")
        assert abs(exact - quad.value) < 1e-11


def test_segment_orthogonal_frequency_no_decay():
    m = SegmentMeasure([1, 2])
    for t in (1.0, 17.0, 999.0):
        assert np.isclose(abs(m.fourier(t * np.array([2.0, -1.0]))), 1.0, atol=1e-12)


def test_monte_carlo_route_agrees():
    m = TorusOfRevolutionMeasure(0.6, 0.25)
    xi = np.array([1.2, -0.5, 0.8])
    val, err = fourier_monte_carlo(m, xi, 200_000, seed=1)
    assert abs(val - m.fourier(xi)) < 5 * err


def test_ifs_moments_match_samples():
    m = rotation_ifs()
    x = m.sample(200_000, seed=2)
    assert np.allclose(x.mean(axis=0), m.mean, atol=5e-3)
    assert np.allclose(np.cov(x.T), m.cov, atol=5e-3)


def test_ifs_product_vs_monte_carlo():
    m = sierpinski_ifs()
    for xi in ([0.7, 0.2], [2.0, -1.0]):
        val, bound = m.fourier_product(np.array(xi), depth=12)
        mc, err = fourier_monte_carlo(m, xi, 200_000, seed=4)
        assert abs(val - mc) < 5 * err + bound


def test_atomic_measure_exact():
    m = AtomicMeasure([[0.0, 0.0], [0.5, 0.25]], [0.25, 0.75])
    xi = np.array([1.0, 2.0])
    assert np.isclose(m.fourier(xi), 0.25 + 0.75 * np.exp(-2j * np.pi * 1.0))


def test_registry_roundtrip():
    for m in (CircleMeasure(0.3, [0.1, 0.2]), SphereMeasure(0.5), SegmentMeasure([1, 3]),
              sierpinski_ifs(), AtomicMeasure([[0.1, 0.2]])):
        m2 = measure_from_dict(m.to_dict())
        xi = np.array([1.7] * m.dim)
        assert np.isclose(m2.fourier(xi), m.fourier(xi))
    with pytest.raises(ValueError):
        measure_from_dict({"type": "nope"})


def test_invalid_measures():
    with pytest.raises(ValueError):
        CircleMeasure(-1.0)
    with pytest.raises(ValueError):
        IfsMeasure([[[1.2, 0], [0, 0.5]]], [[0, 0]])
    with pytest.raises(ValueError):
        fourier_transform(CircleMeasure(1.0), [1, 0], method="bogus")


@pytest.mark.parametrize("m, direction, slope", [
    (CircleMeasure(1.0), [1.0, 0.3], -0.5),
    (SphereMeasure(1.0), [0.2, 1.0, -0.4], -1.0),
    (SegmentMeasure([1, 2]), [2.0, -1.0], 0.0),
])
def test_decay_exponents(m, direction, slope):
    t = np.logspace(1, 3, 60)
    fit = decay_exponent_fit(m, direction, t)
    assert abs(fit.slope - slope) < 0.1


def test_decay_fit_grid_checks():
    with pytest.raises(ValueError):
        decay_exponent_fit(CircleMeasure(1.0), [1, 0], np.linspace(1, 5, 20))
