import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equilab.fuchsian import (FuchsianGroup, base_point, cell_histogram, cell_index, cell_masses,
                              distance_to_i, flow_reduced, geodesic_circle_points, total_variation)
from equilab.sl2 import X, exp_lie, from_iwasawa, hyperbolic_distance, inverse


def test_bolza_data(bolza):
    assert bolza.n_generators == 8
    assert np.allclose(np.linalg.det(bolza.generators), 1.0)
    assert bolza.relator_residual() < 1e-9
    for j, k in enumerate(bolza.inverse_of):
        assert np.allclose(bolza.generators[j] @ bolza.generators[k], np.eye(2), atol=1e-12)
    assert np.isclose(np.cosh(bolza.inradius), 1 + np.sqrt(2))
    assert np.isclose(np.cosh(bolza.circumradius), 3 + 2 * np.sqrt(2))
    assert np.isclose(bolza.area, 4 * np.pi)


def test_side_pairings_move_i_twice_inradius(bolza):
    d = distance_to_i(bolza.generators)
    assert np.allclose(d, 2 * bolza.inradius)


def test_bad_generators_rejected():
    with pytest.raises(ValueError):
        FuchsianGroup([np.eye(2)])
    with pytest.raises(ValueError):
        FuchsianGroup([np.diag([2.0, 1.0])])


@given(st.floats(-3, 3), st.floats(0.05, 20), st.floats(0, 6.3))
@settings(max_examples=40, deadline=None)
def test_reduction_lands_in_domain(x, y, th):
    group = FuchsianGroup.bolza()
    g = from_iwasawa(x, y, th)
    red = group.reduce(g)
    assert distance_to_i(red.matrix) <= group.circumradius + 1e-9
    assert group.in_domain(red.base)[0]
    # the word recovers the original element
    m = np.eye(2)
    for j in red.word:
        m = group.generators[j] @ m
    assert np.allclose(m @ g, red.matrix, atol=1e-8 * np.abs(g).max() ** 2)


def test_batch_matches_single(bolza, rng):
    g = from_iwasawa(rng.normal(size=20), np.exp(rng.normal(size=20)), rng.uniform(0, 6, 20))
    batch = bolza.reduce_batch(g)
    single = np.array([bolza.reduce(x).matrix for x in g])
    assert np.allclose(batch, single)


def test_reduction_is_group_invariant(bolza, rng):
    g = from_iwasawa(0.3, 0.8, 1.0)
    for gen in bolza.generators:
        assert np.allclose(bolza.reduce(gen @ g).matrix, bolza.reduce(g).matrix, atol=1e-9)


def test_elements_within_contains_generators(bolza):
    els = bolza.elements_within(2 * bolza.inradius + 1e-9)
    assert len(els) == 9  # identity plus the eight side pairings


def test_haar_sample_in_domain_and_uniform(bolza):
    g = bolza.sample_haar(20000, seed=1)
    z = base_point(g)
    assert np.all(bolza.in_domain(z))
    # fraction inside the inner disk cosh(d) < 2 has area 2 pi / 4 pi
    inner = np.mean(np.cosh(hyperbolic_distance(z, 1j)) < 2)
    assert abs(inner - 0.5) < 0.02


def test_cell_masses_and_haar_histogram(bolza):
    masses = cell_masses(bolza)
    assert np.isclose(masses.sum(), 1.0)
    assert np.allclose(masses, 1 / 64)
    hist = cell_histogram(bolza.sample_haar(100000, seed=2))
    assert total_variation(hist, masses) < 0.03


def test_cell_index_range(bolza):
    idx = cell_index(bolza.sample_haar(1000, seed=3))
    assert idx.min() >= 0 and idx.max() < 64


def test_flow_reduced_matches_unreduced(bolza):
    g = from_iwasawa(0.2, 1.1, 0.4)
    a = flow_reduced(g, 5.5, bolza)
    b = bolza.reduce_batch(g @ exp_lie(X, 5.5))
    assert np.allclose(a, b, atol=1e-9)


def test_bundle_observable_is_invariant(bolza, bundle, rng):
    g = from_iwasawa(rng.normal(size=10) * 0.5, np.exp(rng.normal(size=10) * 0.5), rng.uniform(0, 6, 10))
    base = bundle(g)
    for gen in bolza.generators:
        assert np.allclose(bundle(gen @ g), base, atol=1e-12)


def test_bundle_mean_against_haar(bolza, bundle):
    vals = bundle(bolza.sample_haar(100000, seed=7))
    se = vals.real.std() / np.sqrt(vals.size)
    assert abs(vals.mean().real - bundle.mean()) < 4 * se


def test_bundle_derivatives_finite_difference(bundle):
    g = from_iwasawa(0.25, 1.3, 0.2)
    eps = 1e-5
    fd = (bundle(g @ exp_lie(X, eps)) - bundle(g @ exp_lie(X, -eps))) / (2 * eps)
    assert abs(bundle.lie(X, g) - fd) < 1e-7


def test_geodesic_circle_points_shape(bolza):
    s = np.linspace(0, np.pi, 50)
    g = geodesic_circle_points(from_iwasawa(0, 1, 0), 3.0, s, bolza)
    assert g.shape == (50, 2, 2)
    assert np.all(bolza.in_domain(base_point(g)))
    with pytest.raises(ValueError):
        geodesic_circle_points(np.eye(2), -1.0, s, bolza)


def test_inverse_relation(bolza):
    g = from_iwasawa(0.4, 2.0, 0.0)
    assert np.allclose(inverse(g) @ g, np.eye(2))
