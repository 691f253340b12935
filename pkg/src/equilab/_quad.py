"""Quadrature helpers shared by the measure and translate modules."""

import numpy as np

from .exceptions import UnsupportedFrequency

_GL_CACHE = {}


def gauss_legendre(order):
    """Nodes and weights on [0, 1]."""
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[order]


def composite_nodes(a, b, panels, order):
    """Composite Gauss-Legendre nodes/weights on [a, b]."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    h = np.diff(edges)
    nodes = (edges[:-1, None] + h[:, None] * x[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return nodes, weights


def adaptive_composite(func, a, b, panels=4, order=16, tol=1e-12, max_panels=2**17):
    """Integrate ``func`` (vectorized in its argument) by panel doubling.

    Returns (value, error estimate).  ``func`` may return arrays with extra
    trailing axes; the integral is taken along the node axis (axis 0).
    """
    nodes, weights = composite_nodes(a, b, panels, order)
    prev = np.tensordot(weights, func(nodes), axes=(0, 0))
    while True:
        panels *= 2
        if panels > max_panels:
            raise UnsupportedFrequency(
                f"composite quadrature did not converge with {max_panels} panels"
            )
        nodes, weights = composite_nodes(a, b, panels, order)
        cur = np.tensordot(weights, func(nodes), axes=(0, 0))
        err = np.max(np.abs(cur - prev))
        if err <= tol * max(1.0, float(np.max(np.abs(cur)))):
            return cur, err
        prev = cur


def periodic_trapezoid(func, n=32, tol=1e-13, max_n=2**22):
    """Mean of a 1-periodic function over [0, 1) with point doubling."""
    u = np.arange(n) / n
    prev = np.mean(func(u), axis=0)
    while True:
        # reuse old nodes: the new ones are the midpoints
        mid = (np.arange(n) + 0.5) / n
        cur = 0.5 * (prev + np.mean(func(mid), axis=0))
        n *= 2
        err = np.max(np.abs(cur - prev))
        if err <= tol:
            return cur, err
        if n > max_n:
            raise UnsupportedFrequency(f"trapezoid rule did not converge with {max_n} nodes")
        prev = cur
