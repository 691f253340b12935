"""Probability measures on R^d: sampling and Fourier transforms.

The Fourier transform convention is

    mu_hat(xi) = integral of exp(-2 pi i xi . y) d mu(y).

Each measure has a native evaluation route (``fourier``), vectorized over
an array of frequencies with shape ``(..., d)``.  Curves and surfaces are
integrated numerically; segments and atomic measures have exact
expressions; self-affine measures are unrolled through their
self-similarity relation.  :func:`fourier_transform` adds the Monte Carlo
route and error reporting on top.

Measures serialize to JSON-friendly dictionaries::

    {"type": "circle", "radius": 1.0, "center": [0, 0]}
    {"type": "sphere", "dim": 3, "radius": 1.0, "center": [0, 0, 0]}
    {"type": "torus_of_revolution", "major": 2.0, "minor": 0.5, "center": [...]}
    {"type": "paraboloid", "curvature": 1.0, "radius": 1.0, "center": [...]}
    {"type": "segment", "v": [1, 2], "origin": [0, 0]}
    {"type": "lifted_circle"}
    {"type": "ifs", "A": [[[...]]], "b": [[...]], "p": [...]}
    {"type": "atomic", "points": [[...]], "weights": [...]}
"""

from dataclasses import dataclass

import numpy as np
from scipy import special

from . import _quad
from .exceptions import UnsupportedFrequency

TWO_PI = 2.0 * np.pi
MASS_TOL = 1e-10
MODULUS_SLACK = 1e-9
CHAOS_STEPS = 64
QUAD_TOL = 1e-12


def _as_freq(xi, dim):
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != dim:
        raise ValueError(f"frequency has dimension {xi.shape[-1]}, measure lives in R^{dim}")
    return xi


def _check_modulus(values):
    if np.any(np.abs(values) > 1.0 + MODULUS_SLACK):
        raise UnsupportedFrequency("Fourier transform exceeds 1 in modulus; quadrature failed")
    return values


@dataclass(frozen=True)
class FourierResult:
    """Value of a Fourier transform with its error estimate."""

    value: complex
    error: float
    method: str


class Measure:
    """Base class. Subclasses set ``dim`` and implement the hooks below."""

    dim = None
    kind = None

    def fourier(self, xi):
        """Native evaluation of mu_hat at frequencies of shape (..., d)."""
        xi = _as_freq(xi, self.dim)
        flat = xi.reshape(-1, self.dim)
        out = np.array([self._fourier_one(row) for row in flat], dtype=complex)
        return _check_modulus(out.reshape(xi.shape[:-1]))

    def _fourier_one(self, xi):
        raise NotImplementedError

    def sample(self, n, seed=None):
        if n < 1:
            raise ValueError("n must be positive")
        rng = np.random.default_rng(seed)
        return self._sample(int(n), rng)

    def _sample(self, n, rng):
        raise NotImplementedError

    def total_mass(self):
        return 1.0

    def to_dict(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


def _frame(dim, frame):
    if frame is None:
        frame = np.zeros((2, dim))
        frame[0, 0] = 1.0
        frame[1, 1] = 1.0
    frame = np.asarray(frame, dtype=float)
    if frame.shape != (2, dim):
        raise ValueError("frame must hold two vectors of the ambient dimension")
    if not np.allclose(frame @ frame.T, np.eye(2), atol=1e-12):
        raise ValueError("frame vectors must be orthonormal")
    return frame


class CircleMeasure(Measure):
    """Uniform measure on a circle, possibly embedded in R^d via a frame."""

    kind = "circle"

    def __init__(self, radius=1.0, center=None, frame=None, dim=2):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.dim = int(dim)
        self.center = np.zeros(self.dim) if center is None else np.asarray(center, float)
        self.frame = _frame(self.dim, frame)

    def _fourier_one(self, xi):
        a, b = self.radius * (self.frame @ xi)
        rho = np.hypot(a, b)
        phase = np.exp(-1j * TWO_PI * xi @ self.center)
        n0 = int(2 ** np.ceil(np.log2(TWO_PI * rho + 32)))

        def integrand(u):
            ang = TWO_PI * u
            return np.exp(-1j * TWO_PI * (a * np.cos(ang) + b * np.sin(ang)))

        val, _ = _quad.periodic_trapezoid(integrand, n=n0)
        return phase * val

    def _sample(self, n, rng):
        u = TWO_PI * rng.random(n)
        pts = np.cos(u)[:, None] * self.frame[0] + np.sin(u)[:, None] * self.frame[1]
        return self.center + self.radius * pts

    def to_dict(self):
        return {
            "type": self.kind,
            "radius": self.radius,
            "center": self.center.tolist(),
            "frame": self.frame.tolist(),
        }


class RevolutionMeasure(Measure):
    """Normalized surface measure on a hypersurface with rotational symmetry.

    The surface is described by a profile v -> (rho(v), z(v)) on [v0, v1]
    rotated about the last coordinate axis, with area density w(v) in the
    profile variable.  The angular integral is done analytically: for a
    circle of radius rho it contributes J0(2 pi rho |xi_perp|) in R^3, and
    the corresponding spherical-average kernel in higher dimension.
    Subclasses provide ``_profile``.
    """

    order = 16

    def __init__(self, center=None, dim=3):
        self.dim = int(dim)
        self.center = np.zeros(self.dim) if center is None else np.asarray(center, float)
        if self.center.shape != (self.dim,):
            raise ValueError("center has the wrong dimension")
        self._norm = None

    def _profile(self, v):
        """Return (rho, z, weight) at profile parameters v."""
        raise NotImplementedError

    def _kernel(self, x):
        # average of exp(-i x . e) over unit vectors e of the (dim-1)-plane
        m = self.dim - 1
        if m == 2:
            return special.j0(x)
        nu = 0.5 * m - 1.0
        safe = np.where(x == 0, 1.0, x)
        val = special.gamma(nu + 1.0) * (2.0 / safe) ** nu * special.jv(nu, safe)
        return np.where(x == 0, 1.0, val)

    def normalization(self):
        if self._norm is None:
            v0, v1 = self.interval
            val, _ = _quad.adaptive_composite(
                lambda v: self._profile(v)[2], v0, v1, panels=4, order=self.order
            )
            self._norm = float(val)
        return self._norm

    def _fourier_one(self, xi):
        perp = np.linalg.norm(xi[:-1])
        axial = xi[-1]
        v0, v1 = self.interval
        scale = self.extent * np.hypot(perp, axial)
        panels = max(4, int(2 * scale) + 4)

        def integrand(v):
            rho, z, w = self._profile(v)
            return w * np.exp(-1j * TWO_PI * axial * z) * self._kernel(TWO_PI * perp * rho)

        val, _ = _quad.adaptive_composite(integrand, v0, v1, panels=panels, order=self.order)
        return np.exp(-1j * TWO_PI * xi @ self.center) * val / self.normalization()

    def _sample(self, n, rng):
        v0, v1 = self.interval
        grid = np.linspace(v0, v1, 2049)
        wmax = 1.05 * np.max(self._profile(grid)[2])
        out = np.empty(0)
        while out.size < n:
            v = v0 + (v1 - v0) * rng.random(2 * n)
            keep = rng.random(2 * n) * wmax < self._profile(v)[2]
            out = np.concatenate([out, v[keep]])
        v = out[:n]
        rho, z, _ = self._profile(v)
        # uniform direction in the (dim-1)-plane
        g = rng.standard_normal((n, self.dim - 1))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        pts = np.concatenate([rho[:, None] * g, z[:, None]], axis=1)
        return self.center + pts


class SphereMeasure(RevolutionMeasure):
    """Normalized surface measure on the sphere S^{d-1} of given radius."""

    kind = "sphere"

    def __init__(self, radius=1.0, center=None, dim=3):
        if dim < 3:
            raise ValueError("use CircleMeasure for d = 2")
        if radius <= 0:
            raise ValueError("radius must be positive")
        super().__init__(center, dim)
        self.radius = float(radius)
        self.interval = (0.0, np.pi)
        self.extent = 2.0 * self.radius

    def _profile(self, v):
        r = self.radius
        return r * np.sin(v), r * np.cos(v), np.sin(v) ** (self.dim - 2)

    def to_dict(self):
        return {"type": self.kind, "dim": self.dim, "radius": self.radius,
                "center": self.center.tolist()}


class TorusOfRevolutionMeasure(RevolutionMeasure):
    """Normalized area measure on a torus of revolution in R^3."""

    kind = "torus_of_revolution"

    def __init__(self, major=2.0, minor=0.5, center=None):
        if not 0 < minor < major:
            raise ValueError("need 0 < minor < major")
        super().__init__(center, 3)
        self.major, self.minor = float(major), float(minor)
        self.interval = (0.0, TWO_PI)
        self.extent = 2.0 * (major + minor)

    def _profile(self, v):
        rho = self.major + self.minor * np.cos(v)
        return rho, self.minor * np.sin(v), rho * self.minor

    def to_dict(self):
        return {"type": self.kind, "major": self.major, "minor": self.minor,
                "center": self.center.tolist()}


class ParaboloidMeasure(RevolutionMeasure):
    """Area measure on the graph z = k |x|^2, |x| <= radius, in R^3."""

    kind = "paraboloid"

    def __init__(self, curvature=1.0, radius=1.0, center=None):
        if curvature <= 0 or radius <= 0:
            raise ValueError("curvature and radius must be positive")
        super().__init__(center, 3)
        self.curvature, self.radius = float(curvature), float(radius)
        self.interval = (0.0, self.radius)
        self.extent = 2.0 * (radius + curvature * radius**2)

    def _profile(self, v):
        k = self.curvature
        return v, k * v**2, v * np.sqrt(1.0 + 4.0 * k * k * v**2)

    def to_dict(self):
        return {"type": self.kind, "curvature": self.curvature, "radius": self.radius,
                "center": self.center.tolist()}


class SegmentMeasure(Measure):
    """Uniform measure on the open segment origin + (0, 1) v."""

    kind = "segment"

    def __init__(self, v, origin=None):
        self.v = np.asarray(v, dtype=float)
        if self.v.ndim != 1 or not np.any(self.v):
            raise ValueError("v must be a nonzero vector")
        self.dim = self.v.size
        self.origin = np.zeros(self.dim) if origin is None else np.asarray(origin, float)

    def fourier(self, xi):
        xi = _as_freq(xi, self.dim)
        a = xi @ self.v
        # exp(-i pi a) sinc(a) is exactly 1 at a = 0
        val = np.exp(-1j * np.pi * a) * np.sinc(a)
        if np.any(self.origin):
            val = val * np.exp(-1j * TWO_PI * (xi @ self.origin))
        return val

    def _sample(self, n, rng):
        return self.origin + rng.random(n)[:, None] * self.v

    def to_dict(self):
        return {"type": self.kind, "v": self.v.tolist(), "origin": self.origin.tolist()}


class LiftedCircleMeasure(Measure):
    """Uniform measure on the helix u -> (cos 2 pi u, sin 2 pi u, u), u in [0, 1]."""

    kind = "lifted_circle"
    dim = 3

    def _fourier_one(self, xi):
        a, b, c = xi
        rho = np.hypot(a, b)

        def integrand(u):
            ang = TWO_PI * u
            return np.exp(-1j * TWO_PI * (a * np.cos(ang) + b * np.sin(ang) + c * u))

        if float(c).is_integer():
            # periodic integrand: trapezoid converges spectrally
            n0 = int(2 ** np.ceil(np.log2(TWO_PI * rho + abs(c) + 32)))
            return _quad.periodic_trapezoid(integrand, n=n0)[0]
        panels = max(4, int(2 * (2 * rho + abs(c))) + 4)
        return _quad.adaptive_composite(integrand, 0.0, 1.0, panels=panels)[0]

    def _sample(self, n, rng):
        u = rng.random(n)
        return np.stack([np.cos(TWO_PI * u), np.sin(TWO_PI * u), u], axis=1)

    def to_dict(self):
        return {"type": self.kind}


class IfsMeasure(Measure):
    """Self-affine measure of the IFS x -> A_j x + b_j with weights p_j."""

    kind = "ifs"

    def __init__(self, A, b, p=None):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        m = self.A.shape[0]
        if self.A.ndim != 3 or self.A.shape[1] != self.A.shape[2]:
            raise ValueError("A must have shape (m, d, d)")
        self.dim = self.A.shape[1]
        if self.b.shape != (m, self.dim):
            raise ValueError("b must have shape (m, d)")
        self.p = np.full(m, 1.0 / m) if p is None else np.asarray(p, dtype=float)
        if self.p.shape != (m,) or np.any(self.p <= 0) or abs(self.p.sum() - 1) > 1e-12:
            raise ValueError("p must be a positive probability vector")
        norms = np.linalg.norm(self.A, ord=2, axis=(1, 2))
        if np.any(norms >= 1):
            raise ValueError("every map must be a strict contraction")
        self.contraction = float(norms.max())
        self.mean, self.cov = self._moments()

    def _moments(self):
        d = self.dim
        eye = np.eye(d)
        mean = np.linalg.solve(eye - np.einsum("j,jab->ab", self.p, self.A),
                               self.p @ self.b)
        rhs = np.zeros((d, d))
        for pj, Aj, bj in zip(self.p, self.A, self.b):
            Am = Aj @ mean
            rhs += pj * (np.outer(Am, bj) + np.outer(bj, Am) + np.outer(bj, bj))
        kron = np.einsum("j,jab,jcd->acbd", self.p, self.A, self.A).reshape(d * d, d * d)
        second = np.linalg.solve(np.eye(d * d) - kron, rhs.ravel()).reshape(d, d)
        return mean, second - np.outer(mean, mean)

    def bounding_radius(self):
        return float(np.max(np.linalg.norm(self.b, axis=1)) / (1.0 - self.contraction))

    def fourier_product(self, xi, depth=12):
        """Unroll the self-similarity relation ``depth`` times.

        Leaves use the Gaussian approximation built from the exact mean and
        covariance.  Returns (value, truncation bound).
        """
        if depth < 1:
            raise ValueError("depth must be positive")
        xi = np.asarray(xi, float).reshape(1, self.dim)
        weights = np.ones(1, dtype=complex)
        for _ in range(depth):
            phase = np.exp(-1j * TWO_PI * (xi @ self.b.T))
            weights = (weights[:, None] * self.p[None, :] * phase).ravel()
            xi = np.einsum("jba,nb->nja", self.A, xi).reshape(-1, self.dim)
        leaf = np.exp(
            -1j * TWO_PI * (xi @ self.mean)
            - 2.0 * np.pi**2 * np.einsum("na,ab,nb->n", xi, self.cov, xi)
        )
        value = complex(weights @ leaf)
        # every leaf frequency is at most contraction**depth * |xi|
        eta = float(np.max(np.linalg.norm(xi, axis=1)))
        # leaf error: |E e^{-2 pi i eta.(x - m)} - gaussian| is at most third order
        bound = min(2.0, (TWO_PI * eta * 2.0 * self.bounding_radius()) ** 3 / 6.0)
        return value, bound

    def fourier(self, xi, depth=12):
        xi = _as_freq(xi, self.dim)
        flat = xi.reshape(-1, self.dim)
        out = np.array([self.fourier_product(row, depth)[0] for row in flat])
        return _check_modulus(out.reshape(xi.shape[:-1]))

    def _sample(self, n, rng):
        # independent chains from the origin; the transient is below rho^64
        x = np.zeros((n, self.dim))
        for _ in range(CHAOS_STEPS):
            j = rng.choice(self.p.size, size=n, p=self.p)
            x = np.einsum("nab,nb->na", self.A[j], x) + self.b[j]
        return x

    def to_dict(self):
        return {"type": self.kind, "A": self.A.tolist(), "b": self.b.tolist(),
                "p": self.p.tolist()}


class AtomicMeasure(Measure):
    """Finite weighted sum of point masses."""

    kind = "atomic"

    def __init__(self, points, weights=None):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.dim = self.points.shape[1]
        k = self.points.shape[0]
        self.weights = np.full(k, 1.0 / k) if weights is None else np.asarray(weights, float)
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1) > 1e-12:
            raise ValueError("weights must be a probability vector")

    def fourier(self, xi):
        xi = _as_freq(xi, self.dim)
        return np.exp(-1j * TWO_PI * xi @ self.points.T) @ self.weights

    def _sample(self, n, rng):
        idx = rng.choice(self.weights.size, size=n, p=self.weights)
        return self.points[idx]

    def to_dict(self):
        return {"type": self.kind, "points": self.points.tolist(),
                "weights": self.weights.tolist()}


def sierpinski_ifs():
    """Planar Sierpinski-type IFS with equal weights (illustrative preset)."""
    A = np.repeat(0.5 * np.eye(2)[None], 3, axis=0)
    b = np.array([[0.0, 0.0], [0.5, 0.0], [0.25, np.sqrt(3) / 4]])
    return IfsMeasure(A, b)


def rotation_ifs(angle=0.7, ratio=0.45):
    """Planar IFS whose maps include an irrational rotation (illustrative preset)."""
    c, s = np.cos(angle), np.sin(angle)
    rot = ratio * np.array([[c, -s], [s, c]])
    A = np.stack([rot, ratio * np.eye(2), rot.T])
    b = np.array([[0.0, 0.0], [0.5, 0.1], [0.1, 0.5]])
    return IfsMeasure(A, b, [0.3, 0.3, 0.4])


def _circle_dim(d):
    if d.get("center") is not None:
        return len(d["center"])
    if d.get("frame") is not None:
        return len(d["frame"][0])
    return d.get("dim", 2)


_REGISTRY = {
    "circle": lambda d: CircleMeasure(d.get("radius", 1.0), d.get("center"), d.get("frame"),
                                      _circle_dim(d)),
    "sphere": lambda d: SphereMeasure(d.get("radius", 1.0), d.get("center"), d.get("dim", 3)),
    "torus_of_revolution": lambda d: TorusOfRevolutionMeasure(d.get("major", 2.0),
                                                              d.get("minor", 0.5), d.get("center")),
    "paraboloid": lambda d: ParaboloidMeasure(d.get("curvature", 1.0), d.get("radius", 1.0),
                                              d.get("center")),
    "segment": lambda d: SegmentMeasure(d["v"], d.get("origin")),
    "lifted_circle": lambda d: LiftedCircleMeasure(),
    "ifs": lambda d: IfsMeasure(d["A"], d["b"], d.get("p")),
    "atomic": lambda d: AtomicMeasure(d["points"], d.get("weights")),
    "sierpinski": lambda d: sierpinski_ifs(),
    "rotation_ifs": lambda d: rotation_ifs(d.get("angle", 0.7), d.get("ratio", 0.45)),
}


def measure_from_dict(spec):
    """Build a measure from its JSON dictionary."""
    kind = spec.get("type")
    if kind not in _REGISTRY:
        raise ValueError(f"unknown measure type {kind!r}")
    return _REGISTRY[kind](spec)


def fourier_monte_carlo(m, xi, n_samples=100_000, seed=None):
    """Empirical transform from i.i.d. samples, with its standard error."""
    if n_samples < 1000:
        raise ValueError("Monte Carlo needs at least 1000 samples")
    xi = _as_freq(xi, m.dim)
    pts = m.sample(n_samples, seed)
    vals = np.exp(-1j * TWO_PI * pts @ xi)
    err = np.sqrt((vals.real.var() + vals.imag.var()) / n_samples)
    return complex(vals.mean()), float(err)


def fourier_transform(m, xi, method="native", order=16, n_samples=100_000, seed=None, depth=12):
    """Evaluate mu_hat(xi) by the requested route.

    ``method`` is one of ``"native"``, ``"quadrature"``, ``"monte_carlo"``
    or ``"ifs_product"``.  Returns a :class:`FourierResult`.
    """
    xi = _as_freq(xi, m.dim)
    if method == "monte_carlo":
        val, err = fourier_monte_carlo(m, xi, n_samples, seed)
        return FourierResult(val, err, method)
    if method == "ifs_product" or (method in ("native", "quadrature") and isinstance(m, IfsMeasure)):
        if not isinstance(m, IfsMeasure):
            raise ValueError("ifs_product applies to IFS measures only")
        if depth < 8:
            raise ValueError("ifs depth must be at least 8")
        val, bound = m.fourier_product(xi, depth)
        return FourierResult(val, bound, "ifs_product")
    if method not in ("native", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if order < 8:
        raise ValueError("quadrature order must be at least 8")
    if isinstance(m, SegmentMeasure) and method == "quadrature":
        x, w = _quad.gauss_legendre(order)
        a = xi @ m.v

        def integrand(s):
            return np.exp(-1j * TWO_PI * (a * s + xi @ m.origin))

        panels = max(1, int(abs(a)) + 1)
        val, err = _quad.adaptive_composite(integrand, 0.0, 1.0, panels=panels, order=order)
        return FourierResult(complex(val), float(err), method)
    val = complex(m.fourier(xi))
    # quadrature routes stop once successive refinements agree to QUAD_TOL
    return FourierResult(val, QUAD_TOL, method)


def decay_exponent_fit(m, direction, t_grid, window=5):
    """Slope of log|mu_hat(t direction)| against log t.

    Oscillating transforms are fitted through their windowed maximum; the
    choice is recorded in ``fit.window["envelope"]``.
    """
    from .fitting import fit_decay

    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 8:
        raise ValueError("need at least 8 grid points")
    if t_grid.max() / t_grid.min() < 100:
        raise ValueError("grid must span at least two decades")
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    vals = m.fourier(t_grid[:, None] * direction[None, :])
    fit = fit_decay(t_grid, vals, mode="loglog", window=window)
    fit.series = vals
    return fit
