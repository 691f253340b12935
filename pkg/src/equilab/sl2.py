"""SL(2,R), its Lie algebra, and the action on the upper half-plane.

Group elements are plain ``numpy`` arrays of shape ``(..., 2, 2)``; every
function broadcasts over leading axes.  Points of the upper half-plane are
complex numbers (or complex arrays) with positive imaginary part.

Lie algebra elements are :class:`LieVector` values, stored by their
coefficients in the basis

    X = [[1/2, 0], [0, -1/2]],  U = [[0, 1], [0, 0]],  V = [[0, 0], [1, 0]]

and also exposed in the basis {X, Theta, R} with
Theta = [[0, 1], [-1, 0]] and R = [[0, 1], [1, 0]].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DET_TOL = 1e-12
PARABOLIC_TOL = 1e-10

__all__ = [
    "LieVector",
    "X",
    "U",
    "V",
    "THETA",
    "R",
    "identity",
    "as_sl2",
    "renormalize",
    "compose",
    "inverse",
    "exp_lie",
    "adjoint",
    "bracket",
    "moebius",
    "hyperbolic_distance",
    "hyperbolic_homothety",
    "iwasawa",
    "from_iwasawa",
    "cayley",
    "inverse_cayley",
]


@dataclass(frozen=True)
class LieVector:
    """Element aX + bU + cV of sl(2,R)."""

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0

    @classmethod
    def from_xtr(cls, alpha: float, beta: float, gamma: float) -> "LieVector":
        """Build alpha X + beta Theta + gamma R."""
        return cls(alpha, beta + gamma, gamma - beta)

    @classmethod
    def from_matrix(cls, m) -> "LieVector":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0] - m[1, 1]), float(m[0, 1]), float(m[1, 0]))

    @property
    def alpha(self) -> float:
        return self.a

    @property
    def beta(self) -> float:
        return 0.5 * (self.b - self.c)

    @property
    def gamma(self) -> float:
        return 0.5 * (self.b + self.c)

    @property
    def xtr(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[0.5 * self.a, self.b], [self.c, -0.5 * self.a]])

    def __add__(self, other: "LieVector") -> "LieVector":
        return LieVector(self.a + other.a, self.b + other.b, self.c + other.c)

    def __sub__(self, other: "LieVector") -> "LieVector":
        return LieVector(self.a - other.a, self.b - other.b, self.c - other.c)

    def __mul__(self, s: float) -> "LieVector":
        return LieVector(s * self.a, s * self.b, s * self.c)

    __rmul__ = __mul__

    def __neg__(self) -> "LieVector":
        return LieVector(-self.a, -self.b, -self.c)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))


X = LieVector(1.0, 0.0, 0.0)
U = LieVector(0.0, 1.0, 0.0)
V = LieVector(0.0, 0.0, 1.0)
THETA = LieVector.from_xtr(0.0, 1.0, 0.0)
R = LieVector.from_xtr(0.0, 0.0, 1.0)


def identity() -> np.ndarray:
    return np.eye(2)


def _det(g: np.ndarray) -> np.ndarray:
    return g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]


def renormalize(g, tol: float = DET_TOL) -> np.ndarray:
    """Rescale by sqrt(det) wherever the determinant drifted beyond ``tol``."""
    g = np.asarray(g, dtype=float)
    det = _det(g)
    if np.any(det <= 0):
        raise ValueError("matrix with non-positive determinant is not in SL(2,R)")
    drift = np.abs(det - 1.0) > tol
    if not np.any(drift):
        return g
    scale = np.where(drift, 1.0 / np.sqrt(det), 1.0)
    return g * scale[..., None, None]


def as_sl2(g, tol: float = 1e-8) -> np.ndarray:
    """Validate an (array of) 2x2 matrices and snap them onto det = 1."""
    g = np.asarray(g, dtype=float)
    if g.shape[-2:] != (2, 2):
        raise ValueError(f"expected trailing shape (2, 2), got {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValueError("non-finite matrix entries")
    if np.any(np.abs(_det(g) - 1.0) > tol):
        raise ValueError("determinant differs from 1")
    return renormalize(g)


def compose(*gs) -> np.ndarray:
    """Product g1 g2 ... gn with determinant renormalization."""
    out = np.asarray(gs[0], dtype=float)
    for g in gs[1:]:
        out = out @ np.asarray(g, dtype=float)
    return renormalize(out)


def inverse(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    inv = np.empty_like(g)
    inv[..., 0, 0] = g[..., 1, 1]
    inv[..., 1, 1] = g[..., 0, 0]
    inv[..., 0, 1] = -g[..., 0, 1]
    inv[..., 1, 0] = -g[..., 1, 0]
    return inv


def exp_lie(W: LieVector, s=1.0) -> np.ndarray:
    """exp(sW) in closed form.

    For traceless M one has M^2 = delta I with delta = -det M, so
    exp(M) = C(delta) I + S(delta) M where C, S are cosh/sinh-type even
    functions of sqrt(delta).  Near delta = 0 their Taylor series in delta
    are used (the parabolic branch).
    """
    s = np.asarray(s, dtype=float)
    m = W.matrix
    delta = s**2 * ((0.5 * W.a) ** 2 + W.b * W.c)
    cpart = np.empty_like(delta)
    spart = np.empty_like(delta)
    hyp = delta > PARABOLIC_TOL
    ell = delta < -PARABOLIC_TOL
    par = ~(hyp | ell)
    r = np.sqrt(np.abs(delta))
    cpart[hyp] = np.cosh(r[hyp])
    spart[hyp] = np.sinh(r[hyp]) / r[hyp]
    cpart[ell] = np.cos(r[ell])
    spart[ell] = np.sin(r[ell]) / r[ell]
    d = delta[par]
    cpart[par] = 1.0 + d / 2.0 + d**2 / 24.0
    spart[par] = 1.0 + d / 6.0 + d**2 / 120.0
    out = cpart[..., None, None] * np.eye(2) + (spart * s)[..., None, None] * m
    return renormalize(out)


def adjoint(g, W: LieVector) -> LieVector:
    """Ad_g(W) = g W g^{-1}."""
    g = np.asarray(g, dtype=float)
    return LieVector.from_matrix(g @ W.matrix @ inverse(g))


def bracket(W1: LieVector, W2: LieVector) -> LieVector:
    m1, m2 = W1.matrix, W2.matrix
    return LieVector.from_matrix(m1 @ m2 - m2 @ m1)


def _check_upper(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite point")
    if np.any(z.imag <= 0):
        raise ValueError("point not in the upper half-plane")
    return z


def moebius(g, z) -> np.ndarray | complex:
    """(az + b) / (cz + d)."""
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise ValueError("non-finite matrix entries")
    z = _check_upper(z)
    a, b, c, d = g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]
    w = (a * z + b) / (c * z + d)
    # imaginary part computed directly to keep it positive far out
    w = w.real + 1j * (z.imag / np.abs(c * z + d) ** 2)
    return w if np.ndim(w) else complex(w)


def hyperbolic_distance(z1, z2):
    """Distance in the upper half-plane (curvature -1)."""
    z1 = _check_upper(z1)
    z2 = _check_upper(z2)
    q = np.abs(z1 - z2) / (2.0 * np.sqrt(z1.imag * z2.imag))
    d = 2.0 * np.arcsinh(q)
    return d if np.ndim(d) else float(d)


def cayley(z, center=1j):
    """Isometry from the upper half-plane to the disk sending ``center`` to 0."""
    z = np.asarray(z, dtype=complex)
    return (z - center) / (z - np.conj(center))


def inverse_cayley(w, center=1j):
    w = np.asarray(w, dtype=complex)
    return (center - w * np.conj(center)) / (1.0 - w)


def hyperbolic_homothety(x0, t: float, y):
    """Point at distance t*d(x0, y) from x0 on the geodesic ray through y."""
    if t <= 0:
        raise ValueError("ratio must be positive")
    x0 = complex(_check_upper(x0))
    y = _check_upper(y)
    w = cayley(y, x0)
    r = np.abs(w)
    safe = np.where(r > 0, r, 1.0)
    dist = 2.0 * np.arctanh(np.minimum(r, 1.0 - 1e-16))
    w_new = np.where(r > 0, np.tanh(0.5 * t * dist) * w / safe, 0.0)
    out = inverse_cayley(w_new, x0)
    out = np.where(r > 0, out, x0)
    return out if np.ndim(out) else complex(out)


def iwasawa(g):
    """Coordinates (x, y, theta) with g = n(x) a(y) k(theta).

    n(x) = [[1, x], [0, 1]], a(y) = diag(sqrt y, 1/sqrt y) and
    k(theta) = exp(theta Theta) = [[cos, sin], [-sin, cos]].
    """
    g = np.asarray(g, dtype=float)
    a, b, c, d = g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]
    den = c * c + d * d
    x = (a * c + b * d) / den
    y = 1.0 / den
    theta = np.arctan2(-c, d)
    return x, y, theta


def from_iwasawa(x, y, theta) -> np.ndarray:
    x, y, theta = np.broadcast_arrays(
        np.asarray(x, float), np.asarray(y, float), np.asarray(theta, float)
    )
    sy = np.sqrt(y)
    ct, st = np.cos(theta), np.sin(theta)
    out = np.empty(x.shape + (2, 2))
    # n(x) a(y) = [[sy, x/sy], [0, 1/sy]]
    out[..., 0, 0] = sy * ct - x / sy * st
    out[..., 0, 1] = sy * st + x / sy * ct
    out[..., 1, 0] = -st / sy
    out[..., 1, 1] = ct / sy
    return out
