"""Smooth functions on SL(2,R) in Iwasawa coordinates and their Lie derivatives.

A Lie algebra element Z acts on functions by Zh(g) = d/ds h(g exp(sZ)).
Writing g = n(x) a(y) k(theta) and M = k Z k^{-1} = [[m11, m12], [m21, -m11]],

    Z = 2 m11 * y d/dy + (m12 + m21) * y d/dx - m21 * d/dtheta,

and the theta-derivative of M is the commutator [Theta, M].  Functions here
are products h = S(x, y) * Phi(theta) of a base envelope S and a fiber
factor Phi; both expose values and derivatives up to order two, which gives
first and second Lie derivatives in closed form.
"""

import numpy as np

from .sl2 import THETA, iwasawa

_THETA_M = THETA.matrix


def lie_coefficients(Z, theta):
    """(a, b, c) with Z = a y d/dy + b y d/dx + c d/dtheta at angle theta.

    Also returns their theta-derivatives.
    """
    theta = np.asarray(theta, dtype=float)
    ct, st = np.cos(theta), np.sin(theta)
    k = np.empty(theta.shape + (2, 2))
    k[..., 0, 0] = ct
    k[..., 0, 1] = st
    k[..., 1, 0] = -st
    k[..., 1, 1] = ct
    kinv = np.swapaxes(k, -1, -2)
    m = k @ Z.matrix @ kinv
    dm = _THETA_M @ m - m @ _THETA_M
    coef = (2 * m[..., 0, 0], m[..., 0, 1] + m[..., 1, 0], -m[..., 1, 0])
    dcoef = (2 * dm[..., 0, 0], dm[..., 0, 1] + dm[..., 1, 0], -dm[..., 1, 0])
    return coef, dcoef


class Envelope:
    """Base-point factor S(x, y). Subclasses implement ``jet``."""

    def jet(self, x, y):
        """Return (S, S_x, S_y, S_xx, S_xy, S_yy)."""
        raise NotImplementedError

    def __call__(self, x, y):
        return self.jet(x, y)[0]


class GaussianEnvelope(Envelope):
    """exp(-((x - x0)^2 + log(y / y0)^2) / (2 w^2))."""

    def __init__(self, x0=0.0, y0=1.0, width=0.5):
        self.x0, self.y0, self.width = float(x0), float(y0), float(width)

    def jet(self, x, y):
        w2 = self.width**2
        dx = x - self.x0
        ly = np.log(y / self.y0)
        S = np.exp(-(dx**2 + ly**2) / (2 * w2))
        gx = -dx / w2
        gl = -ly / w2  # derivative in log y
        Sx = S * gx
        Sy = S * gl / y
        Sxx = S * (gx**2 - 1 / w2)
        Sxy = S * gx * gl / y
        # d/dy (S gl / y) with d(gl)/dy = -1/(w2 y)
        Syy = S * (gl**2 - 1 / w2 - gl) / y**2
        return S, Sx, Sy, Sxx, Sxy, Syy


class PowerEnvelope(Envelope):
    """y^s (unbounded; used for Casimir eigenfunction checks)."""

    def __init__(self, s=0.5):
        self.s = s

    def jet(self, x, y):
        s = self.s
        S = y**s
        zero = np.zeros_like(S)
        return S, zero, s * S / y, zero, zero, s * (s - 1) * S / y**2


def bump_profile(w):
    """exp(1 - 1/(1 - w)) on [0, 1), zero beyond; with two derivatives."""
    w = np.asarray(w, dtype=float)
    inside = w < 1.0
    q = np.where(inside, 1.0 / np.where(inside, 1.0 - w, 1.0), 0.0)
    b = np.where(inside, np.exp(1.0 - q), 0.0)
    b1 = -b * q**2
    b2 = b * (q**4 - 2 * q**3)
    return b, b1, b2


class HyperbolicBump(Envelope):
    """Smooth bump in the hyperbolic distance rho to a center point.

    S = beta(w) with w = (cosh rho - 1) / (cosh r - 1) and
    beta(w) = exp(1 - 1/(1 - w)), so S = 1 at the center and the support
    is the closed ball of radius r.
    """

    def __init__(self, center=1j, radius=1.5):
        self.center = complex(center)
        if self.center.imag <= 0 or radius <= 0:
            raise ValueError("center must lie in the upper half-plane and radius be positive")
        self.radius = float(radius)
        self.scale = 1.0 / (np.cosh(self.radius) - 1.0)

    def cosh_distance(self, x, y):
        xc, yc = self.center.real, self.center.imag
        return 1.0 + ((x - xc) ** 2 + (y - yc) ** 2) / (2 * y * yc)

    def jet(self, x, y):
        xc, yc = self.center.real, self.center.imag
        dx, dy = x - xc, y - yc
        q = dx**2 + dy**2
        u = 1.0 + q / (2 * y * yc)
        ux = dx / (y * yc)
        uy = dy / (y * yc) - q / (2 * yc * y**2)
        uxx = 1.0 / (y * yc)
        uxy = -dx / (yc * y**2)
        uyy = 1.0 / (yc * y) - 2 * dy / (yc * y**2) + q / (yc * y**3)
        c = self.scale
        b, b1, b2 = bump_profile((u - 1.0) * c)
        return (
            b,
            b1 * c * ux,
            b1 * c * uy,
            b2 * (c * ux) ** 2 + b1 * c * uxx,
            b2 * c * c * ux * uy + b1 * c * uxy,
            b2 * (c * uy) ** 2 + b1 * c * uyy,
        )

    def integral(self):
        """Integral of S over the hyperbolic plane (area form dx dy / y^2)."""
        from scipy.integrate import quad

        val, _ = quad(lambda w: bump_profile(w)[0], 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
        return 2 * np.pi * val / self.scale


class FourierMode:
    """Phi(theta) = exp(i n theta)."""

    def __init__(self, n=0):
        self.n = int(n)

    def jet(self, theta):
        e = np.exp(1j * self.n * theta)
        return e, 1j * self.n * e, -(self.n**2) * e


class VonMisesFiber:
    """Phi(theta) = exp(kappa (cos 2(theta - theta_c) - 1)), pi-periodic."""

    def __init__(self, kappa=1.0, theta_c=0.0):
        self.kappa, self.theta_c = float(kappa), float(theta_c)

    def jet(self, theta):
        k = self.kappa
        arg = 2 * (theta - self.theta_c)
        e = np.exp(k * (np.cos(arg) - 1.0))
        d1 = -2 * k * np.sin(arg)
        d2 = -4 * k * np.cos(arg)
        return e, e * d1, e * (d1**2 + d2)

    def mean(self):
        """Average of Phi over a period."""
        from scipy.special import ive

        return float(ive(0, self.kappa))


class ProductFunction:
    """h(g) = S(x, y) * Phi(theta) in Iwasawa coordinates of g."""

    def __init__(self, envelope, fiber):
        self.envelope = envelope
        self.fiber = fiber

    def _parts(self, g):
        x, y, th = iwasawa(g)
        return x, y, th, self.envelope.jet(x, y), self.fiber.jet(th)

    def __call__(self, g):
        x, y, th = iwasawa(g)
        return self.envelope(x, y) * self.fiber.jet(th)[0]

    def lie(self, Z, g):
        """Zh(g)."""
        x, y, th, (S, Sx, Sy, *_), (P, P1, _) = self._parts(g)
        (a, b, c), _ = lie_coefficients(Z, th)
        return a * y * Sy * P + b * y * Sx * P + c * S * P1

    def lie2(self, Z1, Z2, g):
        """Z1(Z2 h)(g)."""
        x, y, th, (S, Sx, Sy, Sxx, Sxy, Syy), (P, P1, P2) = self._parts(g)
        (a1, b1, c1), _ = lie_coefficients(Z1, th)
        (a2, b2, c2), (da2, db2, dc2) = lie_coefficients(Z2, th)
        # F = Z2 h = a2 y S_y P + b2 y S_x P + c2 S P'
        Fy = a2 * (Sy + y * Syy) * P + b2 * (Sx + y * Sxy) * P + c2 * Sy * P1
        Fx = a2 * y * Sxy * P + b2 * y * Sxx * P + c2 * Sx * P1
        Ft = (da2 * y * Sy * P + db2 * y * Sx * P + dc2 * S * P1
              + a2 * y * Sy * P1 + b2 * y * Sx * P1 + c2 * S * P2)
        return a1 * y * Fy + b1 * y * Fx + c1 * Ft
