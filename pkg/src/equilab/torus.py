"""Dilation and projection of measures onto tori R^d / Gamma.

For h_t(x) = x0 + t A_t (x - x0) + b_t and a trigonometric polynomial
f(x) = sum_N c_N exp(2 pi i eta_N . x) with eta_N in the dual lattice,

    int f d(pi o h_t)_* mu - c_0
        = sum_{N != 0} c_N exp(2 pi i eta_N . off_t) mu_hat(-t A_t^T eta_N),

where off_t = x0 - t A_t x0 + b_t.  This finite sum is evaluated by
:func:`discrepancy_series`; :func:`discrepancy_monte_carlo` pushes samples
through the projection instead and serves as an independent check.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .fitting import fit_decay
from .measures import LiftedCircleMeasure

TWO_PI = 2.0 * np.pi


class TorusLattice:
    """Lattice Gamma = B Z^d, with dual lattice B^{-T} Z^d."""

    def __init__(self, basis=None, dim=2):
        basis = np.eye(dim) if basis is None else np.asarray(basis, dtype=float)
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
            raise ValueError("basis must be a square matrix")
        if abs(np.linalg.det(basis)) < 1e-12:
            raise ValueError("basis is singular")
        self.basis = basis
        self.dim = basis.shape[0]
        self.inverse = np.linalg.inv(basis)
        self.dual = self.inverse.T
        if np.max(np.abs(basis @ self.inverse - np.eye(self.dim))) > 1e-12:
            raise ValueError("basis is too ill-conditioned")

    def project(self, x):
        """Reduce points into the fundamental parallelepiped of the basis."""
        coords = np.asarray(x, dtype=float) @ self.inverse.T
        return (coords - np.floor(coords)) @ self.basis.T

    def dual_vectors(self, modes):
        """Dual-lattice vectors for integer coordinates ``modes``."""
        return np.asarray(modes, dtype=float) @ self.dual.T

    @property
    def covolume(self):
        return float(abs(np.linalg.det(self.basis)))

    def to_dict(self):
        return {"basis": self.basis.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d.get("basis"), d.get("dim", 2))


def planar_rotation(dim, angle):
    """Rotation by ``angle`` in the plane of the first two coordinates."""
    r = np.eye(dim)
    c, s = np.cos(angle), np.sin(angle)
    r[:2, :2] = [[c, -s], [s, c]]
    return r


class DilationFamily:
    """h_t(x) = x0 + t A_t (x - x0) + b_t with orthogonal A_t.

    ``rotation`` is None (identity), a fixed orthogonal matrix, or an angular
    speed ``omega`` for A_t = planar_rotation(omega * t).  The offset is the
    affine path b_t = b0 + t b1.
    """

    def __init__(self, dim, center=None, rotation=None, omega=None, b0=None, b1=None):
        self.dim = int(dim)
        self.center = np.zeros(dim) if center is None else np.asarray(center, float)
        self.rotation = None if rotation is None else np.asarray(rotation, float)
        self.omega = omega
        if self.rotation is not None and self.omega is not None:
            raise ValueError("give either a fixed rotation or an angular speed")
        self.b0 = np.zeros(dim) if b0 is None else np.asarray(b0, float)
        self.b1 = np.zeros(dim) if b1 is None else np.asarray(b1, float)
        if self.rotation is not None:
            self._check_orthogonal(self.rotation)

    def _check_orthogonal(self, a):
        if np.max(np.abs(a.T @ a - np.eye(self.dim))) > 1e-12:
            raise ValueError("rotation is not orthogonal")

    def A(self, t):
        if self.rotation is not None:
            return self.rotation
        if self.omega is not None:
            return planar_rotation(self.dim, self.omega * t)
        return np.eye(self.dim)

    def b(self, t):
        return self.b0 + t * self.b1

    def offset(self, t):
        """Translation part x0 - t A_t x0 + b_t of h_t."""
        return self.center - t * self.A(t) @ self.center + self.b(t)

    def apply(self, x, t):
        x = np.asarray(x, dtype=float)
        return self.center + t * (x - self.center) @ self.A(t).T + self.b(t)

    def to_dict(self):
        d = {"center": self.center.tolist(), "b0": self.b0.tolist(), "b1": self.b1.tolist()}
        if self.rotation is not None:
            d["rotation"] = self.rotation.tolist()
        if self.omega is not None:
            d["omega"] = self.omega
        return d

    @classmethod
    def from_dict(cls, d, dim):
        return cls(dim, d.get("center"), d.get("rotation"), d.get("omega"),
                   d.get("b0"), d.get("b1"))


class TorusObservable:
    """Trigonometric polynomial with modes given in dual-basis coordinates."""

    def __init__(self, modes, coefficients, lattice=None):
        self.modes = np.atleast_2d(np.asarray(modes, dtype=int))
        self.coefficients = np.asarray(coefficients, dtype=complex).ravel()
        if self.modes.shape[0] != self.coefficients.size:
            raise ValueError("one coefficient per mode is required")
        if len({tuple(m) for m in self.modes}) != self.modes.shape[0]:
            raise ValueError("modes must be distinct")
        self.dim = self.modes.shape[1]
        self.lattice = TorusLattice(dim=self.dim) if lattice is None else lattice

    @classmethod
    def real_cosine(cls, modes, amplitudes, lattice=None):
        """sum a_k cos(2 pi eta_k . x), stored with conjugate-symmetric coefficients."""
        modes = np.atleast_2d(np.asarray(modes, dtype=int))
        amps = np.asarray(amplitudes, dtype=float)
        allm = np.concatenate([modes, -modes])
        return cls(allm, np.concatenate([amps, amps]) / 2.0, lattice)

    @property
    def frequencies(self):
        return self.lattice.dual_vectors(self.modes)

    def mean(self):
        zero = ~np.any(self.modes, axis=1)
        return complex(self.coefficients[zero].sum())

    def l1_norm(self):
        return float(np.sum(np.abs(self.coefficients)))

    def is_real(self, tol=1e-12):
        lookup = {tuple(m): c for m, c in zip(self.modes, self.coefficients)}
        return all(abs(lookup.get(tuple(-k for k in m), 0) - np.conj(c)) <= tol
                   for m, c in lookup.items())

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(2j * np.pi * x @ self.frequencies.T) @ self.coefficients

    def nonconstant(self):
        keep = np.any(self.modes, axis=1)
        return self.modes[keep], self.coefficients[keep]

    def to_dict(self):
        return {
            "modes": self.modes.tolist(),
            "coefficients": [[c.real, c.imag] for c in self.coefficients],
        }

    @classmethod
    def from_dict(cls, d, lattice=None):
        coeffs = [complex(*c) if isinstance(c, (list, tuple)) else complex(c)
                  for c in d["coefficients"]]
        return cls(d["modes"], coeffs, lattice)


def _check_setup(m, lat, f):
    if m.dim != lat.dim or f.dim != lat.dim:
        raise ValueError("measure, lattice and observable dimensions differ")
    if not np.allclose(f.lattice.basis, lat.basis, rtol=0, atol=1e-14):
        raise ValueError("observable is defined on a different lattice")


def discrepancy_series(m, lat, dil, f, t):
    """Exact finite Fourier sum for int f dm_t - int f d(Haar)."""
    if t <= 0:
        raise ValueError("t must be positive")
    _check_setup(m, lat, f)
    modes, coeffs = f.nonconstant()
    if coeffs.size == 0:
        return 0j
    eta = lat.dual_vectors(modes)
    A = dil.A(t)
    phase = np.exp(2j * np.pi * eta @ dil.offset(t))
    hat = m.fourier(-t * eta @ A)
    return complex(np.sum(coeffs * phase * hat))


def discrepancy_monte_carlo(m, lat, dil, f, t, n=100_000, seed=None):
    """Sample average of f over the projected dilated samples.

    Returns (value, standard error).
    """
    if n < 1000:
        raise ValueError("need at least 1000 samples")
    _check_setup(m, lat, f)
    modes, coeffs = f.nonconstant()
    if coeffs.size == 0:
        return 0j, 0.0
    pts = lat.project(dil.apply(m.sample(n, seed), t))
    vals = f(pts) - f.mean()
    err = np.sqrt((vals.real.var() + vals.imag.var()) / n)
    return complex(vals.mean()), float(err)


@dataclass
class RayVerdict:
    mode: tuple
    verdict: str
    t: np.ndarray
    magnitudes: np.ndarray

    def to_dict(self):
        return {"mode": list(self.mode), "verdict": self.verdict,
                "t": self.t.tolist(), "magnitudes": self.magnitudes.tolist()}


def integral_ray_decay_test(m, lat, rays, t_grid, stall_level=0.1, decay_ratio=0.1, window=5):
    """Classify |mu_hat(t eta)| along each integral ray as decaying or stalling.

    The magnitudes are smoothed by a sliding maximum over ``window`` grid
    points.  A ray stalls when this envelope stays above ``stall_level``
    throughout the last decade of the grid, and decays when its largest
    value there is below ``decay_ratio`` times the largest value over the
    first decade.  Anything else is reported as inconclusive.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.max() / t_grid.min() < 100:
        raise ValueError("grid must span at least two decades")
    first = t_grid <= 10 * t_grid.min()
    last = t_grid >= t_grid.max() / 10
    out = []
    for ray in np.atleast_2d(np.asarray(rays, dtype=int)):
        if not np.any(ray):
            raise ValueError("rays must be nonzero")
        eta = lat.dual_vectors(ray)
        mags = np.abs(m.fourier(t_grid[:, None] * eta[None, :]))
        env = maximum_filter1d(mags, size=window, mode="nearest")
        if env[last].min() > stall_level:
            verdict = "stalls"
        elif env[last].max() < decay_ratio * env[first].max():
            verdict = "decays"
        else:
            verdict = "inconclusive"
        out.append(RayVerdict(tuple(int(k) for k in ray), verdict, t_grid, mags))
    return out


def discrepancy_curve(m, lat, dil, f, t_grid):
    return np.array([discrepancy_series(m, lat, dil, f, t) for t in t_grid])


def equidistribution_rate_fit(m, lat, dil, f, t_grid, s=None, window=5):
    """Envelope log-log fit of |discrepancy| along ``t_grid``.

    The metadata holds the l1 norm of the coefficients and the constant
    C = max_t |disc(t)| t^{s/2} / ||f_hat||_1, with s taken as minus twice
    the fitted slope unless given.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.max() / t_grid.min() < 100:
        raise ValueError("grid must span at least two decades")
    if f.nonconstant()[1].size == 0:
        raise ValueError("observable is constant")
    disc = discrepancy_curve(m, lat, dil, f, t_grid)
    fit = fit_decay(t_grid, disc, mode="loglog", window=window)
    s_used = -2.0 * fit.slope if s is None else float(s)
    l1 = f.l1_norm()
    fit.window.update(
        l1_norm=l1,
        s=s_used,
        constant=float(np.max(np.abs(disc) * t_grid ** (s_used / 2.0)) / l1),
    )
    fit.series = disc
    return fit


class DiscrepancyRateEstimator(BaseEstimator):
    """Estimator form of :func:`equidistribution_rate_fit`.

    ``fit(t_grid)`` evaluates the discrepancy series on the grid and stores
    ``slope_``, ``constant_`` and ``fit_``; ``predict(t)`` returns the fitted
    envelope.
    """

    def __init__(self, measure=None, lattice=None, dilation=None, observable=None,
                 s=None, window=5):
        self.measure = measure
        self.lattice = lattice
        self.dilation = dilation
        self.observable = observable
        self.s = s
        self.window = window

    def fit(self, t_grid, y=None):
        lat = self.lattice or TorusLattice(dim=self.measure.dim)
        dil = self.dilation or DilationFamily(self.measure.dim)
        self.fit_ = equidistribution_rate_fit(self.measure, lat, dil, self.observable,
                                              t_grid, self.s, self.window)
        self.slope_ = self.fit_.slope
        self.constant_ = self.fit_.window["constant"]
        return self

    def predict(self, t):
        check_is_fitted(self, "fit_")
        return self.fit_.envelope(t)


_HELIX = LiftedCircleMeasure()


def lifted_circle_discrepancy(f, t):
    """Discrepancy of the dilated helix on T^3.

    Sums f_hat(N) nu_hat(-t N1, -t N2, -N3) over the nonzero modes; the
    terms with (N1, N2) = (0, 0) integrate a nontrivial character over a
    full period and are dropped.
    """
    if f.dim != 3:
        raise ValueError("observable must live on T^3")
    modes, coeffs = f.nonconstant()
    keep = np.any(modes[:, :2] != 0, axis=1)
    if not np.any(keep):
        return 0j
    modes, coeffs = modes[keep], coeffs[keep]
    xi = -np.column_stack([t * modes[:, 0], t * modes[:, 1], modes[:, 2]]).astype(float)
    return complex(np.sum(coeffs * _HELIX.fourier(xi)))


def lifted_circle_rate_fit(f, t_grid, window=5):
    t_grid = np.asarray(t_grid, dtype=float)
    disc = np.array([lifted_circle_discrepancy(f, t) for t in t_grid])
    fit = fit_decay(t_grid, disc, mode="loglog", window=window)
    fit.window["l1_norm"] = f.l1_norm()
    fit.series = disc
    return fit
