"""Averages of observables along geodesic translates of homogeneous curves.

For a Lie algebra element W, length sigma and base point p,

    k(t) = (1/sigma) int_0^sigma f(p exp(sW) exp(-tX)) ds,

on SL(2,R) itself or on Gamma \\ SL(2,R) when a group is supplied (the
translated points are then reduced every unit of geodesic time).  With
``positive_time=True`` the flow runs forward, exp(+tX).
"""

from dataclasses import dataclass, field

import numpy as np

from . import _quad
from .fitting import AsymptoticFit, dominant_frequency, fit_decay
from .fuchsian import flow_reduced
from .sl2 import LieVector, X, as_sl2, exp_lie, renormalize


@dataclass
class TranslateConfig:
    """Curve data: W, arc length sigma, base point p and quadrature settings."""

    W: LieVector
    sigma: float
    p: np.ndarray = field(default_factory=lambda: np.eye(2))
    order: int = 16
    group: object = None
    positive_time: bool = False
    panel_length: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.order < 16:
            raise ValueError("quadrature order must be at least 16")
        if not isinstance(self.W, LieVector):
            self.W = LieVector(*self.W)
        self.p = as_sl2(self.p)

    @property
    def regime(self):
        """'equidistribution' when W has a component along the expanded direction."""
        comp = self.W.c if self.positive_time else self.W.b
        return "equidistribution" if comp != 0 else "no-equidistribution"

    @property
    def sign(self):
        return 1.0 if self.positive_time else -1.0

    def speed(self, t):
        """Norm of Ad_{exp(-sign t X)} W, which bounds how fast the curve moves."""
        e = np.exp(-self.sign * t)
        return float(np.sqrt(self.W.a**2 + (self.W.b * e) ** 2 + (self.W.c / e) ** 2))

    def points(self, s, t):
        g = self.p @ exp_lie(self.W, np.asarray(s, dtype=float))
        if self.group is not None:
            g = self.group.reduce_batch(g)
        return flow_reduced(g, self.sign * t, self.group)

    def panels(self, t):
        return max(1, int(np.ceil(self.sigma * self.speed(t) / self.panel_length)))


def _integrate(cfg, func, t, order):
    nodes, weights = _quad.composite_nodes(0.0, cfg.sigma, cfg.panels(t), order)
    vals = func(cfg.points(nodes, t))
    return np.tensordot(weights, vals, axes=(0, -1)) / cfg.sigma


def translate_average(cfg, f, t, error=True):
    """k(t) by composite Gauss-Legendre quadrature.

    Returns (value, error estimate); the estimate is the change when the
    order per panel is doubled (``nan`` when ``error`` is False).
    """
    val = complex(_integrate(cfg, f, t, cfg.order))
    if not error:
        return val, float("nan")
    fine = complex(_integrate(cfg, f, t, 2 * cfg.order))
    return fine, abs(fine - val)


def derivative_averages(cfg, f, t):
    """(k, k', k'') using the Lie derivatives Xf and X^2 f of ``f``."""

    def stack(g):
        return np.stack([f(g), cfg.sign * f.lie(X, g), f.lie2(X, X, g)])

    vals = _integrate(cfg, stack, t, cfg.order)
    return complex(vals[0]), complex(vals[1]), complex(vals[2])


def translate_series(cfg, f, t_grid, error=True):
    """k on a grid; returns arrays (values, error estimates)."""
    out = [translate_average(cfg, f, t, error) for t in t_grid]
    return np.array([v for v, _ in out]), np.array([e for _, e in out])


def horocycle_average(f, q, length, order=16, panel_length=1.0, group=None):
    """(1/L) int_0^L f(q exp(uU)) du."""
    from .sl2 import U

    panels = max(1, int(np.ceil(length / panel_length)))
    nodes, weights = _quad.composite_nodes(0.0, length, panels, order)
    g = renormalize(np.asarray(q, float) @ exp_lie(U, nodes))
    if group is not None:
        g = group.reduce_batch(g)
    return complex(weights @ f(g) / length)


@dataclass
class ExpansionReport:
    """Decay diagnostics for t -> k(t) - m(f)."""

    t: np.ndarray
    discrepancy: np.ndarray
    fit: AsymptoticFit
    frequency: float = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "envelope_slope": self.fit.slope,
            "envelope_intercept": self.fit.intercept,
            "residual_rms": self.fit.residual_rms,
            "frequency": self.frequency,
            "fit": self.fit.window,
            "diagnostics": self.diagnostics,
        }


def envelope_fit(t, values, mean, window=3.5, level=1e-12, diagnostics=None):
    """Semilog envelope fit of |k(t) - mean| with a sliding window in t units.

    When the series oscillates, the dominant angular frequency of
    (k - mean) e^{t/2} is reported as a candidate spectral parameter.
    """
    t = np.asarray(t, dtype=float)
    if t[-1] - t[0] < 6:
        raise ValueError("the grid must span at least 6 units of t")
    disc = np.asarray(values) - mean
    fit = fit_decay(t, disc, mode="semilog", window=window, level=level)
    freq = None
    if fit.window["envelope"]:
        freq = dominant_frequency(t, np.real(disc * np.exp(t / 2)))
    diag = {"t_min": float(t[0]), "t_max": float(t[-1]), "n_points": int(t.size)}
    diag.update(diagnostics or {})
    return ExpansionReport(t, disc, fit, freq, diag)
