"""Decay-rate fits on (possibly oscillating) magnitude series."""

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d
from scipy.signal import lombscargle
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import DegenerateFit

DEGENERATE_LEVEL = 1e-13


@dataclass
class AsymptoticFit:
    """Least-squares fit of log|y| against log t (or t).

    For a log-log fit the envelope is ``exp(intercept) * t**slope``; for a
    semilog fit it is ``exp(intercept + slope * t)``.
    """

    slope: float
    intercept: float
    residual_rms: float
    window: dict = field(default_factory=dict)
    series: object = field(default=None, repr=False)

    def envelope(self, t):
        t = np.asarray(t, dtype=float)
        if self.window.get("mode") == "semilog":
            return np.exp(self.intercept + self.slope * t)
        return np.exp(self.intercept) * t**self.slope

    def to_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "residual_rms": self.residual_rms,
            "window": self.window,
        }


def count_local_maxima(y):
    y = np.asarray(y, dtype=float)
    if y.size < 3:
        return 0
    return int(np.sum((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])))


def _window_points(t, window, mode):
    if mode == "loglog":
        return int(window)
    # semilog windows are given in units of t on a uniform grid
    dt = np.median(np.diff(t))
    return max(1, int(round(window / dt)))


def fit_decay(t, y, mode="loglog", window=5, oscillation="auto", level=DEGENERATE_LEVEL):
    """Fit the decay of |y| along the grid ``t``.

    ``mode`` is ``"loglog"`` (power law) or ``"semilog"`` (exponential).
    With ``oscillation="auto"`` the series is treated as oscillating when
    it has at least two interior local maxima; the fit then runs on the
    windowed maximum (upper envelope).  ``"envelope"`` and ``"raw"`` force
    either choice.
    """
    t = np.asarray(t, dtype=float)
    mag = np.abs(np.asarray(y))
    if t.ndim != 1 or t.shape != mag.shape:
        raise ValueError("t and y must be 1-d arrays of equal length")
    if t.size < 3:
        raise ValueError("need at least three grid points")
    if np.any(np.diff(t) <= 0):
        raise ValueError("t must be increasing")
    if mode not in ("loglog", "semilog"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "loglog" and np.any(t <= 0):
        raise ValueError("log-log fit needs positive t")
    if np.all(mag < level):
        raise DegenerateFit("all magnitudes are numerically zero")

    n_max = count_local_maxima(mag)
    if oscillation == "auto":
        use_env = n_max >= 2
    elif oscillation in ("envelope", "raw"):
        use_env = oscillation == "envelope"
    else:
        raise ValueError(f"unknown oscillation option {oscillation!r}")

    width = _window_points(t, window, mode)
    target = maximum_filter1d(mag, size=width, mode="nearest") if use_env else mag
    keep = target > 0
    x = np.log(t[keep]) if mode == "loglog" else t[keep]
    ly = np.log(target[keep])
    coef = np.polyfit(x, ly, 1)
    resid = ly - np.polyval(coef, x)
    meta = {
        "mode": mode,
        "envelope": bool(use_env),
        "window_points": int(width),
        "local_maxima": n_max,
        "t_min": float(t[0]),
        "t_max": float(t[-1]),
        "n_points": int(t.size),
    }
    return AsymptoticFit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2))), meta)


def dominant_frequency(t, y, n_freq=2000, max_freq=None):
    """Angular frequency of the strongest periodogram peak of a real series."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    y = y - y.mean()
    if not np.any(y):
        return None
    span = t[-1] - t[0]
    if max_freq is None:
        max_freq = np.pi / np.median(np.diff(t))
    freqs = np.linspace(2 * np.pi / span, max_freq, n_freq)
    power = lombscargle(t, y, freqs)
    return float(freqs[np.argmax(power)])


class EnvelopeRateFit(BaseEstimator):
    """Estimator wrapper around :func:`fit_decay`.

    ``fit(t, y)`` stores ``fit_`` (an :class:`AsymptoticFit`), ``slope_``,
    ``intercept_`` and ``residual_rms_``; ``predict(t)`` evaluates the
    fitted envelope.
    """

    def __init__(self, mode="loglog", window=5, oscillation="auto"):
        self.mode = mode
        self.window = window
        self.oscillation = oscillation

    def fit(self, t, y):
        self.fit_ = fit_decay(t, y, self.mode, self.window, self.oscillation)
        self.slope_ = self.fit_.slope
        self.intercept_ = self.fit_.intercept
        self.residual_rms_ = self.fit_.residual_rms
        return self

    def predict(self, t):
        check_is_fitted(self, "fit_")
        return self.fit_.envelope(t)
