"""The second-order ODE satisfied by translated-curve averages.

For a Theta-eigenfunction f (Theta f = i n f) and W = alpha X + beta Theta + gamma R,
the average k(t) of f over p exp(sW) exp(-tX), s in [0, sigma], obeys

    k'' + k' + mu k = e^{-t} G(t)

when f is also a Casimir eigenfunction (Casimir = -X^2 + X - UV, so that
y^s has eigenvalue s(1 - s)).  This module evaluates the boundary-term
identities expressing the curve averages of Uf and U^2 f, assembles G,
solves the ODE in closed form and extracts the coefficients of the
long-time expansion.  Everything runs on SL(2,R) with the trivial group.

Notation: D(t) = (gamma + beta) e^t + (gamma - beta) e^{-t},
eps(t) = (gamma - beta) e^{-t}, I[h] = curve average of h at time t.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _quad
from .exceptions import IllConditionedInitialData, SingularDenominator, UnboundedG
from .lie import FourierMode, ProductFunction
from .sl2 import THETA, U, X, adjoint, as_sl2, exp_lie
from .translates import TranslateConfig, derivative_averages

QUARTER_TOL = 1e-8
COND_LIMIT = 1e10
TAIL_LEVEL = 1e-12
DENOM_TOL = 1e-12


# observables ----------------------------------------------------------------


class EigenObservable(ProductFunction):
    """f(g) = F(x, y) e^{i n theta} in Iwasawa coordinates; Theta f = i n f."""

    def __init__(self, envelope, n=0):
        super().__init__(envelope, FourierMode(n))
        self.n = int(n)

    def theta_defect(self, g, s):
        """|f(g exp(s Theta)) - e^{ins} f(g)|."""
        g = as_sl2(g)
        return float(np.max(np.abs(self(g @ exp_lie(THETA, s)) - np.exp(1j * self.n * s) * self(g))))


# boundary-term identities ---------------------------------------------------


def t0(W, margin=0.1):
    """Threshold past which gamma + beta + (gamma - beta) e^{-2t} stays away from 0."""
    gp, gm = W.gamma + W.beta, W.gamma - W.beta
    if gp == 0:
        raise SingularDenominator("gamma = -beta: no stable component")
    ratio = -gp / gm if gm != 0 else -1.0
    root = -0.5 * np.log(ratio) if ratio > 0 else -np.inf
    return float(max(root + margin, margin))


@dataclass
class CurveData:
    """Curve averages and boundary differences at one time t."""

    t: float
    k: complex
    dk: complex
    d2k: complex
    A: complex
    B: complex
    C: complex
    n: int
    alpha: float
    beta: float
    gamma: float

    @property
    def denominator(self):
        return (self.gamma + self.beta) * np.exp(self.t) + (self.gamma - self.beta) * np.exp(-self.t)

    @property
    def eps(self):
        return (self.gamma - self.beta) * np.exp(-self.t)


def curve_data(W, f, p, sigma, t, order=16, panel_length=1.0):
    """k, k', k'' and the boundary differences A, B, C of f, Uf, Xf."""
    cfg = TranslateConfig(W, sigma, p, order=order, panel_length=panel_length)
    k, dk, d2k = derivative_averages(cfg, f, t)
    ends = cfg.points(np.array([sigma, 0.0]), t)

    def diff(vals):
        return complex(vals[0] - vals[1]) / sigma

    return CurveData(t, k, dk, d2k, diff(f(ends)), diff(f.lie(U, ends)), diff(f.lie(X, ends)),
                     f.n, W.alpha, W.beta, W.gamma)


def _check_denominator(cd):
    den = cd.denominator
    if abs(den) * np.exp(-cd.t) < DENOM_TOL:
        raise SingularDenominator(f"gamma + beta + (gamma - beta) e^(-2t) vanishes at t = {cd.t}")
    return den


def u_average(cd):
    """I[Uf] from boundary terms."""
    den = _check_denominator(cd)
    return (cd.A + cd.alpha * cd.dk + 1j * cd.n * cd.eps * cd.k) / den


def ux_average(cd):
    """I[U X f]; Xf is not a Theta-eigenfunction, so extra terms appear."""
    den = _check_denominator(cd)
    e, n = cd.eps, cd.n
    return (cd.C - cd.alpha * cd.d2k - 1j * n * e * cd.dk + 1j * n * e * cd.k
            - 2 * e * u_average(cd)) / den


def u2_average(cd):
    """I[U^2 f] from boundary terms."""
    den = _check_denominator(cd)
    e, n, a = cd.eps, cd.n, cd.alpha
    return (cd.B - a * ux_average(cd) - (a - 1j * n * e) * u_average(cd) - 2 * e * cd.dk) / den


def u2_average_printed(cd):
    """The published form of the I[U^2 f] identity, kept for comparison.

    It treats Xf as a Theta-eigenfunction and omits the k' term; it
    disagrees with quadrature for generic inputs.
    """
    den = _check_denominator(cd)
    e, n, a = cd.eps, cd.n, cd.alpha
    inner = a * (cd.C - a * cd.d2k - 1j * n * e * cd.d2k) + (a - 1j * n * e) * (
        cd.A + a * cd.dk + 1j * n * e * cd.k)
    return (cd.B - inner / den) / den


@dataclass
class IdentityCheck:
    """Left side by quadrature, right side from boundary terms."""

    lhs: complex
    rhs: complex

    @property
    def residual(self):
        return abs(self.lhs - self.rhs) / (1 + abs(self.lhs))


def _quadrature_averages(W, f, p, sigma, t, order, panel_length):
    cfg = TranslateConfig(W, sigma, p, order=order, panel_length=panel_length)

    def stack(g):
        return np.stack([f.lie(U, g), f.lie2(U, U, g), f.lie2(U, X, g)])

    nodes, weights = _quad.composite_nodes(0.0, sigma, cfg.panels(t), order)
    vals = np.tensordot(stack(cfg.points(nodes, t)), weights, axes=(-1, 0)) / sigma
    return complex(vals[0]), complex(vals[1]), complex(vals[2])


def lemma61_lhs_rhs(W, f, p, sigma, t, order=24, panel_length=0.5):
    """Both sides of the I[Uf] and I[U^2 f] identities.

    Returns (check_Uf, check_U2f).  The left sides are quadratures of the
    analytic Lie derivatives; the right sides use only k, k', k'' and the
    boundary differences A, B, C.
    """
    cd = curve_data(W, f, p, sigma, t, order, panel_length)
    iu, iuu, _ = _quadrature_averages(W, f, p, sigma, t, order, panel_length)
    return IdentityCheck(iu, u_average(cd)), IdentityCheck(iuu, u2_average(cd))


def lemma62_derivative(Z1, Z2, p, t, s, h=1e-5):
    """Discrepancy between d/ds [p exp(s Z2) exp(t Z1)] and the Ad formula.

    The derivative is taken by central differences in matrix entries and
    compared with c(s) Ad_{exp(-t Z1)}(Z2), the right-invariant
    pushforward at c(s).
    """
    p = np.asarray(p, dtype=float)

    def curve(u):
        return p @ exp_lie(Z2, u) @ exp_lie(Z1, t)

    fd = (curve(s + h) - curve(s - h)) / (2 * h)
    tangent = curve(s) @ adjoint(exp_lie(Z1, -t), Z2).matrix
    return float(np.max(np.abs(fd - tangent)))


def assemble_G(W, f, p, sigma, t, order=16, printed=False):
    """G(t) with k'' + k' + mu k = e^{-t} G(t) for Casimir eigenfunctions.

    From the Casimir, k'' + k' + mu k = -(I[U^2 f] - i n I[Uf]), and both
    averages are replaced by their boundary-term expressions.  With
    ``printed=True`` the published expression is evaluated instead (same
    ingredients, opposite overall sign, printed I[U^2 f] identity).
    """
    if W.gamma + W.beta == 0:
        raise SingularDenominator("gamma = -beta: no stable component")
    cd = curve_data(W, f, p, sigma, t, order)
    if printed:
        return complex(np.exp(t) * (u2_average_printed(cd) - 1j * cd.n * u_average(cd)))
    return complex(-np.exp(t) * (u2_average(cd) - 1j * cd.n * u_average(cd)))


def ode_residual(W, f, p, sigma, t, mu, order=24):
    """|k'' + k' + mu k - e^{-t} G(t)| with G assembled from boundary terms."""
    cd = curve_data(W, f, p, sigma, t, order)
    G = -np.exp(t) * (u2_average(cd) - 1j * cd.n * u_average(cd))
    return abs(cd.d2k + cd.dk + mu * cd.k - np.exp(-t) * G)


# closed-form solutions ------------------------------------------------------


def case_tag(mu):
    if abs(mu - 0.25) < QUARTER_TOL:
        return "mu=1/4"
    if mu > 0.25:
        return "mu>1/4"
    if mu > 0:
        return "0<mu<1/4"
    return "mu<=0"


def nu_of(mu):
    """The root of 1 - nu^2 = 4 mu in [0, inf) or i(0, inf)."""
    d = 1.0 - 4.0 * mu
    return complex(np.sqrt(d)) if d >= 0 else 1j * np.sqrt(-d)


@dataclass
class SyntheticG:
    """Bounded test forcing sum_j a_j exp(i w_j t) + b exp(-lam t), JSON-serializable."""

    amplitudes: list = field(default_factory=lambda: [1.0])
    frequencies: list = field(default_factory=lambda: [0.0])
    decay_amplitude: complex = 0.0
    decay_rate: float = 1.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for a, w in zip(self.amplitudes, self.frequencies):
            out = out + complex(a) * np.exp(1j * w * t)
        return out + complex(self.decay_amplitude) * np.exp(-self.decay_rate * t)

    def to_dict(self):
        def c(z):
            z = complex(z)
            return [z.real, z.imag]

        return {"amplitudes": [c(a) for a in self.amplitudes],
                "frequencies": [float(w) for w in self.frequencies],
                "decay_amplitude": c(self.decay_amplitude), "decay_rate": float(self.decay_rate)}

    @classmethod
    def from_dict(cls, d):
        return cls([complex(*a) for a in d["amplitudes"]], list(d["frequencies"]),
                   complex(*d["decay_amplitude"]), float(d["decay_rate"]))

    @classmethod
    def random(cls, rng, terms=3):
        amps = rng.normal(size=terms) + 1j * rng.normal(size=terms)
        return cls(list(amps), list(rng.uniform(-2, 2, terms)),
                   complex(rng.normal(), rng.normal()), float(rng.uniform(0.2, 2)))


@dataclass
class OdeProblem:
    """k'' + k' + mu k = e^{-t} G(t) on (t0, inf) with data k(t1), k'(t1)."""

    mu: float
    G: object
    k1: complex
    dk1: complex
    t1: float = 1.0
    t0: float = 0.0

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ValueError("t1 must exceed t0")
        self.mu = float(self.mu)
        self.nu = nu_of(self.mu)
        if abs(1 - self.nu**2 - 4 * self.mu) > 1e-12 * max(1.0, abs(self.mu)):
            raise ValueError("branch of nu inconsistent with mu")

    @property
    def case(self):
        return case_tag(self.mu)

    @property
    def quarter(self):
        return self.case == "mu=1/4"

    def basis(self):
        """Exponents (l1, l2) of the homogeneous solutions; l1 = -(1 - nu)/2."""
        return -(1 - self.nu) / 2, -(1 + self.nu) / 2

    def constants(self):
        """c1, c2 from the initial data."""
        t1 = self.t1
        if self.quarter:
            e = np.exp(-t1 / 2)
            M = np.array([[e, t1 * e], [-e / 2, (1 - t1 / 2) * e]], dtype=complex)
        else:
            l1, l2 = self.basis()
            M = np.array([[np.exp(l1 * t1), np.exp(l2 * t1)],
                          [l1 * np.exp(l1 * t1), l2 * np.exp(l2 * t1)]], dtype=complex)
        if np.linalg.cond(M) > COND_LIMIT:
            raise IllConditionedInitialData("initial-data system is ill-conditioned")
        c1, c2 = np.linalg.solve(M, np.array([self.k1, self.dk1], dtype=complex))
        return complex(c1), complex(c2)

    def weights(self):
        """Integrand factors w1, w2 with k = y1 (c1 + int w1 G) + y2 (c2 + int w2 G)."""
        if self.quarter:
            return (lambda x: -x * np.exp(-x / 2)), (lambda x: np.exp(-x / 2))
        l1, l2 = self.basis()
        nu = self.nu
        return (lambda x: np.exp(l2 * x) / nu), (lambda x: -np.exp(l1 * x) / nu)

    def homogeneous(self, t, derivative=False):
        t = np.asarray(t, dtype=float)
        e = np.exp(-t / 2)
        if self.quarter:
            return (-e / 2, (1 - t / 2) * e) if derivative else (e, t * e)
        l1, l2 = self.basis()
        if derivative:
            return l1 * np.exp(l1 * t), l2 * np.exp(l2 * t)
        return np.exp(l1 * t), np.exp(l2 * t)

    def to_dict(self):
        if not hasattr(self.G, "to_dict"):
            raise TypeError("G is not serializable")
        z = complex(self.k1), complex(self.dk1)
        return {"mu": self.mu, "G": self.G.to_dict(), "k1": [z[0].real, z[0].imag],
                "dk1": [z[1].real, z[1].imag], "t1": self.t1, "t0": self.t0}

    @classmethod
    def from_dict(cls, d):
        return cls(d["mu"], SyntheticG.from_dict(d["G"]), complex(*d["k1"]), complex(*d["dk1"]),
                   d["t1"], d["t0"])


def _integral(func, a, b, tol=1e-13):
    if a == b:
        return np.zeros(2, dtype=complex)
    panels = max(2, int(np.ceil(abs(b - a))))
    val, _ = _quad.adaptive_composite(func, a, b, panels=panels, order=16, tol=tol)
    return val


def _weighted(prob):
    w1, w2 = prob.weights()

    def integrand(x):
        g = prob.G(x)
        return np.stack([w1(x) * g, w2(x) * g], axis=-1)

    return integrand


def solve_closed_form(prob, t, derivative=False):
    """k(t) from the variation-of-constants formula; t scalar or array.

    With ``derivative=True`` returns k'(t) instead (the integral terms
    contribute nothing to the derivative).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr <= prob.t0):
        raise ValueError("t must exceed t0")
    c1, c2 = prob.constants()
    integrand = _weighted(prob)
    order = np.argsort(t_arr)
    acc = np.zeros(2, dtype=complex)
    last = prob.t1
    ints = np.empty((t_arr.size, 2), dtype=complex)
    # integrals from t1 accumulated in increasing |t - t1| on each side
    for side in (order[t_arr[order] >= prob.t1], order[t_arr[order] < prob.t1][::-1]):
        acc = np.zeros(2, dtype=complex)
        last = prob.t1
        for i in side:
            acc = acc + _integral(integrand, last, t_arr[i])
            last = t_arr[i]
            ints[i] = acc
    y1, y2 = prob.homogeneous(t_arr, derivative)
    k = y1 * (c1 + ints[:, 0]) + y2 * (c2 + ints[:, 1])
    return complex(k[0]) if np.ndim(t) == 0 else k


def rk4_solve(prob, t_grid, tol=1e-10, h0=0.01, h_min=1e-8):
    """Adaptive classical RK4 with step doubling, started at t1.

    Steps are clipped to land on every point of ``t_grid`` (all >= t1);
    returns k there.  Independent of the closed form.
    """
    mu, G = prob.mu, prob.G

    def rhs(t, y):
        return np.array([y[1], np.exp(-t) * complex(G(t)) - y[1] - mu * y[0]])

    def step(t, y, h):
        a = rhs(t, y)
        b = rhs(t + h / 2, y + h / 2 * a)
        c = rhs(t + h / 2, y + h / 2 * b)
        d = rhs(t + h, y + h * c)
        return y + h / 6 * (a + 2 * b + 2 * c + d)

    targets = np.asarray(t_grid, dtype=float)
    if np.any(targets < prob.t1):
        raise ValueError("grid points must not precede t1")
    order = np.argsort(targets)
    out = np.empty(targets.size, dtype=complex)
    t, y, h = prob.t1, np.array([prob.k1, prob.dk1], dtype=complex), h0
    for i in order:
        goal = targets[i]
        while goal - t > 1e-14:
            hh = min(h, goal - t)
            full = step(t, y, hh)
            half = step(t + hh / 2, step(t, y, hh / 2), hh / 2)
            err = np.max(np.abs(half - full)) / 15
            if err <= tol or hh <= h_min:
                t = goal if hh == goal - t else t + hh
                y = half + (half - full) / 15
            h = hh * min(4.0, max(0.1, 0.9 * (tol / max(err, 1e-300)) ** 0.2))
        out[i] = y[0]
    return out


# coefficient extraction -----------------------------------------------------


@dataclass
class ExpansionCoefficients:
    """Leading coefficients of k(t) and the fitted remainder constant.

    Conventions for ``leading(t)``:
      mu > 1/4:      e^{-t/2} (cos(r t) D+ + sin(r t) D-),  nu = 2 i r
      0 < mu < 1/4:  e^{-(1+nu) t/2} D+ + e^{-(1-nu) t/2} D-
      mu = 1/4:      e^{-t/2} D+ + t e^{-t/2} D-
    """

    D_plus: complex
    D_minus: complex
    remainder_constant: float
    case: str
    nu: complex
    t1: float
    tail_end: float = None

    def leading(self, t):
        t = np.asarray(t, dtype=float)
        if self.case == "mu>1/4":
            r = self.nu.imag / 2
            return np.exp(-t / 2) * (np.cos(r * t) * self.D_plus + np.sin(r * t) * self.D_minus)
        if self.case == "mu=1/4":
            return np.exp(-t / 2) * (self.D_plus + t * self.D_minus)
        return (np.exp(-(1 + self.nu.real) * t / 2) * self.D_plus
                + np.exp(-(1 - self.nu.real) * t / 2) * self.D_minus)

    def to_dict(self):
        def c(z):
            return [complex(z).real, complex(z).imag]

        return {"D_plus": c(self.D_plus), "D_minus": c(self.D_minus),
                "remainder_constant": self.remainder_constant, "case": self.case,
                "nu": c(self.nu), "t1": self.t1, "tail_end": self.tail_end}


def probe_sup(G, t1, span=50.0, points=501):
    """sup |G| on a probe grid; raises UnboundedG if it grows through the last decade."""
    grid = t1 + np.linspace(0.0, span, points)
    vals = np.abs(np.asarray(G(grid), dtype=complex))
    if not np.all(np.isfinite(vals)):
        raise UnboundedG("G is not finite on the probe grid")
    tail = vals[-(points // 10):]
    if np.all(np.diff(tail) > 0) and tail[-1] > 2 * tail[0]:
        raise UnboundedG("|G| increases monotonically over the last decade of the probe grid")
    return float(vals.max())


def extract_coefficients(prob, probe=None):
    """D+ and D- from tail integrals, plus the remainder constant C.

    C is the max over ``probe`` (default [t1 + 2, t1 + 10]) of
    |k(t) - leading(t)| / ((t + 1) e^{-t}).
    """
    if prob.mu <= 0:
        raise ValueError("coefficient extraction needs mu > 0")
    sup_g = probe_sup(prob.G, prob.t1)
    c1, c2 = prob.constants()
    decay = 0.5 if prob.quarter else (1 - prob.nu.real) / 2
    bound = max(sup_g, 1e-300) * (prob.t1 + 1)
    tail_end = prob.t1 + max(1.0, np.log(bound / TAIL_LEVEL) / decay)
    if prob.quarter:
        # polynomial factor in the weight; extend until it is negligible too
        while tail_end * np.exp(-decay * tail_end) * sup_g > TAIL_LEVEL:
            tail_end += 1.0
    full = _integral(_weighted(prob), prob.t1, tail_end)
    if prob.quarter:
        d_plus, d_minus = c1 + full[0], c2 + full[1]
    else:
        # raw pair multiplying e^{-(1+nu)t/2} and e^{-(1-nu)t/2}
        raw_plus, raw_minus = c2 + full[1], c1 + full[0]
        if prob.case == "mu>1/4":
            d_plus, d_minus = raw_plus + raw_minus, 1j * (raw_minus - raw_plus)
        else:
            d_plus, d_minus = raw_plus, raw_minus
    coef = ExpansionCoefficients(complex(d_plus), complex(d_minus), 0.0, prob.case, prob.nu,
                                 prob.t1, float(tail_end))
    grid = prob.t1 + np.linspace(2.0, 10.0, 41) if probe is None else np.asarray(probe, float)
    k = solve_closed_form(prob, grid)
    ratio = np.abs(k - coef.leading(grid)) / ((grid + 1) * np.exp(-grid))
    coef.remainder_constant = float(ratio.max())
    return coef


def problem_from_curve(W, f, p, sigma, mu, t1=None, order=16, margin=0.1):
    """OdeProblem for a Casimir eigenfunction f, with G assembled from boundary terms."""
    start = t0(W, margin)
    t1 = start + 1.0 if t1 is None else t1
    cfg = TranslateConfig(W, sigma, p, order=order)
    k1, dk1, _ = derivative_averages(cfg, f, t1)

    def G(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.array([assemble_G(W, f, p, sigma, s, order) for s in t])

    return OdeProblem(mu, G, k1, dk1, t1, start)
