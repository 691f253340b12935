"""A cocompact Fuchsian group (Bolza octagon group) and functions on Gamma \\ SL(2,R).

Points of Y = Gamma \\ SL(2,R) are represented by matrices g whose base point
g.i lies in the Dirichlet domain centered at i, which for the shipped
group is the regular octagon with interior angles pi/4.  Reduction is the
greedy descent on d(g.i, i), i.e. on the Frobenius norm since
cosh d(g.i, i) = |g|_F^2 / 2.
"""

import json
from collections import deque
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .exceptions import NonTermination
from .lie import HyperbolicBump, ProductFunction, VonMisesFiber
from .sl2 import X, cayley, exp_lie, from_iwasawa, inverse, inverse_cayley, iwasawa, moebius, renormalize

MAX_STEPS = 100_000
DECREASE_TOL = 1e-12


def _frob2(g):
    return np.sum(g * g, axis=(-2, -1))


def base_point(g):
    """g . i as complex numbers."""
    g = np.asarray(g, dtype=float)
    a, b, c, d = g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]
    den = c * c + d * d
    return (a * c + b * d) / den + 1j / den


def distance_to_i(g):
    """d(g.i, i) from the Frobenius norm."""
    return np.arccosh(np.maximum(_frob2(np.asarray(g, float)) / 2.0, 1.0))


@dataclass
class ReducedPoint:
    matrix: np.ndarray
    word: list = field(default_factory=list)

    @property
    def base(self):
        return complex(base_point(self.matrix))


class FuchsianGroup:
    """Finitely generated cocompact group given by Dirichlet side pairings."""

    def __init__(self, generators, inverse_of=None, relator=None, circumradius=None,
                 inradius=None, area=None, name="custom"):
        gens = np.asarray(generators, dtype=float)
        if gens.ndim != 3 or gens.shape[1:] != (2, 2):
            raise ValueError("generators must have shape (n, 2, 2)")
        if np.max(np.abs(np.linalg.det(gens) - 1)) > 1e-12:
            raise ValueError("generators must have determinant 1")
        self.generators = renormalize(gens)
        self.name = name
        n = len(self.generators)
        traces = np.abs(np.trace(self.generators, axis1=1, axis2=2))
        if np.any(traces <= 2):
            raise ValueError("generators must be hyperbolic")
        self.inverse_of = list(inverse_of) if inverse_of is not None else None
        self.relator = list(relator) if relator is not None else None
        if self.relator is not None and self.relator_residual() > 1e-9:
            raise ValueError("relator does not evaluate to +-identity")
        self.circumradius = circumradius
        self.inradius = inradius
        self.area = area
        self.n_generators = n

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls._from_data(json.load(fh))

    @classmethod
    def bolza(cls):
        text = resources.files("equilab").joinpath("data/bolza.json").read_text()
        return cls._from_data(json.loads(text))

    @classmethod
    def _from_data(cls, d):
        gens = [[[float(v) for v in row] for row in g] for g in d["generators"]]
        return cls(gens, d.get("inverse_of"), d.get("relator"),
                   float(d["circumradius"]) if "circumradius" in d else None,
                   float(d["inradius"]) if "inradius" in d else None,
                   float(d["area"]) if "area" in d else None,
                   d.get("name", "custom"))

    def relator_residual(self):
        m = np.eye(2)
        for j in self.relator:
            m = m @ self.generators[j]
        return float(min(np.abs(m - np.eye(2)).max(), np.abs(m + np.eye(2)).max()))

    # reduction -----------------------------------------------------------

    def reduce(self, g):
        """Greedy reduction of a single element, recording the word."""
        g = renormalize(np.asarray(g, dtype=float))
        word = []
        cur = _frob2(g)
        for _ in range(MAX_STEPS):
            cand = self.generators @ g
            norms = _frob2(cand)
            j = int(np.argmin(norms))
            if not norms[j] < cur * (1 - DECREASE_TOL):
                return ReducedPoint(g, word)
            g, cur = renormalize(cand[j]), norms[j]
            word.append(j)
        raise NonTermination("reduction exceeded its step budget")

    def reduce_batch(self, g):
        """Reduce an array (..., 2, 2); returns the reduced matrices."""
        g = renormalize(np.array(g, dtype=float))
        shape = g.shape
        g = g.reshape(-1, 2, 2)
        G = self.generators
        active = np.arange(len(g))
        for _ in range(MAX_STEPS):
            if active.size == 0:
                return g.reshape(shape)
            a, b = g[active, 0, 0], g[active, 0, 1]
            c, d = g[active, 1, 0], g[active, 1, 1]
            cur = a * a + b * b + c * c + d * d
            # squared Frobenius norms of gen_k @ g for every generator
            norms = np.empty((G.shape[0], active.size))
            for k, m in enumerate(G):
                r00 = m[0, 0] * a + m[0, 1] * c
                r01 = m[0, 0] * b + m[0, 1] * d
                r10 = m[1, 0] * a + m[1, 1] * c
                r11 = m[1, 0] * b + m[1, 1] * d
                norms[k] = r00 * r00 + r01 * r01 + r10 * r10 + r11 * r11
            j = np.argmin(norms, axis=0)
            best = norms[j, np.arange(active.size)]
            move = best < cur * (1 - DECREASE_TOL)
            idx = active[move]
            g[idx] = G[j[move]] @ g[idx]
            active = idx
        raise NonTermination("reduction exceeded its step budget")

    def in_domain(self, z, tol=1e-9):
        """Whether points z lie in the closed Dirichlet domain centered at i."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        d0 = _cosh_dist_i(z)
        ok = np.ones(z.shape, dtype=bool)
        for gen in self.generators:
            ok &= d0 <= _cosh_dist_i(moebius(gen, z)) * (1 + tol)
        return ok

    # enumeration ---------------------------------------------------------

    def elements_within(self, radius):
        """All group elements gamma with d(gamma.i, i) <= radius.

        Breadth-first search in the Cayley graph of the side pairings.  Tiles
        meeting a geodesic segment from i lie within one circumradius of
        it, so the search explores up to radius + circumradius.
        """
        reach = radius + (self.circumradius or 3.0) + 0.5
        start = np.eye(2)
        seen = {_key(start): start}
        queue = deque([start])
        while queue:
            g = queue.popleft()
            for gen in self.generators:
                h = renormalize(gen @ g)
                k = _key(h)
                if k in seen or distance_to_i(h) > reach:
                    continue
                seen[k] = h
                queue.append(h)
        out = np.array(list(seen.values()))
        return out[distance_to_i(out) <= radius]

    # sampling ------------------------------------------------------------

    def sample_haar(self, n, seed=None):
        """n reduced matrices distributed by the invariant probability on Y."""
        rng = np.random.default_rng(seed)
        R = self.circumradius
        pts = np.empty(0, dtype=complex)
        while pts.size < n:
            m = 2 * (n - pts.size) + 16
            rho = np.arccosh(1 + rng.random(m) * (np.cosh(R) - 1))
            w = np.tanh(rho / 2) * np.exp(2j * np.pi * rng.random(m))
            z = inverse_cayley(w)
            pts = np.concatenate([pts, z[self.in_domain(z)]])
        z = pts[:n]
        theta = 2 * np.pi * rng.random(n)
        return from_iwasawa(z.real, z.imag, theta)


def _cosh_dist_i(z):
    return 1.0 + np.abs(z - 1j) ** 2 / (2 * z.imag)


def _key(g):
    w = complex(cayley(base_point(g)))
    return (round(w.real, 8), round(w.imag, 8))


def flow_reduced(g, t, group=None, step=1.0):
    """g exp(tX), reducing after every ``step`` units of geodesic time."""
    g = np.asarray(g, dtype=float)
    if group is None:
        return renormalize(g @ exp_lie(X, t))
    n = int(np.ceil(abs(t) / step)) if t else 0
    for k in range(n):
        dt = np.sign(t) * min(step, abs(t) - k * step)
        g = group.reduce_batch(g @ exp_lie(X, dt))
    return g


def geodesic_circle_points(q, t, s_grid, group):
    """Reduced points q exp(s Theta) exp(t X) for s in ``s_grid``."""
    from .sl2 import THETA

    if t < 0:
        raise ValueError("t must be nonnegative")
    s_grid = np.asarray(s_grid, dtype=float)
    g = np.asarray(q, float) @ exp_lie(THETA, s_grid)
    return flow_reduced(group.reduce_batch(g), t, group)


class BundleObservable:
    """Gamma-periodization f(g) = sum_gamma psi(gamma g) of a compact bump.

    psi(g) = S(g.i) Phi(theta(g)) with S a smooth bump of hyperbolic radius
    ``radius`` around ``center`` and Phi = exp(kappa (cos 2(theta - theta_c) - 1)).
    ``shell`` is extra slack added to the enumeration radius.
    """

    def __init__(self, group, center=1j, radius=1.5, kappa=1.0, theta_c=0.0, shell=0.25):
        self.group = group
        self.bump = HyperbolicBump(center, radius)
        self.fiber = VonMisesFiber(kappa, theta_c)
        self.psi = ProductFunction(self.bump, self.fiber)
        self.shell = shell
        c = complex(center)
        reach = radius + group.circumradius + shell
        elems = group.elements_within(reach + np.arccosh(_cosh_dist_i(np.array([c])))[0])
        # keep gamma whose translate of the ball can meet the fundamental domain
        pre = moebius(inverse(elems), c)
        self.elements = elems[np.arccosh(_cosh_dist_i(pre)) <= reach]

    def _terms(self, g):
        g0 = self.group.reduce_batch(np.asarray(g, float).reshape(-1, 2, 2))
        z0 = base_point(g0)
        z = moebius(self.elements[None, :], z0[:, None])
        cosh_d = self.bump.cosh_distance(z.real, z.imag)
        hit = np.nonzero(cosh_d < np.cosh(self.bump.radius))
        prods = self.elements[hit[1]] @ g0[hit[0]]
        return g0, hit[0], prods

    def _sum(self, vals, rows, n):
        out = np.zeros(n, dtype=complex)
        np.add.at(out, rows, vals)
        return out

    def __call__(self, g):
        g = np.asarray(g, float)
        shape = g.shape[:-2]
        _, rows, prods = self._terms(g)
        return self._sum(self.psi(prods), rows, int(np.prod(shape, dtype=int))).reshape(shape)

    def lie(self, Z, g):
        g = np.asarray(g, float)
        shape = g.shape[:-2]
        _, rows, prods = self._terms(g)
        return self._sum(self.psi.lie(Z, prods), rows, int(np.prod(shape, dtype=int))).reshape(shape)

    def lie2(self, Z1, Z2, g):
        g = np.asarray(g, float)
        shape = g.shape[:-2]
        _, rows, prods = self._terms(g)
        vals = self.psi.lie2(Z1, Z2, prods)
        return self._sum(vals, rows, int(np.prod(shape, dtype=int))).reshape(shape)

    def mean(self):
        """Exact integral against the invariant probability measure."""
        return self.bump.integral() / self.group.area * self.fiber.mean()


# cell partition of the octagon x fiber -----------------------------------

N_SECTORS = 8
N_FIBER = 4
INNER_COSH = 2.0


def cell_index(g):
    """Cell of reduced points: 8 sectors x 2 radial shells x 4 fiber bins."""
    z = base_point(g)
    w = cayley(z)
    phi = np.mod(np.angle(w), 2 * np.pi)
    sector = np.minimum((phi / (2 * np.pi / N_SECTORS)).astype(int), N_SECTORS - 1)
    shell = (_cosh_dist_i(z) >= INNER_COSH).astype(int)
    theta = np.mod(iwasawa(g)[2], np.pi)
    fiber = np.minimum((theta / (np.pi / N_FIBER)).astype(int), N_FIBER - 1)
    return (sector * 2 + shell) * N_FIBER + fiber


def cell_histogram(g, weights=None):
    idx = cell_index(g).ravel()
    counts = np.bincount(idx, weights=None if weights is None else np.ravel(weights),
                         minlength=2 * N_SECTORS * N_FIBER)
    return counts / counts.sum()


def cell_masses(group):
    """Invariant masses of the cells; the inner disk must fit in the octagon."""
    r_in = np.arccosh(INNER_COSH)
    if group.inradius is None or r_in > group.inradius:
        raise ValueError("inner shell radius exceeds the inradius")
    inner = 2 * np.pi * (INNER_COSH - 1) / group.area
    per = np.array([inner, 1 - inner]) / N_SECTORS / N_FIBER
    return np.tile(np.repeat(per, N_FIBER), N_SECTORS)


def total_variation(p, q):
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))
