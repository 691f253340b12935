"""Randomized verification suites for the Lie algebra and ODE machinery.

Each suite returns a list of records (dicts) with an ``error`` and a
``passed`` flag at the stated tolerance.
"""

import numpy as np

from .lie import GaussianEnvelope
from .ode import (EigenObservable, OdeProblem, SyntheticG, extract_coefficients, lemma61_lhs_rhs,
                  lemma62_derivative, rk4_solve, solve_closed_form, t0)
from .sl2 import THETA, U, V, X, LieVector, adjoint, bracket, exp_lie, from_iwasawa

LIE_TOL = 1e-9
LEMMA61_TOL = 1e-7
LEMMA62_TOL = 1e-8
LEMMA64_TOL = 1e-8

CASES = {"mu>1/4": (0.3, 3.0), "0<mu<1/4": (0.02, 0.23), "mu=1/4": (0.25, 0.25)}


def random_lie(rng, scale=1.0):
    return LieVector(*(scale * rng.normal(size=3)))


def random_point(rng):
    return from_iwasawa(rng.normal() * 0.5, np.exp(0.4 * rng.normal()), rng.uniform(0, 2 * np.pi))


def _rec(kind, error, tol, **extra):
    return dict(kind=kind, error=float(error), tol=tol, passed=bool(error <= tol), **extra)


def lie_identity_suite(n=50, seed=0):
    """Ad formula for exp(tX), bracket relations, geodesic-horocycle commutation."""
    rng = np.random.default_rng(seed)
    out = []
    for basic, (Z1, Z2, Z3) in {"[X,U]=U": (X, U, U), "[X,V]=-V": (X, V, -1.0 * V),
                                "[U,V]=2X": (U, V, 2.0 * X),
                                "[Theta,U]=2X": (THETA, U, 2.0 * X)}.items():
        err = np.max(np.abs(bracket(Z1, Z2).matrix - Z3.matrix))
        out.append(_rec("bracket " + basic, err, LIE_TOL))
    for i in range(n):
        W = random_lie(rng)
        t = rng.uniform(-3, 3)
        a, b, g = W.alpha, W.beta, W.gamma
        expected = (a * X.matrix + (g + b) * np.exp(t) * U.matrix
                    + (g - b) * np.exp(-t) * V.matrix)
        direct = exp_lie(X, t) @ W.matrix @ exp_lie(X, -t)
        err = max(np.max(np.abs(direct - expected)),
                  np.max(np.abs(adjoint(exp_lie(X, t), W).matrix - expected)))
        out.append(_rec("adjoint", err / (1 + np.abs(expected).max()), LIE_TOL, instance=i))
        p, s = random_point(rng), rng.uniform(-3, 3)
        lhs = p @ exp_lie(U, s) @ exp_lie(X, t)
        rhs = p @ exp_lie(X, t) @ exp_lie(U, np.exp(-t) * s)
        out.append(_rec("commutation", np.max(np.abs(lhs - rhs)) / (1 + np.abs(lhs).max()),
                        LIE_TOL, instance=i))
    return out


def lemma62_suite(n=100, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        Z1, Z2 = random_lie(rng, 0.7), random_lie(rng, 0.7)
        err = lemma62_derivative(Z1, Z2, random_point(rng), rng.uniform(-1.5, 1.5),
                                 rng.uniform(-1.5, 1.5))
        out.append(_rec("lemma62", err, LEMMA62_TOL, instance=i))
    return out


def lemma61_suite(n=30, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        W = random_lie(rng)
        while abs(W.gamma + W.beta) < 0.1:
            W = random_lie(rng)
        env = GaussianEnvelope(rng.normal(), np.exp(0.5 * rng.normal()), rng.uniform(0.5, 1.5))
        f = EigenObservable(env, int(rng.integers(-3, 4)))
        sigma = rng.uniform(0.3, 3.0)
        t = t0(W) + rng.uniform(0.0, 3.0)
        first, second = lemma61_lhs_rhs(W, f, random_point(rng), sigma, t)
        out.append(_rec("lemma61 Uf", first.residual, LEMMA61_TOL, instance=i))
        out.append(_rec("lemma61 U2f", second.residual, LEMMA61_TOL, instance=i))
    return out


def random_problem(rng, case):
    lo, hi = CASES[case]
    mu = rng.uniform(lo, hi)
    t_start = rng.uniform(0.0, 1.0)
    return OdeProblem(mu, SyntheticG.random(rng), complex(*rng.normal(size=2)),
                      complex(*rng.normal(size=2)), t_start + 1.0, t_start)


def lemma64_suite(n=50, seed=0, cases=tuple(CASES)):
    """Closed form against RK4 on [t1, t1 + 10], and t1-invariance of D+-."""
    rng = np.random.default_rng(seed)
    out = []
    for case in cases:
        for i in range(n):
            prob = random_problem(rng, case)
            grid = prob.t1 + np.linspace(0.0, 10.0, 51)
            err = np.max(np.abs(solve_closed_form(prob, grid) - rk4_solve(prob, grid)))
            out.append(_rec("lemma64 " + case, err, LEMMA64_TOL, instance=i, mu=prob.mu))
    return out


def t1_invariance(prob, shift=1.0):
    """|D(t1) - D(t1 + shift)| for the same solution."""
    a = extract_coefficients(prob)
    t2 = prob.t1 + shift
    k2 = solve_closed_form(prob, t2)
    dk2 = solve_closed_form(prob, t2, derivative=True)
    moved = OdeProblem(prob.mu, prob.G, k2, dk2, t2, prob.t0)
    b = extract_coefficients(moved)
    return max(abs(a.D_plus - b.D_plus), abs(a.D_minus - b.D_minus)), a, b


SUITES = {"lie": lie_identity_suite, "lemma61": lemma61_suite, "lemma62": lemma62_suite,
          "lemma64": lemma64_suite}
