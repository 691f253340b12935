import numpy as np
import pytest

from equilab.checks import CASES, random_problem, t1_invariance
from equilab.exceptions import IllConditionedInitialData, SingularDenominator, UnboundedG
from equilab.lie import GaussianEnvelope, HyperbolicBump, PowerEnvelope
from equilab.ode import (EigenObservable, OdeProblem, SyntheticG, assemble_G, case_tag,
                         curve_data, extract_coefficients, lemma61_lhs_rhs, lemma62_derivative,
                         nu_of, ode_residual, probe_sup, problem_from_curve, rk4_solve,
                         solve_closed_form, t0, u2_average_printed, _quadrature_averages)
from equilab.sl2 import THETA, U, X, LieVector, from_iwasawa
from equilab.translates import TranslateConfig, translate_average

P = from_iwasawa(0.3, 0.8, 0.5)
W = LieVector(0.4, 1.1, -0.3)
F = EigenObservable(GaussianEnvelope(0.2, 1.0, 0.9), 2)


def zero_g():
    return SyntheticG([0.0], [0.0])


def test_nu_branch():
    assert nu_of(0.0) == 1
    assert nu_of(0.25) == 0
    assert np.isclose(nu_of(0.5), 1j)
    for mu in (-1.0, 0.1, 0.3, 2.0):
        nu = nu_of(mu)
        assert abs(1 - nu**2 - 4 * mu) < 1e-12
        assert (nu.imag == 0 and nu.real >= 0) or (nu.real == 0 and nu.imag > 0)
    assert [case_tag(m) for m in (0.5, 0.1, 0.25, -0.2)] == ["mu>1/4", "0<mu<1/4", "mu=1/4", "mu<=0"]


def test_homogeneous_mu_zero():
    prob = OdeProblem(0.0, zero_g(), 2.0, -0.5, t1=1.0, t0=0.0)
    c2 = 0.5 * np.exp(1.0)
    t = np.linspace(1.5, 6, 10)
    assert np.allclose(solve_closed_form(prob, t), 2.0 - c2 * np.exp(-1.0) + c2 * np.exp(-t))


def test_mu_half_constant_forcing_vs_rk4():
    prob = OdeProblem(0.5, SyntheticG([1.0], [0.0]), 0.0, 0.0, t1=1.0, t0=0.5)
    grid = prob.t1 + np.linspace(0, 10, 41)
    assert np.max(np.abs(solve_closed_form(prob, grid) - rk4_solve(prob, grid))) < 1e-8


@pytest.mark.parametrize("case", list(CASES))
def test_closed_form_vs_rk4_random(case):
    rng = np.random.default_rng(hash(case) % 1000)
    for _ in range(5):
        prob = random_problem(rng, case)
        grid = prob.t1 + np.linspace(0, 10, 41)
        assert np.max(np.abs(solve_closed_form(prob, grid) - rk4_solve(prob, grid))) < 1e-8


def test_closed_form_solves_the_ode():
    prob = OdeProblem(0.25, SyntheticG([1 + 1j, 0.3], [0.7, -1.1]), 0.4, -0.2, t1=1.0, t0=0.0)
    t, h = 3.3, 1e-3
    k = solve_closed_form(prob, np.array([t - h, t, t + h]))
    d2 = (k[2] - 2 * k[1] + k[0]) / h**2
    d1 = solve_closed_form(prob, t, derivative=True)
    assert abs(d2 + d1 + 0.25 * k[1] - np.exp(-t) * prob.G(t)) < 1e-6


def test_branch_continuity():
    g = SyntheticG([0.7, -0.2j], [0.5, 1.3])
    grid = 1.0 + np.linspace(0, 5, 26)
    base = solve_closed_form(OdeProblem(0.25, g, 0.3, 0.1, 1.0, 0.0), grid)
    for mu in (0.25 - 1e-6, 0.25 + 1e-6):
        other = solve_closed_form(OdeProblem(mu, g, 0.3, 0.1, 1.0, 0.0), grid)
        assert np.max(np.abs(other - base)) < 1e-4


def test_ill_conditioned_initial_data():
    prob = OdeProblem(0.01, zero_g(), 1.0, 0.0, t1=60.0, t0=0.0)
    with pytest.raises(IllConditionedInitialData):
        solve_closed_form(prob, 61.0)


def test_zero_forcing_coefficients():
    prob = OdeProblem(0.1, zero_g(), 1.0, 0.3, t1=1.0, t0=0.0)
    c1, c2 = prob.constants()
    coef = extract_coefficients(prob)
    assert np.isclose(coef.D_plus, c2) and np.isclose(coef.D_minus, c1)
    assert coef.remainder_constant < 1e-12


def test_tail_integrals_closed_form():
    mu, t1 = 0.15, 1.2
    prob = OdeProblem(mu, SyntheticG([0.0], [0.0], 1.0, 1.0), 0.5, -0.1, t1=t1, t0=0.0)
    nu = prob.nu.real
    c1, c2 = prob.constants()
    d_plus = c2 - (1 / nu) * 2 * np.exp(-(3 - nu) * t1 / 2) / (3 - nu)
    d_minus = c1 + (1 / nu) * 2 * np.exp(-(3 + nu) * t1 / 2) / (3 + nu)
    coef = extract_coefficients(prob)
    assert abs(coef.D_plus - d_plus) < 1e-10
    assert abs(coef.D_minus - d_minus) < 1e-10


@pytest.mark.parametrize("case", list(CASES))
def test_remainder_and_t1_invariance(case):
    rng = np.random.default_rng(7)
    prob = random_problem(rng, case)
    diff, a, _ = t1_invariance(prob)
    assert diff < 1e-8
    assert np.isfinite(a.remainder_constant) and a.remainder_constant < 1e3
    grid = prob.t1 + np.linspace(2, 10, 17)
    rem = np.abs(solve_closed_form(prob, grid) - a.leading(grid))
    assert np.all(rem <= a.remainder_constant * (grid + 1) * np.exp(-grid) * (1 + 1e-9))


def test_unbounded_g_and_precondition():
    with pytest.raises(UnboundedG):
        probe_sup(lambda t: np.exp(0.2 * t), 1.0)
    grow = OdeProblem(0.1, lambda t: np.exp(0.2 * np.asarray(t)), 0.0, 0.0, 1.0, 0.0)
    with pytest.raises(UnboundedG):
        extract_coefficients(grow)
    with pytest.raises(ValueError):
        extract_coefficients(OdeProblem(-0.5, zero_g(), 0.0, 0.0, 1.0, 0.0))
    with pytest.raises(ValueError):
        OdeProblem(0.1, zero_g(), 0.0, 0.0, t1=0.0, t0=1.0)


def test_problem_serialization():
    prob = OdeProblem(0.3, SyntheticG([1 + 2j], [0.4], 0.5j, 0.7), 1j, 2.0, 1.5, 0.5)
    again = OdeProblem.from_dict(prob.to_dict())
    grid = np.array([2.0, 4.0])
    assert np.allclose(solve_closed_form(prob, grid), solve_closed_form(again, grid))


def test_eigen_observable_theta_relation(rng):
    g = from_iwasawa(0.1, 1.4, 2.0)
    assert F.theta_defect(g, rng.uniform(0, 6)) < 1e-10


def test_t0_threshold():
    Wd = LieVector.from_xtr(0.0, 1.0, 0.5)  # gamma + beta > 0 > gamma - beta
    root = -0.5 * np.log(1.5 / 0.5)
    assert np.isclose(t0(Wd), max(root + 0.1, 0.1))
    Wn = LieVector.from_xtr(0.0, -1.0, 0.5)  # root at t = 0.5 log 3
    assert np.isclose(t0(Wn), 0.5 * np.log(3) + 0.1)
    with pytest.raises(SingularDenominator):
        t0(LieVector.from_xtr(0.3, 1.0, -1.0))


def test_lemma61_identities():
    for n in (0, 2, -1):
        f = EigenObservable(HyperbolicBump(0.1 + 1.1j, 1.4), n)
        a, b = lemma61_lhs_rhs(W, f, P, 1.7, t0(W) + 1.3)
        assert a.residual < 1e-7 and b.residual < 1e-7


def test_lemma61_horocycle_direction_n0():
    f = EigenObservable(GaussianEnvelope(0.0, 1.2, 0.8), 0)
    a, b = lemma61_lhs_rhs(U, f, P, 1.1, 1.0)
    cd = curve_data(U, f, P, 1.1, 1.0)
    # alpha = 0 and n = 0: I[Uf] = A / D
    assert np.isclose(a.rhs, cd.A / cd.denominator)
    assert a.residual < 1e-7 and b.residual < 1e-7


def test_printed_second_identity_differs():
    t, sigma = t0(W) + 1.0, 1.3
    cd = curve_data(W, F, P, sigma, t, 24)
    exact = _quadrature_averages(W, F, P, sigma, t, 24, 0.5)[1]
    assert abs(u2_average_printed(cd) - exact) > 1e-4 * (1 + abs(exact))


def test_singular_denominator():
    Wn = LieVector.from_xtr(0.2, -1.0, 0.5)
    with pytest.raises(SingularDenominator):
        lemma61_lhs_rhs(Wn, F, P, 1.0, 0.5 * np.log(3))


def test_lemma62_cases(rng):
    Z1, Z2 = LieVector(0.3, -0.5, 0.8), LieVector(-0.2, 0.9, 0.1)
    assert lemma62_derivative(Z1, Z2, P, 0.7, -0.4) < 1e-8
    assert lemma62_derivative(Z1, Z2, P, 0.0, 0.3) < 1e-8
    assert lemma62_derivative(Z1, LieVector(0, 0, 0), P, 0.7, 0.3) == 0


def test_assembled_G_matches_quadrature():
    sigma = 1.4
    for t in (t0(W) + 0.5, t0(W) + 2.0):
        G = assemble_G(W, F, P, sigma, t, order=24)
        _, iuu, _ = _quadrature_averages(W, F, P, sigma, t, 24, 1.0)
        iu = _quadrature_averages(W, F, P, sigma, t, 24, 1.0)[0]
        expected = -(iuu - 2j * iu)
        assert abs(np.exp(-t) * G - expected) < 1e-7 * (1 + abs(expected))


def test_G_bounded_and_limit():
    f = EigenObservable(HyperbolicBump(0.2 + 1.0j, 1.3), 0)
    sigma = 1.2
    start = t0(W)
    grid = start + np.linspace(1, 10, 19)
    G = np.array([assemble_G(W, f, P, sigma, t) for t in grid])
    assert np.all(np.isfinite(G)) and np.max(np.abs(G)) < 1e3
    cd = curve_data(W, f, P, sigma, grid[-1])
    limit = -cd.B / (W.gamma + W.beta)
    assert abs(G[-1] - limit) < 1e-2 * (1 + abs(limit))


@pytest.mark.parametrize("s", [0.7, 0.5, 0.5 + 1.3j])
def test_ode_holds_for_casimir_eigenfunctions(s):
    f = EigenObservable(PowerEnvelope(s), 0)
    mu = (s * (1 - s)).real
    for t in (1.0, 3.0):
        assert ode_residual(W, f, P, 1.2, t, mu) < 1e-10
        assert ode_residual(W, f, P, 1.2, t, mu + 0.3) > 1e-3


@pytest.mark.parametrize("s", [0.7, 0.5, 0.5 + 1.3j])
def test_pipeline_reproduces_curve_averages(s):
    f = EigenObservable(PowerEnvelope(s), 0)
    mu = (s * (1 - s)).real
    prob = problem_from_curve(W, f, P, 1.2, mu)
    cfg = TranslateConfig(W, 1.2, P)
    grid = prob.t1 + np.array([0.5, 3.0])
    direct = np.array([translate_average(cfg, f, t)[0] for t in grid])
    assert np.max(np.abs(solve_closed_form(prob, grid) - direct)) < 1e-8
