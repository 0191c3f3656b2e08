"""Frontier formulas, feedback laws, feasibility, and the two-fund property."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from regimefrontier import (
    DenominatorNonNegative,
    DimensionMismatch,
    FeedbackLaw,
    FrontierInputs,
    InfeasibleMarket,
    NegativeBeta,
    OutOfRangeTime,
    ZBelowMinimum,
    build_law,
    constant_market,
    feasible_portfolio,
    frontier_curve,
    lambda_star,
    min_variance,
    mutual_fund,
    optimal_control,
    variance_at,
    variance_minimum,
    z_minimum,
    z_zero,
)

from cases import R1, T, X0, single_gen, single_market, solved, two_gen, two_market

# Single regime without early exit collapses to closed forms:
#   p0 = 2 e^{(2r - theta^2) T},  g0 = e^{-rT},  Delta = 0,
#   Var(z) = (z - x0 e^{rT})^2 / (e^{theta^2 T} - 1),  z_min = x0 e^{rT}.
P0_EXACT = 2.0 * np.exp(0.04)
G0_EXACT = np.exp(-0.1)
GAMMA_F0 = 0.044280551632033975          # 0.2 (e^{0.2} - 1) = int psi^2 B^2 dt
LSTAR_GAP_Z12 = -1.7465310696805156      # lambda*(1.2) - 1.2
VAR_Z12 = 0.051827039580937595           # degenerate variance at z = 1.2


def exact_inputs(x0=1.0):
    return FrontierInputs(p0=P0_EXACT, g0=G0_EXACT, delta=0.0, x0=x0)


def degenerate_variance(z, x0=1.0):
    return (z - x0 * np.exp(R1 * T)) ** 2 / (np.exp(0.16 * T) - 1.0)


# --- input validation -------------------------------------------------------


def test_inputs_validated():
    with pytest.raises(DimensionMismatch):
        FrontierInputs(p0=0.0, g0=0.5, delta=0.0, x0=1.0)
    with pytest.raises(DimensionMismatch):
        FrontierInputs(p0=1.0, g0=1.5, delta=0.0, x0=1.0)
    with pytest.raises(DimensionMismatch):
        FrontierInputs(p0=1.0, g0=0.5, delta=-0.1, x0=1.0)


def test_wellposedness_guard():
    # p0 g0^2 + 2 Delta - 2 = 1.8 >= 0: every frontier formula must refuse.
    bad = FrontierInputs(p0=2.0, g0=1.0, delta=0.9, x0=1.0)
    assert bad.wellposedness_margin >= 0
    for fn in (lambda: lambda_star(bad, 1.2), lambda: z_minimum(bad),
               lambda: variance_minimum(bad), lambda: variance_at(bad, 1.2)):
        with pytest.raises(DenominatorNonNegative):
            fn()


def test_solver_inputs_match_closed_form():
    s = solved(single_market(), single_gen(), 0.0, h=1e-3)
    assert_allclose(s["inputs"].p0, P0_EXACT, atol=1e-8)
    assert_allclose(s["inputs"].g0, G0_EXACT, atol=1e-8)
    assert s["inputs"].delta == 0.0
    assert s["inputs"].wellposedness_margin < 0


# --- multiplier -------------------------------------------------------------


def test_lambda_star_value():
    assert_allclose(lambda_star(exact_inputs(), 1.2) - 1.2, LSTAR_GAP_Z12, atol=1e-14)


def test_lambda_star_affine_in_z():
    inputs = exact_inputs()
    ls = [lambda_star(inputs, z) for z in (1.0, 1.3, 1.6)]
    assert_allclose(ls[2] - ls[1], ls[1] - ls[0], atol=1e-12)
    slope = (ls[1] - ls[0]) / 0.3
    assert_allclose(slope, 1.0 + 2.0 / inputs.denominator, atol=1e-12)


# --- degenerate frontier ----------------------------------------------------


@pytest.mark.parametrize("z", [1.1, 1.2, 1.5])
def test_degenerate_variance_closed_form(z):
    pt = variance_at(exact_inputs(), z)
    assert_allclose(pt.variance, degenerate_variance(z), rtol=1e-12)
    assert pt.std_dev == pytest.approx(np.sqrt(pt.variance))


def test_degenerate_variance_frozen_value():
    assert_allclose(variance_at(exact_inputs(), 1.2).variance, VAR_Z12, rtol=1e-12)


def test_degenerate_vertex_is_riskless():
    inputs = exact_inputs()
    z_min = z_minimum(inputs)
    assert_allclose(z_min, np.exp(R1 * T), atol=1e-14)
    assert variance_minimum(inputs) == 0.0
    assert variance_at(inputs, z_min).variance == 0.0


def test_vertex_is_argmin():
    s = solved(single_market(), single_gen(), 0.5, h=1e-3)
    inputs = s["inputs"]
    z_min = z_minimum(inputs)
    v_min = variance_minimum(inputs)
    assert variance_at(inputs, z_min).variance == pytest.approx(v_min, abs=1e-15)
    for dz in (1e-3, 0.1, 0.5):
        up = variance_at(inputs, z_min + dz).variance
        dn = variance_at(inputs, z_min - dz).variance
        assert up > v_min and dn > v_min
        assert_allclose(up, dn, rtol=1e-10)


def test_min_variance_law_has_zero_multiplier():
    s = solved(single_market(), single_gen(), 0.5, h=1e-3)
    z_min, var_min, law = min_variance(s["sol"], single_market(), s["inputs"])
    assert law.lambda_star == 0.0
    assert z_min == pytest.approx(z_minimum(s["inputs"]))
    assert var_min == pytest.approx(variance_minimum(s["inputs"]))


def test_variance_homogeneous_in_scale():
    # Doubling (x0, z) multiplies the variance by 4 and lambda* by 2.
    a, b = exact_inputs(1.0), exact_inputs(2.0)
    for z in (1.2, 1.4):
        assert_allclose(variance_at(b, 2 * z).variance,
                        4.0 * variance_at(a, z).variance, rtol=1e-12)
        assert_allclose(lambda_star(b, 2 * z), 2.0 * lambda_star(a, z), rtol=1e-12)


# --- optimal feedback law ---------------------------------------------------


def test_optimal_control_single_regime():
    s = solved(single_market(), single_gen(), 0.0, h=1e-3)
    law = build_law(s["sol"], single_market(), s["inputs"], 1.2)
    slope, intercept = law.coefficients(0.0, 0)
    # -B / sigma^2 = -0.2 / 0.25
    assert_allclose(slope, [-0.8], atol=1e-15)
    hand = -0.8 * (1.0 + LSTAR_GAP_Z12 * G0_EXACT)
    assert_allclose(optimal_control(law, 0.0, 1.0, 0), [hand], atol=1e-8)
    assert_allclose(slope * 1.0 + intercept, optimal_control(law, 0.0, 1.0, 0))


def test_optimal_control_vanishes_at_bracket_root():
    s = solved(single_market(), single_gen(), 0.5, h=1e-3)
    law = build_law(s["sol"], single_market(), s["inputs"], 1.2)
    t = 0.37
    g_val = np.interp(t, s["sol"].grid, s["sol"].g[0])
    x_root = -(law.lambda_star - law.z) * g_val
    assert optimal_control(law, t, x_root, 0) == 0.0


def test_no_excess_return_sits_on_wellposedness_boundary():
    # With B = 0 the identity p g^2 + 2 Delta - 2 = 0 holds exactly: there is
    # no genuine risky opportunity and the frontier degenerates to one point.
    mkt = constant_market(R1, R1, 0.5, T)      # mu = r: B = 0
    s = solved(mkt, single_gen(), 0.5, h=1e-3)
    assert abs(s["inputs"].wellposedness_margin) <= 1e-8


def test_optimal_control_zero_for_zero_excess_return():
    # Whatever the multiplier, a vanishing market price of risk zeroes the law.
    mkt = constant_market(R1, R1, 0.5, T)
    s = solved(mkt, single_gen(), 0.5, h=1e-3)
    law = FeedbackLaw(solution=s["sol"], market=mkt, lambda_star=0.3, z=1.2)
    assert np.all(optimal_control(law, 0.4, 2.0, 0) == 0.0)


def test_optimal_control_time_range():
    s = solved(single_market(), single_gen(), 0.5, h=1e-3)
    law = build_law(s["sol"], single_market(), s["inputs"], 1.2)
    with pytest.raises(OutOfRangeTime):
        optimal_control(law, T + 0.5, 1.0, 0)
    with pytest.raises(OutOfRangeTime):
        optimal_control(law, -0.5, 1.0, 0)


# --- two-fund property --------------------------------------------------------


@pytest.mark.parametrize("beta", [0.0, 0.25, 0.5, 1.0, 2.0])
def test_mutual_fund_replicates_direct_law(beta):
    mkt, gen = two_market(), two_gen()
    s = solved(mkt, gen, 0.5, h=1e-3)
    law_a = build_law(s["sol"], mkt, s["inputs"], 1.1)
    law_b = build_law(s["sol"], mkt, s["inputs"], 1.6)
    blend = mutual_fund(law_a, law_b, beta)
    z_mix = (1.0 - beta) * 1.1 + beta * 1.6
    assert blend.z == pytest.approx(z_mix, abs=1e-12)
    direct = build_law(s["sol"], mkt, s["inputs"], z_mix)
    for t in (0.0, 0.37, T):
        for i in range(mkt.n_regimes):
            sa, ia = blend.coefficients(t, i)
            sd, idir = direct.coefficients(t, i)
            assert_allclose(sa, sd, atol=1e-10)
            assert_allclose(ia, idir, atol=1e-10)
    for (t, x) in ((0.2, 0.5), (0.8, 1.3)):
        assert_allclose(optimal_control(blend, t, x, 1),
                        optimal_control(direct, t, x, 1), atol=1e-10)


def test_mutual_fund_rejects_negative_beta():
    s = solved(single_market(), single_gen(), 0.5, h=1e-3)
    law = build_law(s["sol"], single_market(), s["inputs"], 1.2)
    with pytest.raises(NegativeBeta):
        mutual_fund(law, law, -0.1)


# --- feasibility ----------------------------------------------------------------


def test_gamma_closed_form():
    s = solved(single_market(), single_gen(), 0.0)
    assert_allclose(s["gamma"], GAMMA_F0, atol=1e-10)


def test_gamma_zero_iff_no_excess_return():
    mkt = constant_market(R1, R1, 0.5, T)
    s = solved(mkt, single_gen(), 0.5)
    assert s["gamma"] == 0.0
    z0 = z_zero(s["sol"].psi, X0, 0)
    law = feasible_portfolio(s["sol"], mkt, s["gamma"], X0, 0, z0)
    assert law.scale == 0.0
    assert np.all(law(0.3, 1.0, 0) == 0.0)
    with pytest.raises(InfeasibleMarket):
        feasible_portfolio(s["sol"], mkt, s["gamma"], X0, 0, z0 + 0.1)


def test_z_zero_scales_with_wealth():
    s = solved(single_market(), single_gen(), 0.5, h=1e-3)
    z1 = z_zero(s["sol"].psi, 1.0, 0)
    assert_allclose(z1, 1.0784400494160624, atol=1e-8)
    assert z_zero(s["sol"].psi, 2.0, 0) == pytest.approx(2.0 * z1, rel=1e-15)


def test_feasible_law_linear_in_target():
    s = solved(single_market(), single_gen(), 0.5, h=1e-3)
    z0 = z_zero(s["sol"].psi, X0, 0)
    law1 = feasible_portfolio(s["sol"], single_market(), s["gamma"], X0, 0, 1.2)
    law2 = feasible_portfolio(s["sol"], single_market(), s["gamma"], X0, 0, 1.4)
    _, i1 = law1.coefficients(0.3, 0)
    _, i2 = law2.coefficients(0.3, 0)
    assert_allclose(i2 / i1, (1.4 - z0) / (1.2 - z0), rtol=1e-12)
    slope, _ = law1.coefficients(0.3, 0)
    assert np.all(slope == 0.0)


# --- frontier curve ---------------------------------------------------------


def test_curve_single_point_at_vertex():
    s = solved(single_market(), single_gen(), 0.5, h=1e-3)
    z_min = z_minimum(s["inputs"])
    pts = frontier_curve(s["sol"], single_market(), s["inputs"], [z_min])
    assert len(pts) == 1
    assert pts[0].variance == pytest.approx(variance_minimum(s["inputs"]))


def test_curve_is_convex():
    s = solved(two_market(), two_gen(), 0.5, h=1e-3)
    zs = np.linspace(z_minimum(s["inputs"]), 1.8, 25)
    var = np.array([pt.variance for pt in
                    frontier_curve(s["sol"], two_market(), s["inputs"], zs)])
    second = np.diff(var, 2)
    assert np.all(second >= -1e-12)


def test_curve_variance_increases_with_exit_mass():
    # More early-exit mass cannot help: at a fixed attainable target the
    # variance is ordered in f.
    variances = []
    for f in (0.0, 0.5, 0.8):
        s = solved(single_market(), single_gen(), f, h=1e-3)
        variances.append(variance_at(s["inputs"], 1.3).variance)
    assert variances[0] < variances[1] < variances[2]


def test_curve_rejects_targets_below_minimum():
    s = solved(single_market(), single_gen(), 0.5, h=1e-3)
    z_min = z_minimum(s["inputs"])
    with pytest.raises(ZBelowMinimum, match="below z_min"):
        frontier_curve(s["sol"], single_market(), s["inputs"],
                       [z_min - 0.05, 1.2, z_min - 0.2])
