#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <sstream>

#include "ample/checks.hpp"

using namespace ample;

namespace {

SawtoothDomain trivial_sawtooth(int k_max = 4)
{
    return SawtoothDomain::from_families(build_grid(2, k_max), 0.1, {});
}

// Notch T_Q over the generation-3 arc [0, 2pi/32).
SawtoothDomain deep_notch()
{
    return SawtoothDomain::from_families(build_grid(2, 4), 0.1, {{CubeId{3, 0}}});
}

CheckBudget budget(std::int64_t n, std::uint64_t seed = 3)
{
    CheckBudget b;
    b.walkers = n;
    b.walker.seed = seed;
    return b;
}

// Integral of (1 - |y|) over B(x, r) ∩ disk for |x| = 1, by circles about the origin.
double carleson_oracle(double r)
{
    auto f = [r](double rho) {
        const double c = std::clamp((rho * rho + 1.0 - r * r) / (2.0 * rho), -1.0, 1.0);
        return (1.0 - rho) * rho * 2.0 * std::acos(c);
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 1.0 - r, 1.0, 15, 1e-13);
}

} // namespace

TEST(Constants, TableValues)
{
    OperatorSpec s;
    s.m_bound = 1.0;
    s.eps = 0.1;
    s.eta = 0.1;
    s.k_max = 6;
    EXPECT_EQ(s.l0(), 10);
    EXPECT_DOUBLE_EQ(s.c(), 1.0);
    EXPECT_DOUBLE_EQ(s.tau(3), 0.0125);
    const auto rows = constants_table(s);
    auto find = [&](const std::string& n) {
        for (const auto& r : rows)
            if (r.name == n) return r.value;
        ADD_FAILURE() << "missing " << n;
        return 0.0;
    };
    EXPECT_EQ(find("N0"), 200.0);
    for (int k = 1; k <= 6; ++k) EXPECT_NEAR(find("l0_tau_" + std::to_string(k)), std::ldexp(1.0, -k), 1e-15);

    s.m_bound = 0.3;
    EXPECT_EQ(s.l0(), 3);
    s.m_bound = 0.25;
    EXPECT_EQ(s.l0(), 3);
    EXPECT_NEAR(s.c(), 0.25 / 0.3, 1e-15);
    s.eta = 1.0;
    EXPECT_THROW(constants_table(s), InputError);
}

TEST(Verdicts, ThreeSigmaRule)
{
    EXPECT_EQ(lower_bound_verdict(0.9, 0.01, 0.5), Verdict::supported);
    EXPECT_EQ(lower_bound_verdict(0.52, 0.01, 0.5), Verdict::inconclusive);
    EXPECT_EQ(lower_bound_verdict(0.48, 0.01, 0.5), Verdict::inconclusive);
    EXPECT_EQ(lower_bound_verdict(0.4, 0.01, 0.5), Verdict::violated);
}

TEST(Bourgain, ZeroDriftMatchesPoisson)
{
    OperatorSpec s;
    const auto rep = bourgain_check(Point(0.75, 0.0), DomainHandle::unit_ball(2), DriftField::zero(2), s, budget(20000));
    const double p = rep.get("poisson");
    EXPECT_NEAR(rep.get("omega"), p, 4.0 * std::sqrt(p * (1 - p) / 20000) + 1e-3);
    EXPECT_EQ(rep.verdict, Verdict::supported);
    EXPECT_GT(p, 0.9);
}

TEST(Bourgain, RefusesLargeDrift)
{
    OperatorSpec s;
    s.eps = 0.1;
    EXPECT_THROW(bourgain_check(Point(0.75, 0.0), DomainHandle::unit_ball(2), DriftField::uniform_small(2, 0.5, 1.0), s,
                                budget(100)),
                 PreconditionError);
}

TEST(Bourgain, SweepReportsMinimum)
{
    OperatorSpec s;
    const auto rep = bourgain_sweep(DomainHandle::unit_ball(2), DriftField::uniform_small(2, 0.01, 1.0), s, budget(4000),
                                    {2, 4}, Point(1.0, 0.0));
    EXPECT_DOUBLE_EQ(rep.get("min_certified"), std::min(rep.get("certified_k2"), rep.get("certified_k4")));
    EXPECT_EQ(rep.verdict, Verdict::supported);
}

TEST(TwinBalls, TrivialSawtoothIsCaseOne)
{
    OperatorSpec s;
    const auto dom = trivial_sawtooth();
    for (double th : {0.0, 1.0, 4.0}) {
        const Point x = Point::polar(0.8, th);
        const TwinBalls tb = construct_twin_balls(x, dom, s);
        EXPECT_EQ(tb.case_id, 1);
        EXPECT_EQ(tb.p_x, 0);
        EXPECT_NEAR(tb.r, 0.2, 1e-12);
        EXPECT_NEAR(tb.x1.norm(), 1.0, 1e-12);
        EXPECT_NEAR(tb.x2.norm(), 1.0, 1e-12);
        EXPECT_GE(distance(tb.x1, tb.x2), 5.0 * tb.ball_radius);
        EXPECT_LT(distance(tb.x2, tb.bx_center), 0.5 * tb.bx_radius);
        EXPECT_LE(tb.r_x, tb.r);
        EXPECT_GE(tb.r_x, s.a0 * s.c() * s.eps / s.m_bound * tb.r);
        EXPECT_TRUE(tb.diagnostics.empty());
        EXPECT_TRUE(in_delta1(tb, tb.x1));
        EXPECT_FALSE(in_delta1(tb, tb.x2));
    }
}

TEST(TwinBalls, DeepNotchIsCaseTwo)
{
    OperatorSpec s;
    const auto dom = deep_notch();
    const Point x = Point::polar(0.55, 0.1);
    const TwinBalls tb = construct_twin_balls(x, dom, s);
    EXPECT_EQ(tb.case_id, 2);
    EXPECT_EQ(tb.p_x, 1);
    EXPECT_NEAR(tb.r, 0.875 - 0.55, 1e-12);
    EXPECT_NEAR(distance(tb.x1, tb.x2), 5.0 * s.a * tb.r, 1e-12);
    EXPECT_NEAR(tb.x1.norm(), 0.55, 1e-12);
    // the notch's inner face above x2 is part of Delta_1
    EXPECT_TRUE(in_delta1(tb, Point::polar(0.875, tb.x2.angle())));
    EXPECT_FALSE(in_delta1(tb, Point::polar(1.0, tb.x2.angle() + 0.2)));

    // next to the notch, the Whitney box touches it: Case 1 with x_hat on the box
    const Point y = Point::polar(0.86, 0.1);
    const TwinBalls near = construct_twin_balls(y, dom, s);
    EXPECT_EQ(near.case_id, 1);
    EXPECT_NEAR(near.x_hat.norm(), 0.875, 1e-12);
    EXPECT_THROW(construct_twin_balls(Point::polar(0.9, 0.1), dom, s), PreconditionError);
}

TEST(TwinBalls, CasesAreExhaustive)
{
    OperatorSpec s;
    const auto dom = deep_notch();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int seen[3] = {0, 0, 0};
    for (int i = 0; i < 300; ++i) {
        const Point x = Point::polar(0.98 * std::sqrt(u(rng)), kTwoPi * u(rng));
        if (!dom.contains(x, dom.final_level())) continue;
        const TwinBalls tb = construct_twin_balls(x, dom, s);
        ASSERT_TRUE(tb.case_id == 1 || tb.case_id == 2);
        ++seen[tb.case_id];
    }
    EXPECT_GT(seen[1], 0);
    EXPECT_GT(seen[2], 0);
}

TEST(TwinBalls, CaseOneWalkersMatchPoisson)
{
    OperatorSpec s;
    s.a0 = s.a = 0.25;
    const auto rep = claim1_twin_balls(Point::polar(0.8, 0.3), trivial_sawtooth(), DriftField::zero(2), s, budget(20000));
    EXPECT_EQ(rep.get("case"), 1.0);
    EXPECT_EQ(rep.verdict, Verdict::supported);
    EXPECT_GT(rep.get("beta_poisson"), 0.0);
    EXPECT_GT(rep.get("maximum_principle_gap"), -0.05);
    EXPECT_EQ(rep.get("rx_bounds_hold"), 1.0);
}

TEST(TwinBalls, CaseTwoChain)
{
    OperatorSpec s;
    s.a0 = s.a = 0.25;
    const auto rep = claim1_twin_balls(Point::polar(0.55, 0.1), deep_notch(), DriftField::zero(2), s, budget(20000));
    EXPECT_EQ(rep.get("case"), 2.0);
    EXPECT_NE(rep.verdict, Verdict::violated);
    EXPECT_TRUE(rep.has("chain_p1"));
    EXPECT_GT(rep.get("beta_certified"), 0.0);
}

TEST(Holder, ZeroDriftAgreesWithPoisson)
{
    OperatorSpec s;
    HolderData d;
    d.q = Point(1.0, 0.0);
    d.r = 0.5;
    d.support = {0.5 * kPi, 1.5 * kPi};
    const auto rep = holder_exponent_fit(d, DriftField::zero(2), s);
    EXPECT_EQ(rep.verdict, Verdict::supported);
    EXPECT_GT(rep.get("alpha_ci_lo"), 0.0);
    EXPECT_NEAR(rep.get("alpha"), 1.0, 0.15);
    EXPECT_EQ(rep.get("oracle_consistent"), 1.0);
    for (int k = 0; k <= 3; ++k) {
        const double u = rep.get("u_k" + std::to_string(k)), p = rep.get("poisson_k" + std::to_string(k));
        EXPECT_NEAR(u, p, 0.05 * p) << k;
    }
}

TEST(Holder, TrivialAndRejectedData)
{
    OperatorSpec s;
    HolderData d;
    d.q = Point(1.0, 0.0);
    const auto rep = holder_exponent_fit(d, DriftField::zero(2), s);
    EXPECT_EQ(rep.get("fit_points"), 0.0);
    EXPECT_EQ(rep.verdict, Verdict::supported);
    d.support = {0.2, 1.0};
    EXPECT_THROW(holder_exponent_fit(d, DriftField::zero(2), s), PreconditionError);
}

TEST(Criterion, PoissonAdversaryProperties)
{
    CriterionConfig cc;
    cc.depths = {2, 3, 4};
    double prev = 1.0 + 1e-12;
    for (double th : {0.0, 0.05, 0.1, 0.3, 0.6}) {
        const double c0 = criterion_poisson_c0(th, cc);
        EXPECT_LE(c0, prev);
        EXPECT_GT(c0, 0.0);
        prev = c0;
    }
    // theta = 0 keeps all of Delta_x: the Bourgain value itself
    const Point x(0.875, 0.0);
    const double phi = 2.0 * std::asin(0.5 * 10.0 * 0.125);
    cc.depths = {3};
    EXPECT_NEAR(criterion_poisson_c0(0.0, cc), poisson_measure(x, {-phi, phi}), 1e-12);
}

TEST(Criterion, WalkersTrackPoissonAdversary)
{
    OperatorSpec s;
    CriterionConfig cc;
    cc.depths = {2, 3, 4};
    const auto rep = criterion_scan(DomainHandle::unit_ball(2), DriftField::zero(2), s, cc, budget(20000));
    const double c0 = rep.get("c0_theta0.1"), oracle = rep.get("c0_poisson_theta0.1");
    EXPECT_GT(c0, 0.0);
    EXPECT_NEAR(c0, oracle, 0.2 * oracle);
    EXPECT_EQ(rep.verdict, Verdict::supported);
    EXPECT_THROW(criterion_scan(deep_notch().handle(deep_notch().final_level()), DriftField::zero(2), s, cc, budget(10)),
                 UnsupportedError);
}

TEST(Ainfty, EnvelopeIsMonotone)
{
    std::vector<AinftyPair> pairs{{0.5, 0.3}, {0.1, 0.05}, {0.9, 0.95}};
    const std::vector<double> grid{0.1, 0.5, 1.0};
    const auto a = ainfty_envelope(pairs, grid);
    for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_GE(a.c0[i], a.c0[i - 1]);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (const auto& p : pairs) EXPECT_GE(a.c0[i] * std::pow(p.sigma_ratio, grid[i]) + 1e-15, p.omega_ratio);
    pairs.push_back({0.05, 0.2});
    const auto b = ainfty_envelope(pairs, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_GE(b.c0[i], a.c0[i]);
}

TEST(Ainfty, WalkersNearPoissonEnvelope)
{
    OperatorSpec s;
    AinftyConfig ac;
    ac.centers = {0.0, kPi};
    ac.pairs_per_ball = 20;
    AinftyEnvelope oracle, mc;
    const auto ro = weak_ainfty_fit(DriftField::zero(2), s, ac, budget(1), &oracle, true);
    const auto rm = weak_ainfty_fit(DriftField::zero(2), s, ac, budget(40000), &mc, false);
    EXPECT_EQ(ro.verdict, Verdict::supported);
    EXPECT_EQ(rm.verdict, Verdict::supported);
    EXPECT_EQ(ro.get("pairs"), 40.0);
    for (std::size_t i = 0; i < oracle.c0.size(); ++i) EXPECT_NEAR(mc.c0[i], oracle.c0[i], 0.25 * oracle.c0[i]);
    EXPECT_THROW(weak_ainfty_fit(DriftField::uniform_small(2, 0.01, 1.0), s, ac, budget(1), nullptr, true),
                 PreconditionError);
}

TEST(Bmo, LinearSolutionCarlesonIntegral)
{
    FdConfig coarse, fine;
    fine.n_theta = 512;
    fine.h_max = 1.0 / 128.0;
    for (const FdConfig& cfg : {coarse, fine}) {
        const auto g = fd_solve(DriftField::zero(2), [](double t) { return std::cos(t); }, cfg);
        for (double r : {0.5, 0.25, 0.125}) {
            const double exact = carleson_oracle(r);
            EXPECT_NEAR(carleson_integral(g, Point(1.0, 0.0), r), exact, 0.05 * exact) << r << ' ' << cfg.n_theta;
            EXPECT_NEAR(carleson_integral(g, Point::polar(1.0, 2.0), r), exact, 0.05 * exact);
        }
        const auto res = bmo_carleson_functional(g);
        EXPECT_FALSE(res.zero_bmo);
        EXPECT_GT(res.bmo_norm, 0.0);
        EXPECT_TRUE(std::isfinite(res.ratio));
    }
}

TEST(Bmo, ConstantDataFlagsRatio)
{
    const auto g = fd_solve(DriftField::zero(2), [](double) { return 2.0; }, FdConfig{64, 1.0 / 32.0, 0.1, 1e-3});
    const auto res = bmo_carleson_functional(g);
    EXPECT_TRUE(res.zero_bmo);
    EXPECT_TRUE(std::isnan(res.ratio));
    EXPECT_LT(res.carleson_sup, 1e-10);
    EXPECT_EQ(bmo_report(g, "constant").verdict, Verdict::supported);
}

TEST(Output, ReportsAndSvg)
{
    ClaimReport r;
    r.claim = "demo";
    r.param("x", 0.5);
    r.estimate("omega", 0.25, 0.01);
    r.verdict = Verdict::supported;
    std::ostringstream a, b;
    write_report(a, r);
    write_report_table(b, {r, r});
    EXPECT_NE(a.str().find("claim demo verdict supported"), std::string::npos);
    EXPECT_NE(a.str().find("estimate omega 0.25 +- 0.01"), std::string::npos);
    const std::string table = b.str();
    EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
    EXPECT_THROW(r.get("missing"), PreconditionError);

    std::ostringstream svg;
    write_svg(svg, "envelope", {{"pairs", {{0.1, 0.2}, {0.5, 0.4}}, false}, {"fit", {{0.1, 0.3}, {1.0, 1.0}}, true}}, true,
              true);
    const std::string doc = svg.str();
    EXPECT_EQ(doc.rfind("<svg", 0), 0u);
    std::size_t circles = 0;
    for (auto at = doc.find("<circle"); at != std::string::npos; at = doc.find("<circle", at + 1)) ++circles;
    EXPECT_EQ(circles, 2u);
    EXPECT_NE(doc.find("<polyline"), std::string::npos);
}
