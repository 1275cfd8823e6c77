#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <sstream>

#include "ample/errors.hpp"
#include "ample/measure.hpp"

using namespace ample;

namespace {

double kernel_integral(const Point& x, double lo, double hi)
{
    auto k = [&](double t) {
        const double dx = x[0] - std::cos(t), dy = x[1] - std::sin(t);
        return (1.0 - x.norm2()) / (kTwoPi * (dx * dx + dy * dy));
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(k, lo, hi, 15, 1e-13);
}

std::shared_ptr<const BoundaryPartition> cells(const DomainHandle& dom, int k)
{
    return std::make_shared<BoundaryPartition>(build_grid(dom.dim(), std::max(k, 3)), k, dom);
}

Arc gen_arc(int k, std::int64_t i)
{
    const double w = kTwoPi / static_cast<double>(std::int64_t{1} << (k + 2));
    return {w * static_cast<double>(i), w * static_cast<double>(i + 1)};
}

} // namespace

TEST(Poisson, MatchesKernelQuadrature)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 200; ++s) {
        const Point x = Point::polar(0.98 * std::sqrt(u(rng)), kTwoPi * u(rng));
        const double lo = kTwoPi * u(rng), w = kTwoPi * u(rng);
        const double exact = kernel_integral(x, lo, lo + w);
        EXPECT_NEAR(poisson_measure(x, {lo, lo + w}), exact, 1e-10 * std::max(exact, 1e-3));
    }
}

TEST(Poisson, TrivialCases)
{
    EXPECT_NEAR(poisson_measure(Point(0.0, 0.0), {0.3, 1.3}), 1.0 / kTwoPi, 1e-15);
    EXPECT_NEAR(poisson_measure(Point(0.3, -0.2), {0.0, kTwoPi}), 1.0, 1e-14);
    EXPECT_GT(poisson_measure(Point::polar(0.9999, 0.5), {0.4, 0.6}), 0.99);
    const Point x = Point::polar(0.7, 1.0);
    EXPECT_NEAR(poisson_measure(x, {0.8, 1.0}), poisson_measure(x, {1.0, 1.2}), 1e-14);
    EXPECT_THROW(poisson_measure(Point(0.0, 0.0, 0.0), {0.0, 1.0}), UnsupportedError);
    EXPECT_THROW(poisson_measure(Point(1.0, 0.0), {0.0, 1.0}), DomainError);
}

TEST(Walker, ConfigValidation)
{
    WalkerConfig c;
    c.step_factor = 0.6;
    EXPECT_THROW(validate(c), InputError);
    c.step_factor = 0.1;
    c.absorb_depth = 0.0;
    EXPECT_THROW(validate(c), InputError);
}

TEST(Walker, UniformFromOrigin)
{
    const DomainHandle disk = DomainHandle::unit_ball(2);
    WalkerConfig cfg;
    cfg.seed = 17;
    const auto part = cells(disk, 3);
    const std::int64_t n = 20000;
    const MeasureEstimate e = estimate_measure(Point(0.0, 0.0), disk, DriftField::zero(2), part, n, cfg);
    ASSERT_EQ(e.escaped, 0);
    double chi2 = 0.0;
    const double expect = static_cast<double>(n) / 32.0;
    for (std::int64_t c : e.counts) chi2 += (static_cast<double>(c) - expect) * (static_cast<double>(c) - expect) / expect;
    const boost::math::chi_squared dist(31);
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 1e-3) << "chi2 = " << chi2;
    const auto upper = e.mass_of_cells([](std::size_t c) { return c < 16; });
    EXPECT_NEAR(upper.value, 0.5, 3.0 * upper.stderr_);
}

TEST(Walker, PoissonLawFromOffCenterPole)
{
    const DomainHandle disk = DomainHandle::unit_ball(2);
    WalkerConfig cfg;
    cfg.seed = 5;
    const Point x(0.5, 0.0);
    const MeasureEstimate e = estimate_measure(x, disk, DriftField::zero(2), cells(disk, 3), 40000, cfg);
    double total = 0.0;
    int within2 = 0;
    for (std::size_t c = 0; c < 32; ++c) {
        const Arc a = gen_arc(3, static_cast<std::int64_t>(c));
        const double p = poisson_measure(x, a);
        const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(e.completed));
        EXPECT_LE(std::abs(e.mass[c] - p), 3.0 * se + 1e-12) << "cell " << c;
        if (std::abs(e.mass[c] - p) <= 2.0 * se) ++within2;
        total += e.mass[c];
    }
    EXPECT_GE(within2, 26);
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Walker, SeedDeterminismAndThreads)
{
    const DomainHandle disk = DomainHandle::unit_ball(2);
    const DriftField b = DriftField::uniform_small(2, 0.05, 1.0);
    WalkerConfig cfg;
    cfg.seed = 99;
    cfg.threads = 1;
    const auto part = cells(disk, 3);
    const MeasureEstimate a = estimate_measure(Point(0.2, 0.1), disk, b, part, 3000, cfg, true);
    cfg.threads = 4;
    const MeasureEstimate c = estimate_measure(Point(0.2, 0.1), disk, b, part, 3000, cfg, true);
    EXPECT_EQ(a.counts, c.counts);
    EXPECT_EQ(a.total_steps, c.total_steps);
    ASSERT_EQ(a.exits.size(), c.exits.size());
    for (std::size_t i = 0; i < a.exits.size(); ++i) EXPECT_EQ(a.exits[i].point, c.exits[i].point);
    std::ostringstream sa, sc;
    write_measure(sa, a);
    write_measure(sc, c);
    EXPECT_EQ(sa.str(), sc.str());
    cfg.seed = 100;
    const MeasureEstimate d = estimate_measure(Point(0.2, 0.1), disk, b, part, 3000, cfg);
    EXPECT_NE(a.counts, d.counts);
}

TEST(Walker, EscapesAreCountedNotDropped)
{
    const DomainHandle disk = DomainHandle::unit_ball(2);
    WalkerConfig cfg;
    cfg.max_steps = 3;
    const MeasureEstimate e = estimate_measure(Point(0.0, 0.0), disk, DriftField::zero(2), cells(disk, 3), 200, cfg);
    EXPECT_EQ(e.escaped, 200);
    EXPECT_EQ(e.completed, 0);
    EXPECT_FALSE(e.warning.empty());
}

TEST(Walker, StepSizeConvergence)
{
    const DomainHandle disk = DomainHandle::unit_ball(2);
    WalkerConfig coarse, fine;
    coarse.seed = 1;
    fine.seed = 2;
    fine.step_factor = 0.05;
    const auto part = cells(disk, 2);
    const Point x(0.4, 0.3);
    const MeasureEstimate a = estimate_measure(x, disk, DriftField::zero(2), part, 20000, coarse);
    const MeasureEstimate b = estimate_measure(x, disk, DriftField::zero(2), part, 10000, fine);
    for (std::size_t c = 0; c < part->size(); ++c)
        EXPECT_LE(std::abs(a.mass[c] - b.mass[c]), 3.0 * std::hypot(a.stderr_[c], b.stderr_[c]) + 1e-12) << c;
}

TEST(Walker, ThreeDimensionalSymmetry)
{
    const DomainHandle ball = DomainHandle::unit_ball(3);
    WalkerConfig cfg;
    cfg.seed = 8;
    const auto part = cells(ball, 1);
    const MeasureEstimate e = estimate_measure(Point(0.0, 0.0, 0.0), ball, DriftField::zero(3), part, 6000, cfg);
    // six faces of the cubed sphere carry equal mass from the center
    for (std::size_t f = 0; f < 6; ++f) EXPECT_NEAR(e.mass[f], 1.0 / 6.0, 3.0 * e.stderr_[f]);
}

TEST(Walker, SawtoothFaceCells)
{
    const DyadicGrid g = build_grid(2, 5);
    const SawtoothDomain s = SawtoothDomain::from_families(g, 0.1, {{{2, 0}}});
    const DomainHandle dom = s.handle(s.final_level());
    auto part = std::make_shared<BoundaryPartition>(g, 3, dom);
    EXPECT_EQ(part->size(), 32u + 4u);
    WalkerConfig cfg;
    const MeasureEstimate e = estimate_measure(Point::polar(0.6, 0.2), dom, DriftField::zero(2), part, 4000, cfg, true);
    const auto top = e.mass_of_cells([&](std::size_t c) { return c == part->face_cell(0, 1); });
    EXPECT_GT(top.value, 0.05);
    // the sphere under the notch is not reachable
    EXPECT_EQ(e.counts[0] + e.counts[1], 0);
    for (const ExitRecord& r : e.exits)
        if (r.box == 0) EXPECT_TRUE(r.face == 1 || r.face == 3 || r.face == 4);
}

TEST(Walker, DomainMonotonicity)
{
    // D inside the disk shares the arc F; the maximum principle gives omega_D(F) <= omega_disk(F)
    const DyadicGrid g = build_grid(2, 5);
    const SawtoothDomain s = SawtoothDomain::from_families(g, 0.1, {{{2, 1}}});
    const DomainHandle d = s.handle(s.final_level());
    const DomainHandle disk = DomainHandle::unit_ball(2);
    const Arc f{0.0, kTwoPi / 16.0};
    WalkerConfig cfg;
    cfg.seed = 12;
    const Point x = Point::polar(0.7, 0.3);
    const MeasureEstimate a = estimate_measure(x, d, DriftField::zero(2), cells(d, 3), 20000, cfg, true);
    const MeasureEstimate b = estimate_measure(x, disk, DriftField::zero(2), cells(disk, 3), 20000, cfg, true);
    auto on_f = [&](const ExitRecord& r) { return r.box < 0 && r.point.angle() < f.hi; };
    const auto ma = a.mass_of_exits(on_f), mb = b.mass_of_exits(on_f);
    EXPECT_LE(ma.value, mb.value + 3.0 * std::hypot(ma.stderr_, mb.stderr_));
    EXPECT_NEAR(mb.value, poisson_measure(x, f), 3.0 * mb.stderr_);
}

TEST(Fd, ConstantsAndHarmonicPolynomial)
{
    const DriftField zero = DriftField::zero(2);
    const SolutionGrid one = fd_solve(zero, [](double) { return 1.0; });
    for (double v : one.values) EXPECT_NEAR(v, 1.0, 1e-10);

    double prev_err = 0.0;
    for (int level = 0; level < 2; ++level) {
        FdConfig cfg;
        cfg.n_theta = 64 << level;
        cfg.h_max = 1.0 / (16 << level);
        const SolutionGrid g = fd_solve(zero, [](double t) { return std::cos(t); }, cfg);
        double err = 0.0;
        for (std::size_t i = 0; i < g.radii.size(); ++i)
            for (std::size_t j = 0; j < g.n_theta(); ++j)
                if (g.radii[i] > 0.2) err = std::max(err, std::abs(g.at(i, j) - g.radii[i] * std::cos(g.thetas[j])));
        EXPECT_LT(err, 2.0 * g.h * g.h);
        if (level > 0) EXPECT_LT(err, 0.5 * prev_err);
        prev_err = err;
    }
}

TEST(Fd, MaximumPrincipleWithDrift)
{
    const DyadicGrid gr = build_grid(2, 5);
    const DriftField cone = DriftField::cone_singular(gr, {{2, 1}, {4, 40}}, 0.9, 1.0);
    const SolutionGrid g = fd_solve(cone, smoothed_arc_indicator({0.5, 1.5}, 256));
    for (double v : g.values) {
        EXPECT_GE(v, -1e-12);
        EXPECT_LE(v, 1.0 + 1e-12);
    }
    EXPECT_EQ(g.values.size(), g.radii.size() * g.n_theta());
    std::ostringstream os;
    write_solution_grid(os, g);
    EXPECT_NE(os.str().find("# fd grid"), std::string::npos);
}

TEST(Fd, ZeroDriftMatchesPoisson)
{
    const Arc a{0.3, 1.1};
    const SolutionGrid g = fd_solve(DriftField::zero(2), smoothed_arc_indicator(a, 256));
    for (const Point& x : {Point(0.5, 0.0), Point(0.0, 0.0), Point::polar(0.8, 0.7)})
        EXPECT_NEAR(g.evaluate(x), poisson_measure(x, a), 2e-3);
}

TEST(Fd, AgreesWithWalkersUnderSmallDrift)
{
    const DomainHandle disk = DomainHandle::unit_ball(2);
    const DriftField b = DriftField::uniform_small(2, 0.05, 1.0);
    WalkerConfig cfg;
    cfg.seed = 21;
    const Point x(0.5, 0.0);
    const auto part = cells(disk, 2);
    const MeasureEstimate e = estimate_measure(x, disk, b, part, 20000, cfg);
    for (std::size_t c : {0u, 1u, 5u, 15u}) {
        const Arc a = gen_arc(2, static_cast<std::int64_t>(c));
        const SolutionGrid g = fd_solve(b, smoothed_arc_indicator(a, 256));
        EXPECT_NEAR(g.evaluate(x), e.mass[c], 3.0 * e.stderr_[c] + 2.0 * g.h) << "cell " << c;
    }
}

TEST(Markov, FullBoundaryGivesOne)
{
    const DomainHandle disk = DomainHandle::unit_ball(2);
    const DomainHandle inner = DomainHandle::ball(Point(0.0, 0.0), 0.75);
    MarkovBudget budget{500, 500, 50, 0.0};
    WalkerConfig cfg;
    const BoundaryPartition cells3(build_grid(2, 3), 3, inner);
    const MarkovReport r = markov_identity_check(Point(0.1, 0.0), disk, inner, [](const BoundaryHit&) { return true; },
                                                 DriftField::zero(2), cells3, budget, cfg);
    EXPECT_EQ(r.lhs, 1.0);
    EXPECT_NEAR(r.rhs, 1.0, 1e-12);
}

TEST(Markov, NestedDisksZeroDrift)
{
    const DomainHandle disk = DomainHandle::unit_ball(2);
    const DomainHandle inner = DomainHandle::ball(Point(0.0, 0.0), 0.75);
    const Arc f{0.0, kPi / 4.0};
    auto in_f = [&](const BoundaryHit& h) { return h.point.angle() < f.hi; };
    MarkovBudget budget{20000, 20000, 2000, 0.0};
    WalkerConfig cfg;
    cfg.seed = 31;
    const BoundaryPartition cells4(build_grid(2, 4), 4, inner);
    const Point x(0.3, 0.1);
    const MarkovReport r = markov_identity_check(x, disk, inner, in_f, DriftField::zero(2), cells4, budget, cfg);
    EXPECT_TRUE(r.within(3.0)) << r.lhs << " vs " << r.rhs << " se " << r.combined_stderr;
    const double exact = poisson_measure(x, f);
    EXPECT_NEAR(r.lhs, exact, 3.0 * r.lhs_stderr);
    EXPECT_NEAR(r.rhs, exact, 3.0 * r.rhs_stderr);
    EXPECT_GT(r.cells_used, 50u);
}

TEST(Markov, OneNotchSawtoothWithDrift)
{
    const DyadicGrid g = build_grid(2, 5);
    const SawtoothDomain s = SawtoothDomain::from_families(g, 0.1, {{{2, 0}}, {{3, 1}}});
    const Point x = Point::polar(0.85, 0.3);
    ASSERT_TRUE(s.contains(x, {LevelKind::omega, 2}));
    ASSERT_TRUE(s.contains(x, {LevelKind::lambda, 1}));
    // F: a lateral face of the notch
    auto in_f = [](const BoundaryHit& h) { return h.box == 0 && h.face == 4; };
    MarkovBudget budget{20000, 20000, 2000, 0.0};
    WalkerConfig cfg;
    cfg.seed = 41;
    const MarkovReport r =
        markov_identity_check(x, 2, in_f, s, DriftField::uniform_small(2, 0.02, 1.0), 4, budget, cfg);
    EXPECT_GT(r.lhs, 0.01);
    EXPECT_TRUE(r.within(3.0)) << r.lhs << " vs " << r.rhs << " se " << r.combined_stderr;
    EXPECT_THROW(markov_identity_check(x, 1, in_f, s, DriftField::zero(2), 4, budget, cfg), PreconditionError);
}
