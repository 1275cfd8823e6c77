#include <gtest/gtest.h>

#include <random>

#include "ample/geometry.hpp"

using namespace ample;

namespace {

std::shared_ptr<ExcisedBall> one_notch_2d()
{
    auto region = std::make_shared<ExcisedBall>();
    region->dim = 2;
    region->boxes.push_back({Arc{0.0, kPi / 4.0}, 0.75, 1.0});
    return region;
}

// Brute-force distance to the boundary of the unit disk minus closed polar
// boxes: dense sampling of the circle and every box face, refined by ternary
// search around the best sample on each curve.
double sampled_distance_2d(const Point& x, const ExcisedBall& region)
{
    double best = std::numeric_limits<double>::infinity();
    auto refine = [&](auto curve, double t0, double t1) {
        constexpr int kSamples = 20000;
        double bt = t0, bd = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= kSamples; ++i) {
            const double t = t0 + (t1 - t0) * i / kSamples;
            const double d = distance(x, curve(t));
            if (d < bd) {
                bd = d;
                bt = t;
            }
        }
        const double h = (t1 - t0) / kSamples;
        double a = std::max(t0, bt - h), b = std::min(t1, bt + h);
        for (int it = 0; it < 200; ++it) {
            const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
            if (distance(x, curve(m1)) < distance(x, curve(m2))) b = m2;
            else a = m1;
        }
        best = std::min({best, bd, distance(x, curve(0.5 * (a + b)))});
    };
    // sphere points not covered by a box
    refine([](double t) { return Point::polar(1.0, t); }, 0.0, kTwoPi);
    for (const PolarBox& b : region.boxes) {
        const Arc a = std::get<Arc>(b.extent);
        refine([&](double t) { return Point::polar(b.r_inner, t); }, a.lo, a.hi);
        refine([&](double t) { return Point::polar(b.r_outer, t); }, a.lo, a.hi);
        refine([&](double r) { return Point::polar(r, a.lo); }, b.r_inner, b.r_outer);
        refine([&](double r) { return Point::polar(r, a.hi); }, b.r_inner, b.r_outer);
    }
    return best;
}

} // namespace

TEST(Geometry, UnitBallDistances)
{
    const auto ball = DomainHandle::unit_ball(2);
    EXPECT_DOUBLE_EQ(dist_to_boundary(Point(0.0, 0.0), ball), 1.0);
    EXPECT_DOUBLE_EQ(dist_to_boundary(Point(0.5, 0.0), ball), 0.5);
    EXPECT_THROW(dist_to_boundary(Point(1.5, 0.0), ball), DomainError);
    const auto ball3 = DomainHandle::unit_ball(3);
    EXPECT_NEAR(dist_to_boundary(Point(0.1, 0.2, 0.3), ball3), 1.0 - std::sqrt(0.14), 1e-15);
}

TEST(Geometry, UnitBallTouchingPoints)
{
    const auto ball = DomainHandle::unit_ball(2);
    EXPECT_EQ(touching_point(Point(0.5, 0.0), ball), Point(1.0, 0.0));
    EXPECT_EQ(touching_point(Point(0.0, 0.0), ball), Point(1.0, 0.0));
    EXPECT_EQ(touching_point(Point(0.0, 0.0, 0.0), DomainHandle::unit_ball(3)), Point(1.0, 0.0, 0.0));
}

TEST(Geometry, TouchingPointRealizesDistance)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto region = one_notch_2d();
    const std::vector<DomainHandle> doms{DomainHandle::unit_ball(2), DomainHandle::sawtooth(region),
                                         DomainHandle::ball(Point(0.2, 0.1), 0.5)};
    for (const auto& dom : doms) {
        int tested = 0;
        while (tested < 2000) {
            const Point x(u(rng), u(rng));
            if (!dom.contains(x)) continue;
            ++tested;
            const Point t = touching_point(x, dom);
            EXPECT_NEAR(distance(x, t), dist_to_boundary(x, dom), 1e-12);
        }
    }
}

TEST(Geometry, SawtoothDistanceMatchesSampledFaces)
{
    const auto region = one_notch_2d();
    const auto dom = DomainHandle::sawtooth(region);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> r(0.5, 1.0), t(-0.6, kPi / 4.0 + 0.6);
    int tested = 0;
    while (tested < 150) {
        const Point x = Point::polar(r(rng), t(rng));
        if (!dom.contains(x)) continue;
        ++tested;
        EXPECT_NEAR(dist_to_boundary(x, dom), sampled_distance_2d(x, *region), 1e-9) << x[0] << ", " << x[1];
    }
}

TEST(Geometry, SawtoothTouchingPointOnNotchFace)
{
    const auto dom = DomainHandle::sawtooth(one_notch_2d());
    // just below the inner face, in the middle of the notch
    const Point x = Point::polar(0.7, kPi / 8.0);
    const Point t = touching_point(x, dom);
    EXPECT_NEAR(t.norm(), 0.75, 1e-12);
    EXPECT_NEAR(t.angle(), kPi / 8.0, 1e-12);
    EXPECT_NEAR(dist_to_boundary(x, dom), 0.05, 1e-12);
    // beside the lateral face at angle 0
    const Point y = Point::polar(0.85, -0.02);
    const BoundaryHit hit = dom.nearest_boundary(y);
    EXPECT_EQ(hit.box, 0);
    EXPECT_NEAR(hit.point.angle(), 0.0, 1e-12);
    EXPECT_THROW(dist_to_boundary(Point::polar(0.9, kPi / 8.0), dom), DomainError);
}

TEST(Geometry, SawtoothDistance3DAgainstSampling)
{
    auto region = std::make_shared<ExcisedBall>();
    region->dim = 3;
    region->boxes.push_back({CubePatch{4, -0.5, 0.0, -0.25, 0.25}, 0.8, 1.0});
    const auto dom = DomainHandle::sawtooth(region);
    const PolarBox& box = region->boxes[0];
    const auto& p = std::get<CubePatch>(box.extent);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uu(-0.8, 0.3), vv(-0.5, 0.5), rr(0.6, 0.99);
    int tested = 0;
    while (tested < 40) {
        const Point x = cube_direction(4, uu(rng), vv(rng)) * rr(rng);
        if (!dom.contains(x)) continue;
        ++tested;
        // dense sampling of the closed box surface and the sphere near the notch
        double best = 1.0 - x.norm();
        constexpr int n = 120;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                const double u = p.u0 + (p.u1 - p.u0) * i / n, v = p.v0 + (p.v1 - p.v0) * j / n;
                const Point d = cube_direction(4, u, v);
                best = std::min({best, distance(x, d * box.r_inner), distance(x, d * box.r_outer)});
                if (i == 0 || i == n || j == 0 || j == n)
                    for (int s = 0; s <= n; ++s)
                        best = std::min(best, distance(x, d * (box.r_inner + (box.r_outer - box.r_inner) * s / n)));
            }
        const double exact = dist_to_boundary(x, dom);
        EXPECT_LE(exact, best + 1e-12);
        EXPECT_NEAR(exact, best, 5e-3);
    }
}

TEST(Geometry, CorkscrewUnitBall)
{
    const auto ball = DomainHandle::unit_ball(2);
    const Point a = corkscrew_point({Point(1.0, 0.0), 0.2}, ball, 0.25);
    EXPECT_NEAR(a[0], 0.9, 1e-15);
    EXPECT_NEAR(a[1], 0.0, 1e-15);
    try {
        corkscrew_point({Point(1.0, 0.0), 0.2}, ball, 0.99);
        FAIL() << "expected a corkscrew error";
    } catch (const CorkscrewError& e) {
        EXPECT_NEAR(e.achievable(), 0.5, 1e-12);
    }
}

TEST(Geometry, CorkscrewOverNotchTopFace)
{
    const auto region = one_notch_2d();
    const auto dom = DomainHandle::sawtooth(region);
    const double c = 0.2;
    const SurfaceBall sb{Point::polar(0.75, kPi / 8.0), 0.2};
    const Point a = corkscrew_point(sb, dom, c);
    EXPECT_LT(a.norm(), 0.75);
    // rejection-sampled containment of B(A, c r) in dom and in B(center, r)
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int hits = 0;
    while (hits < 1000) {
        const Point d(u(rng), u(rng));
        if (d.norm() >= 1.0) continue;
        ++hits;
        const Point y = a + d * (c * sb.radius);
        EXPECT_TRUE(dom.contains(y));
        EXPECT_LT(distance(y, sb.center), sb.radius);
    }
    EXPECT_THROW(corkscrew_point(sb, dom, 0.99), CorkscrewError);
}

TEST(Geometry, CorkscrewRandomBallsOnSawtooth)
{
    const auto dom = DomainHandle::sawtooth(one_notch_2d());
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> t(0.0, kTwoPi), u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Point x = Point::polar(0.6, t(rng));
        const Point center = touching_point(x, dom);
        const SurfaceBall sb{center, 0.15};
        Point a;
        try {
            a = corkscrew_point(sb, dom, 0.1);
        } catch (const CorkscrewError& e) {
            ADD_FAILURE() << "no corkscrew, achievable " << e.achievable();
            continue;
        }
        for (int s = 0; s < 1000; ++s) {
            const Point d(u(rng), u(rng));
            if (d.norm() >= 1.0) continue;
            const Point y = a + d * (0.1 * sb.radius);
            EXPECT_TRUE(dom.contains(y));
            EXPECT_LT(distance(y, center), sb.radius);
        }
    }
}

TEST(Geometry, DeltaXBall)
{
    const auto ball = DomainHandle::unit_ball(2);
    const SurfaceBall sb = delta_x_ball(Point(0.95, 0.0), ball);
    EXPECT_NEAR(sb.center[0], 1.0, 1e-15);
    EXPECT_NEAR(sb.radius, 0.5, 1e-12);
    EXPECT_FALSE(sb.clamped);
    const SurfaceBall big = delta_x_ball(Point(0.0, 0.0), ball);
    EXPECT_TRUE(big.clamped);
    EXPECT_LE(big.radius, 2.0 * (1.0 + 1e-8));
    EXPECT_TRUE(big.contains(Point(-1.0, 0.0)));
}

TEST(Geometry, DeltaXBallContainsDeltaAtCorkscrew)
{
    const auto ball = DomainHandle::unit_ball(2);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> t(0.0, kTwoPi), r(0.01, 0.15);
    for (int trial = 0; trial < 50; ++trial) {
        const SurfaceBall d{Point::polar(1.0, t(rng)), r(rng)};
        const Point a = corkscrew_point(d, ball, 0.25);
        const SurfaceBall dx = delta_x_ball(a, ball);
        for (int s = 0; s < 200; ++s) {
            const double phi = d.center.angle() + (2.0 * s / 199.0 - 1.0) * 2.0 * std::asin(0.5 * d.radius) * 0.999;
            const Point y = Point::polar(1.0, phi);
            if (d.contains(y)) EXPECT_TRUE(dx.contains(y));
        }
    }
}

TEST(Geometry, IntersectionAndSector)
{
    TruncatedSector s{0.5, 1.0, Point(1.0, 0.0), 0.3};
    const auto sec = DomainHandle::sector(2, s);
    EXPECT_TRUE(sec.contains(Point(0.7, 0.0)));
    EXPECT_FALSE(sec.contains(Point(0.0, 0.7)));
    EXPECT_NEAR(dist_to_boundary(Point(0.7, 0.0), sec), 0.2, 1e-12);
    const auto both = DomainHandle::intersection({DomainHandle::unit_ball(2), DomainHandle::ball(Point(0.5, 0.0), 0.3)});
    EXPECT_NEAR(dist_to_boundary(Point(0.5, 0.0), both), 0.3, 1e-12);
    EXPECT_NEAR(dist_to_boundary(Point(0.7, 0.0), both), 0.1, 1e-12);
}

TEST(Geometry, ExtentMeasures)
{
    double total = 0.0;
    for (int f = 0; f < 6; ++f) total += extent_measure_exact(CubePatch{f, -1.0, 1.0, -1.0, 1.0});
    EXPECT_NEAR(total, 4.0 * kPi, 1e-12);
    EXPECT_NEAR(extent_measure_exact(Arc{0.0, 1.0}), 1.0, 1e-15);
    for (int f = 0; f < 6; ++f) {
        const Point d = cube_direction(f, 0.3, -0.2);
        const FaceCoords fc = cube_face_coords(d);
        EXPECT_EQ(fc.face, f);
        EXPECT_NEAR(fc.u, 0.3, 1e-14);
        EXPECT_NEAR(fc.v, -0.2, 1e-14);
    }
}

TEST(Geometry, PointsOnBoxFacesReportTheirFace)
{
    const PolarBox box{Arc{0.5, 1.0}, 0.75, 1.0};
    EXPECT_EQ(nearest_on_box(box, Point::polar(0.75, 0.7)).face, 1);
    EXPECT_EQ(nearest_on_box(box, Point::polar(0.9, 0.5)).face, 3);
    EXPECT_EQ(nearest_on_box(box, Point::polar(0.9, 1.0)).face, 4);
    const BoxProximity in = nearest_on_box(box, Point::polar(0.8, 0.75));
    EXPECT_EQ(in.distance, 0.0);
    EXPECT_EQ(in.face, 1);

    const PolarBox cube{CubePatch{0, -0.5, 0.5, -0.5, 0.5}, 0.8, 1.0};
    EXPECT_EQ(nearest_on_box(cube, cube_direction(0, 0.0, 0.0) * 0.8).face, 1);
    EXPECT_EQ(nearest_on_box(cube, cube_direction(0, 0.5, 0.1) * 0.95).face, 4);
    EXPECT_EQ(nearest_on_box(cube, cube_direction(0, 0.1, -0.5) * 0.95).face, 5);
}
