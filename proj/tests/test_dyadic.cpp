#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "ample/dyadic.hpp"

using namespace ample;

TEST(Dyadic, GenerationCounts)
{
    const DyadicGrid g2 = build_grid(2, 3);
    EXPECT_EQ(g2.count(1), 8);
    EXPECT_EQ(g2.count(3), 32);
    const DyadicGrid g3 = build_grid(3, 2);
    EXPECT_EQ(g3.count(1), 6);
    EXPECT_EQ(g3.count(2), 24);
}

TEST(Dyadic, FirstGenerationArcs)
{
    const DyadicGrid g = build_grid(2, 1);
    for (CubeId id : g.generation(1)) {
        const DyadicCube q = g.cube(id);
        EXPECT_NEAR(q.surface_measure, kPi / 4.0, 1e-15);
        const Arc a = std::get<Arc>(q.extent);
        EXPECT_NEAR(a.lo, kPi / 4.0 * static_cast<double>(id.index), 1e-15);
    }
}

TEST(Dyadic, RangeChecks)
{
    EXPECT_THROW(build_grid(2, 0), InputError);
    EXPECT_THROW(build_grid(2, 25), InputError);
    EXPECT_THROW(build_grid(3, 11), InputError);
    EXPECT_THROW(build_grid(4, 2), InputError);
    EXPECT_NO_THROW(build_grid(2, 24));
    EXPECT_NO_THROW(build_grid(3, 10));
}

TEST(Dyadic, GenerationSumsToTotal)
{
    const DyadicGrid g2 = build_grid(2, 12);
    for (int k = 1; k <= 12; ++k) {
        double s = 0.0;
        for (CubeId id : g2.generation(k)) s += surface_measure(g2.extent(id));
        EXPECT_NEAR(s, kTwoPi, 1e-10);
    }
    const DyadicGrid g3 = build_grid(3, 4);
    for (int k = 1; k <= 4; ++k) {
        double s = 0.0;
        for (CubeId id : g3.generation(k)) s += surface_measure(g3.extent(id));
        EXPECT_NEAR(s, 4.0 * kPi, 1e-6);
    }
}

TEST(Dyadic, PatchAreaQuadratureMatchesClosedFormAndMonteCarlo)
{
    const DyadicGrid g = build_grid(3, 3);
    for (CubeId id : g.generation(3)) {
        const AngularExtent e = g.extent(id);
        EXPECT_NEAR(surface_measure(e), extent_measure_exact(e), 1e-8 * extent_measure_exact(e));
    }
    // Monte Carlo: fraction of uniform directions landing in one generation-1 patch
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    int in = 0;
    constexpr int kSamples = 200000;
    const AngularExtent e = g.extent({1, 0});
    for (int s = 0; s < kSamples; ++s)
        if (extent_contains(e, Point(n(rng), n(rng), n(rng)))) ++in;
    const double mc = 4.0 * kPi * in / kSamples;
    EXPECT_NEAR(surface_measure(e), 4.0 * kPi / 6.0, 1e-8);
    EXPECT_NEAR(mc, surface_measure(e), 0.03);
}

TEST(Dyadic, HierarchyRoundTrip)
{
    for (int dim : {2, 3}) {
        const DyadicGrid g = build_grid(dim, dim == 2 ? 8 : 5);
        for (int k = 1; k < g.k_max(); ++k)
            for (CubeId id : g.generation(k)) {
                const auto kids = g.children(id);
                ASSERT_EQ(kids.size(), dim == 2 ? 2u : 4u);
                for (CubeId c : kids) {
                    EXPECT_EQ(g.parent(c), id);
                    EXPECT_TRUE(g.contains(id, c));
                    EXPECT_EQ(g.locate(g.cube(c).center, k), id);
                }
            }
        EXPECT_TRUE(g.children({g.k_max(), 0}).empty());
    }
}

TEST(Dyadic, LocateUsesHalfOpenArcs)
{
    const DyadicGrid g = build_grid(2, 3);
    EXPECT_EQ(g.locate(Point::polar(1.0, 0.0), 1).index, 0);
    EXPECT_EQ(g.locate(Point(0.0, 1.0), 1).index, 2);
    EXPECT_EQ(g.locate(Point::polar(1.0, kTwoPi - 1e-12), 3).index, 31);
}

TEST(Dyadic, PropertyReport2D)
{
    const PropertyReport rep = verify_grid_properties(build_grid(2, 8));
    EXPECT_TRUE(rep.all_pass());
    ASSERT_EQ(rep.entries.size(), 5u);
    EXPECT_LE(rep.entries[0].value, 1e-12);
    // arc of angle w: chord diameter 2 sin(w/2), collar 2 rho 2^-k on the chord scale
    EXPECT_NEAR(rep.c_star_diameter, kPi / 2.0, 0.01);
    EXPECT_NEAR(rep.a0, kPi / 4.0, 0.01);
    EXPECT_NEAR(rep.gamma, 1.0, 5e-3);
    EXPECT_NEAR(rep.c_star_thin, 4.0 / kPi, 0.01);
}

TEST(Dyadic, FittedConstantsStableAcrossGenerations)
{
    const PropertyReport rep = verify_grid_properties(build_grid(2, 12));
    for (std::size_t k = 2; k < rep.c_star_by_generation.size(); ++k) {
        EXPECT_NEAR(rep.c_star_by_generation[k], rep.c_star_by_generation.back(), 0.05 * rep.c_star_by_generation.back());
        EXPECT_NEAR(rep.a0_by_generation[k], rep.a0_by_generation.back(), 0.05 * rep.a0_by_generation.back());
    }
    // cubed-sphere corner cubes approach their limiting shape like 2^-k; within 5% from generation 5 on
    const PropertyReport rep3 = verify_grid_properties(build_grid(3, 8));
    for (std::size_t k = 4; k < rep3.c_star_by_generation.size(); ++k) {
        EXPECT_NEAR(rep3.c_star_by_generation[k], rep3.c_star_by_generation.back(), 0.05 * rep3.c_star_by_generation.back());
        EXPECT_NEAR(rep3.a0_by_generation[k], rep3.a0_by_generation.back(), 0.05 * rep3.a0_by_generation.back());
    }
}

TEST(Dyadic, PropertyReport3D)
{
    const PropertyReport rep = verify_grid_properties(build_grid(3, 5));
    for (const auto& e : rep.entries) EXPECT_TRUE(e.pass) << e.property << ": " << e.witness;
    EXPECT_LE(rep.c_star_diameter, 8.0);
    EXPECT_GT(rep.a0, 0.0);
    EXPECT_GT(rep.gamma, 0.0);
}

TEST(Dyadic, SerializationListsEveryCube)
{
    std::ostringstream os;
    write_grid(os, build_grid(2, 3));
    std::istringstream is(os.str());
    std::string line;
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#') ++rows;
    EXPECT_EQ(rows, 8 + 16 + 32);
}
