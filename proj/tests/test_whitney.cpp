#include <gtest/gtest.h>

#include <random>

#include "ample/whitney.hpp"

using namespace ample;

TEST(Whitney, SlabIntervals)
{
    const DyadicGrid g = build_grid(2, 4);
    const WhitneyBox u1 = whitney_box(g, {1, 0});
    EXPECT_DOUBLE_EQ(u1.region.r_lo, 0.5);
    EXPECT_DOUBLE_EQ(u1.region.r_hi, 0.75);
    EXPECT_DOUBLE_EQ(u1.side_length, 0.5);
    const WhitneyBox u3 = whitney_box(g, {3, 5});
    EXPECT_DOUBLE_EQ(u3.region.r_hi - u3.region.r_lo, 0.0625);
    const WhitneyBox sib = whitney_box(g, {3, 6});
    EXPECT_FALSE(u3.region.contains(extent_center(sib.region.extent) * 0.9));
    EXPECT_TRUE(sib.region.contains(extent_center(sib.region.extent) * 0.9));
}

TEST(Whitney, CarlesonBoxSplit)
{
    const DyadicGrid g = build_grid(2, 5);
    const CarlesonBox t = carleson_box(g, {1, 2});
    EXPECT_DOUBLE_EQ(t.t.r_lo, 0.5);
    EXPECT_DOUBLE_EQ(t.t.r_hi, 1.0);
    EXPECT_DOUBLE_EQ(t.s.r_lo, 0.75);
    EXPECT_DOUBLE_EQ(t.s.r_hi, 1.0);
    EXPECT_NEAR(t.t.volume(), t.s.volume() + t.u.volume(), 1e-15);
    // T_Q' inside T_Q for a descendant
    const CarlesonBox d = carleson_box(g, {4, 2 * 8 + 3});
    EXPECT_GE(d.t.r_lo, t.t.r_lo);
    const Arc a = std::get<Arc>(t.t.extent), b = std::get<Arc>(d.t.extent);
    EXPECT_TRUE(b.lo >= a.lo && b.hi <= a.hi);
    // points of T_Q are in exactly one of S_Q and U_Q
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> r(0.4, 1.0), th(a.lo - 0.1, a.hi + 0.1);
    for (int s = 0; s < 10000; ++s) {
        const Point y = Point::polar(r(rng), th(rng));
        EXPECT_EQ(t.t.contains(y), t.s.contains(y) != t.u.contains(y));
        EXPECT_FALSE(t.s.contains(y) && t.u.contains(y));
    }
}

TEST(Whitney, RefinementPartitionsParent)
{
    for (int dim : {2, 3}) {
        const DyadicGrid g = build_grid(dim, 3);
        const WhitneyBox u = whitney_box(g, {2, 3});
        const auto kids = refine(u);
        ASSERT_EQ(kids.size(), dim == 2 ? 4u : 8u);
        double vol = 0.0;
        for (const auto& c : kids) {
            vol += c.region.volume();
            EXPECT_DOUBLE_EQ(c.side_length, 0.125);
            EXPECT_EQ(c.parent, u.cube);
        }
        EXPECT_NEAR(vol, u.region.volume(), 1e-15);
        std::mt19937_64 rng(2);
        std::normal_distribution<double> n;
        std::uniform_real_distribution<double> r(u.region.r_lo, u.region.r_hi);
        int inside = 0;
        for (int s = 0; s < 20000; ++s) {
            Point d = dim == 2 ? Point(n(rng), n(rng)) : Point(n(rng), n(rng), n(rng));
            const Point y = d.normalized() * r(rng);
            if (!u.region.contains(y)) continue;
            ++inside;
            int owners = 0;
            for (const auto& c : kids) owners += c.region.contains(y) ? 1 : 0;
            EXPECT_EQ(owners, 1);
        }
        EXPECT_GT(inside, 100);
    }
}

TEST(Whitney, Faces)
{
    const DyadicGrid g = build_grid(2, 3);
    const WhitneyBox u = whitney_box(g, {3, 0});
    const auto f = faces(u.region);
    ASSERT_EQ(f.size(), 4u);
    EXPECT_EQ(f[0].role, FaceRole::top);
    EXPECT_DOUBLE_EQ(f[0].radius, 1.0 - 0.125);
    EXPECT_EQ(f[1].role, FaceRole::bottom);
    EXPECT_EQ(f[2].role, FaceRole::lateral);
    EXPECT_EQ(f[3].role, FaceRole::lateral);
    // lateral faces of S_Q reach the sphere at the arc endpoints
    const CarlesonBox t = carleson_box(g, {3, 0});
    const auto fs = faces(t.s);
    const Point end = fs[2].at(1.0);
    EXPECT_NEAR(end.norm(), 1.0, 1e-15);
    EXPECT_NEAR(end.angle(), 0.0, 1e-15);
    const DyadicGrid g3 = build_grid(3, 2);
    const auto f3 = faces(whitney_box(g3, {2, 7}).region);
    EXPECT_EQ(f3.size(), 6u);
    double lateral = 0.0;
    for (const auto& face : f3)
        if (face.role == FaceRole::lateral) lateral += face.area();
    EXPECT_GT(lateral, 0.0);
}

TEST(Whitney, GenerationOfRadius)
{
    EXPECT_EQ(whitney_generation(0.5), 0);
    EXPECT_EQ(whitney_generation(0.5000001), 1);
    EXPECT_EQ(whitney_generation(0.75), 1);
    EXPECT_EQ(whitney_generation(0.7500001), 2);
    EXPECT_EQ(whitney_generation(1.0 - 1.0 / 1024.0), 9);
    for (int k = 1; k < 20; ++k) {
        EXPECT_EQ(whitney_generation(whitney_r_hi(k)), k);
        EXPECT_EQ(whitney_generation(std::nextafter(whitney_r_lo(k), 1.0)), k);
    }
}

TEST(Whitney, PartitionReport2D)
{
    const PartitionReport rep = verify_whitney_partition(build_grid(2, 8));
    EXPECT_TRUE(rep.pass()) << rep.witness;
    EXPECT_LE(rep.volume_error, 1e-10);
    EXPECT_NEAR(rep.collar_volume, kPi * (1.0 - std::pow(1.0 - std::ldexp(1.0, -9), 2)), 1e-12);
}

TEST(Whitney, PartitionReport3D)
{
    const PartitionReport rep = verify_whitney_partition(build_grid(3, 5));
    EXPECT_TRUE(rep.pass()) << rep.witness;
    EXPECT_LE(rep.volume_error, 1e-10);
}
