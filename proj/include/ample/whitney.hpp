#pragma once

// Whitney boxes U_Q = Q x (1 - 2^-k, 1 - 2^-k-1], their 2^(n+1)-fold
// refinement, Carleson boxes T_Q = S_Q + U_Q and face bookkeeping.

#include <vector>

#include "ample/dyadic.hpp"

namespace ample {

/// Product region {y : y/|y| in extent, r_lo < |y| <= r_hi} (radially
/// half-open, angularly half-open like the grid). With r_hi = 1 the region
/// stops short of the sphere.
struct Slab {
    AngularExtent extent;
    double r_lo = 0.0;
    double r_hi = 1.0;

    int dim() const { return extent_dim(extent); }
    bool contains(const Point& y) const;
    double volume() const;
    /// The closed polar box with the same extent and radii.
    PolarBox closure() const { return {extent, r_lo, r_hi}; }
};

struct WhitneyBox {
    CubeId cube;
    Slab region;
    /// l(U_Q) = 2^-k.
    double side_length = 0.0;
};

struct RefinedBox {
    CubeId parent;
    /// Bit 0: outer radial half; bit 1 (and 2 in 3-D): upper angular half per axis.
    int octant = 0;
    Slab region;
    /// l(P) = 2^-k-1.
    double side_length = 0.0;
};

struct CarlesonBox {
    CubeId root;
    Slab t;  // Q x (1 - 2^-k, 1)
    Slab s;  // Q x (1 - 2^-k-1, 1), the boundary-adjacent part
    Slab u;  // the Whitney box
};

enum class FaceRole { top, bottom, lateral };

/// One boundary sheet of a slab. Index 1 is the top (smaller radius),
/// 2 the bottom, 3.. lateral (2-D: 3 at lo, 4 at hi; 3-D: 3 u0, 4 u1, 5 v0, 6 v1).
struct Face {
    int index = 1;
    FaceRole role = FaceRole::top;
    /// Constant radius of a top/bottom face.
    double radius = 0.0;
    /// Radial range of a lateral face.
    double r_lo = 0.0;
    double r_hi = 0.0;
    /// Angular extent of a radial face; for lateral faces the owning extent.
    AngularExtent extent;

    /// Point at parameters (s, t) in [0,1]^n: for radial faces the angular
    /// parameters, for lateral faces (radius fraction, position along the edge).
    Point at(double s, double t = 0.5) const;
    /// n-dimensional measure of the face.
    double area() const;
};

WhitneyBox whitney_box(const DyadicGrid& grid, CubeId q);
CarlesonBox carleson_box(const DyadicGrid& grid, CubeId q);
std::vector<RefinedBox> refine(const WhitneyBox& u);
std::vector<Face> faces(const Slab& s);

/// Radial interval of the Whitney slab at generation k.
inline double whitney_r_lo(int k) { return 1.0 - std::ldexp(1.0, -k); }
inline double whitney_r_hi(int k) { return 1.0 - std::ldexp(1.0, -k - 1); }

/// Generation of the Whitney slab containing radius r in (1/2, 1); 0 for r <= 1/2.
int whitney_generation(double r);
/// Whitney box containing y (generation limited to the grid), or nullopt-like
/// CubeId with generation 0 when y lies outside every box of the grid.
CubeId containing_whitney(const DyadicGrid& grid, const Point& y);

struct PartitionReport {
    bool disjoint = false;
    bool refined_partition = false;
    bool refined_containment = false;
    /// |sum of box volumes - volume of 1/2 < |x| <= 1 - 2^-k_max-1|
    double volume_error = 0.0;
    /// Volume of the uncovered collar 1 - 2^-k_max-1 < |x| < 1.
    double collar_volume = 0.0;
    double annulus_volume = 0.0;
    /// The bottom face of each U_Q coincides with the top face of S_Q.
    bool faces_consistent = false;
    std::string witness;

    bool pass() const { return disjoint && refined_partition && refined_containment && faces_consistent; }
};

/// Exhaustive for 2-D; 3-D checks every generation up to 4 and samples beyond.
PartitionReport verify_whitney_partition(const DyadicGrid& grid);

} // namespace ample
