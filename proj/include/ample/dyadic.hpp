#pragma once

// Dyadic grids on the unit circle (equal half-open arcs) and the unit
// sphere (cubed sphere of gnomonic dyadic squares). Cubes are computed on
// demand from their (generation, index) id, so a grid never materializes
// its generations.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ample/geometry.hpp"

namespace ample {

struct CubeId {
    int generation = 1;
    std::int64_t index = 0;

    friend auto operator<=>(const CubeId&, const CubeId&) = default;
};

struct DyadicCube {
    CubeId id;
    AngularExtent extent;
    Point center;
    double surface_measure = 0.0;
};

class DyadicGrid {
public:
    static constexpr int kMaxGeneration2D = 24;
    static constexpr int kMaxGeneration3D = 10;

    DyadicGrid(int dim, int k_max);

    int dim() const { return dim_; }
    int k_max() const { return k_max_; }

    /// Number of cubes in generation k: 2^(k+2) on the circle, 6*4^(k-1) on the sphere.
    std::int64_t count(int k) const;
    std::vector<CubeId> generation(int k) const;

    DyadicCube cube(CubeId id) const;
    AngularExtent extent(CubeId id) const;
    bool valid(CubeId id) const;

    CubeId parent(CubeId id) const;
    std::vector<CubeId> children(CubeId id) const;
    CubeId ancestor(CubeId id, int k) const;
    /// True when `inner` equals or descends from `outer`.
    bool contains(CubeId outer, CubeId inner) const;
    /// Cube of generation k containing the direction of y (half-open conventions).
    CubeId locate(const Point& y, int k) const;

    double total_measure() const { return dim_ == 2 ? kTwoPi : 4.0 * kPi; }

private:
    void check(CubeId id) const;

    int dim_;
    int k_max_;
};

DyadicGrid build_grid(int dim, int k_max);

/// 2-D: exact arc length. 3-D: adaptive Gauss-Legendre quadrature of the
/// gnomonic area element to relative error 1e-8.
double surface_measure(const DyadicCube& q);
double surface_measure(const AngularExtent& e);

struct PropertyEntry {
    std::string property;
    bool pass = false;
    double value = 0.0;
    std::string witness;
};

struct PropertyReport {
    std::vector<PropertyEntry> entries;
    /// Smallest constant with diam(Q) <= C_* 2^-k over the checked cubes.
    double c_star_diameter = 0.0;
    /// Fitted constants of the thin-boundary estimate collar <= C rho^gamma sigma(Q).
    double c_star_thin = 0.0;
    double gamma = 0.0;
    /// Largest constant with a surface ball of radius a0 2^-k inside each cube.
    double a0 = 0.0;
    /// Per-generation values of the fitted constants.
    std::vector<double> c_star_by_generation;
    std::vector<double> a0_by_generation;
    /// Generations checked exhaustively (3-D samples beyond this).
    int exhaustive_through = 0;

    bool all_pass() const;
    double c_star() const { return std::max(c_star_diameter, c_star_thin); }
};

PropertyReport verify_grid_properties(const DyadicGrid& grid);

/// One line per cube: generation, index, extent, surface measure.
void write_grid(std::ostream& os, const DyadicGrid& grid);

std::string to_string(const AngularExtent& e);

} // namespace ample
