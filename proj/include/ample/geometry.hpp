#pragma once

// Primitive geometry of the unit ball in R^2 and R^3: points, angular
// extents on the sphere, closed polar boxes, and the domain kinds the
// rest of the library walks in (unit ball, ball minus polar boxes, balls,
// truncated sectors and intersections of these).

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

#include "ample/errors.hpp"

namespace ample {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Point {
public:
    Point() = default;
    Point(double x, double y) : c_{x, y, 0.0}, dim_(2) {}
    Point(double x, double y, double z) : c_{x, y, z}, dim_(3) {}

    static Point zero(int dim);
    /// Unit vector along the first coordinate axis.
    static Point axis(int dim, int i);
    static Point polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

    int dim() const { return dim_; }
    double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
    std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

    double norm() const { return std::sqrt(norm2()); }
    double norm2() const { return c_[0] * c_[0] + c_[1] * c_[1] + c_[2] * c_[2]; }
    /// Polar angle in [0, 2pi) of the first two coordinates.
    double angle() const;
    Point normalized() const;
    bool finite() const;

    Point& operator+=(const Point& o);
    Point& operator-=(const Point& o);
    Point& operator*=(double s);

    friend Point operator+(Point a, const Point& b) { return a += b; }
    friend Point operator-(Point a, const Point& b) { return a -= b; }
    friend Point operator*(Point a, double s) { return a *= s; }
    friend Point operator*(double s, Point a) { return a *= s; }
    friend Point operator-(Point a) { return a *= -1.0; }
    friend bool operator==(const Point& a, const Point& b) = default;

private:
    std::array<double, 3> c_{};
    int dim_ = 2;
};

double dot(const Point& a, const Point& b);
double distance(const Point& a, const Point& b);
Point cross(const Point& a, const Point& b);
/// Lexicographic order on coordinates.
bool lex_less(const Point& a, const Point& b);

/// Reduces an angle to [0, 2pi).
double wrap_angle(double theta);

// ---------------------------------------------------------------------------
// Angular extents on the unit sphere.

/// Half-open arc [lo, hi) of the unit circle, 0 <= lo < hi <= 2pi.
struct Arc {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
};

/// Gnomonic rectangle [u0,u1) x [v0,v1) on face `face` of the cube [-1,1]^3,
/// radially projected to the unit sphere. Faces: 0:+x 1:-x 2:+y 3:-y 4:+z 5:-z.
struct CubePatch {
    int face = 0;
    double u0 = -1.0, u1 = 1.0;
    double v0 = -1.0, v1 = 1.0;
};

using AngularExtent = std::variant<Arc, CubePatch>;

int extent_dim(const AngularExtent& e);
/// Unit direction of the extent's parametric center.
Point extent_center(const AngularExtent& e);
/// Closed membership test for a direction (need not be normalized, must be nonzero).
bool extent_contains(const AngularExtent& e, const Point& dir);
/// Half-open membership following the extent's [lo, hi) conventions.
bool extent_contains_half_open(const AngularExtent& e, const Point& dir);
/// Exact arc length (2-D) or closed-form solid angle (3-D) of the extent.
double extent_measure_exact(const AngularExtent& e);
/// True when the closures of two extents share a direction. Patches on
/// different cube faces meet only along cube edges, where a corner of one
/// lies in the closure of the other.
bool extents_meet_closed(const AngularExtent& a, const AngularExtent& b);

/// Cube-face coordinates of a direction: the face of largest |component|
/// (ties to the lower axis index) and gnomonic (u, v) on it.
struct FaceCoords {
    int face;
    double u;
    double v;
};
FaceCoords cube_face_coords(const Point& dir);
/// Point on the cube face `face` with gnomonic coordinates (u, v), normalized.
Point cube_direction(int face, double u, double v);

// ---------------------------------------------------------------------------
// Closed polar boxes {y : y/|y| in extent, r_inner <= |y| <= r_outer}.

struct PolarBox {
    AngularExtent extent;
    double r_inner = 0.0;
    double r_outer = 1.0;

    int dim() const { return extent_dim(extent); }
    bool contains(const Point& y) const;
    double volume() const;
};

/// Nearest point of a closed polar box to a query point. Face numbering:
/// 1 inner sphere (top), 2 outer sphere (bottom), 3.. lateral faces
/// (2-D: 3 at lo, 4 at hi; 3-D: 3 u0, 4 u1, 5 v0, 6 v1). A query point in
/// the closed box gets distance 0, itself as the point, and its nearest face.
struct BoxProximity {
    double distance;
    Point point;
    int face;
};
BoxProximity nearest_on_box(const PolarBox& box, const Point& x);

// ---------------------------------------------------------------------------
// Domains.

/// The unit ball minus a finite union of closed polar boxes (a sawtooth region).
struct ExcisedBall {
    int dim = 2;
    std::vector<PolarBox> boxes;
};

struct Ball {
    Point center;
    double radius = 1.0;
};

/// Open region {r_lo < |y| < r_hi, angle(y, axis) < half_angle}.
struct TruncatedSector {
    double r_lo = 0.0;
    double r_hi = 1.0;
    Point axis;
    double half_angle = 0.1;
};

/// Where on the boundary a nearest-point query landed.
struct BoundaryHit {
    double distance = 0.0;
    Point point;
    int part = 0;     // component index for intersections
    int box = -1;     // removed-box index for excised balls; -1 = sphere / outer surface
    int face = 0;     // face of that box (see BoxProximity)
};

class DomainHandle {
public:
    enum class Kind { unit_ball, sawtooth, ball, truncated_sector, intersection };

    static DomainHandle unit_ball(int dim);
    static DomainHandle sawtooth(std::shared_ptr<const ExcisedBall> region);
    static DomainHandle ball(const Point& center, double radius);
    static DomainHandle sector(int dim, const TruncatedSector& s);
    static DomainHandle intersection(std::vector<DomainHandle> parts);

    Kind kind() const;
    int dim() const { return dim_; }
    bool contains(const Point& x) const;
    /// Nearest boundary point; valid for points inside the domain.
    BoundaryHit nearest_boundary(const Point& x) const;
    /// Distance only; cheaper than nearest_boundary for the walkers.
    double boundary_distance(const Point& x) const;
    double boundary_diameter() const;

    const ExcisedBall* excised() const;
    /// Number of components of an intersection; 1 otherwise.
    std::size_t part_count() const;

private:
    struct UnitBall {};
    struct Intersection {
        std::shared_ptr<const std::vector<DomainHandle>> parts;
    };
    using Variant = std::variant<UnitBall, std::shared_ptr<const ExcisedBall>, Ball, TruncatedSector, Intersection>;

    DomainHandle(int dim, Variant v) : dim_(dim), v_(std::move(v)) {}

    int dim_;
    Variant v_;
};

struct SurfaceBall {
    Point center;
    double radius;
    /// Set when the radius was clamped to the boundary diameter.
    bool clamped = false;

    bool contains(const Point& y) const { return distance(center, y) < radius; }
};

/// Euclidean distance from an interior point to the domain boundary.
double dist_to_boundary(const Point& x, const DomainHandle& dom);
/// A boundary point realizing dist_to_boundary. Ties go to the
/// lexicographically smallest candidate; the center of a ball maps to
/// center + radius * e_1.
Point touching_point(const Point& x, const DomainHandle& dom);
/// Interior corkscrew point for the surface ball: A with B(A, c r) inside
/// dom and inside B(center, r). Throws CorkscrewError with the best constant
/// found when c is not achievable.
Point corkscrew_point(const SurfaceBall& sb, const DomainHandle& dom, double c);
/// The surface ball centered at the touching point with radius 10 dist(x).
SurfaceBall delta_x_ball(const Point& x, const DomainHandle& dom);

} // namespace ample
