#pragma once

// Singular drift fields on the unit ball and the functionals the
// stopping-time construction is driven by: the local sup of |B|^2 delta,
// the average smallness test on refined Whitney boxes, the Carleson norm
// and the pointwise bound |B| <= M / delta.

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ample/whitney.hpp"

namespace ample {

class DriftField {
public:
    enum class Family { zero, uniform_small, cone_singular, grid_sampled, custom };
    using Evaluator = std::function<Point(const Point&)>;

    static DriftField zero(int dim, double m_bound = 1.0);
    /// |B| = eps_hat / delta pointing inward along the radius; requires eps_hat <= M.
    static DriftField uniform_small(int dim, double eps_hat, double m_bound);
    /// |B| = A phi / delta, inward radial, where phi is a smooth bump over the
    /// Whitney slab of each target cube (sin^2 in angle and depth). Overlapping
    /// targets take the max of their bumps.
    static DriftField cone_singular(const DyadicGrid& grid, std::vector<CubeId> targets, double amplitude,
                                    double m_bound);
    /// Nearest-node evaluation of lattice samples. Each record is
    /// `r theta bx by` (2-D) or `r theta phi bx by bz` (3-D, phi the polar angle).
    static DriftField grid_sampled(std::istream& in, int dim, double m_bound);
    static DriftField grid_sampled_file(const std::string& path, int dim, double m_bound);
    /// Arbitrary evaluator. The support predicate, when given, returns false
    /// only for closed polar boxes on which the field vanishes identically.
    static DriftField custom(int dim, Evaluator eval, double m_bound, std::string label, bool validate = true,
                             std::function<bool(const PolarBox&)> may_be_nonzero = {});

    Point operator()(const Point& x) const;
    double magnitude(const Point& x) const { return (*this)(x).norm(); }

    int dim() const;
    double declared_m() const;
    Family family() const;
    const std::string& label() const;
    /// eps_hat for uniform-small, A for cone-singular, 0 otherwise.
    double strength() const;
    const std::vector<CubeId>& targets() const;

    bool may_be_nonzero(const PolarBox& region) const;

    /// s B, with declared bound s M.
    DriftField scaled(double s) const;
    /// Pointwise sum, with declared bound M_a + M_b.
    friend DriftField operator+(const DriftField& a, const DriftField& b);

    struct Impl;

private:
    explicit DriftField(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

std::string to_string(DriftField::Family f);

struct PointwiseBoundResult {
    bool pass = true;
    int samples = 0;
    /// max |B(x)| delta(x) / M over the samples.
    double worst_ratio = 0.0;
    Point witness;
};

/// Samples interior points (half uniform in the ball, half at log-uniform
/// depth down to 1e-6) and checks |B| <= M / delta.
PointwiseBoundResult pointwise_bound_check(const DriftField& b, int samples = 10000, std::uint64_t seed = 0x9e3779b97f4a7c15ULL);

/// max over an m_s^(n+1) polar lattice of the ball B(t, delta(t)/2) of |B(y)|^2 delta(y).
/// Lattices for m and 2m are nested, so the value is nondecreasing under doubling.
double sup_local(const Point& t, const DriftField& b, int m_s = 8);
/// Doubles m_s from 8 until two successive values agree within 5% (cap 64).
double sup_local_adaptive(const Point& t, const DriftField& b);

struct AsaIntegral {
    double value = 0.0;        // 2m-point midpoint rule
    double coarse = 0.0;       // m-point midpoint rule
    double error_bound = 0.0;  // |value - coarse| / 3
    int m = 8;
};

/// Midpoint tensor rule over an m^(n+1) grid on P in polar (or gnomonic) coordinates
/// with exact cell volumes, refined once to 2m for the Richardson estimate.
AsaIntegral asa_integral(const RefinedBox& p, const DriftField& b, int m = 8, int m_s = 8);

struct AsaVerdict {
    RefinedBox box;
    double integral = 0.0;
    double threshold = 0.0;
    double error_bound = 0.0;
    bool good = false;
    /// The error bar straddles the threshold after the last refinement (classified bad).
    bool inconclusive = false;
    /// Error bound exceeds 10% of the threshold at the finest m.
    bool refinement_requested = false;
    int m = 8;
};

/// good iff integral + error < threshold = eps l(P)^n; ties and inconclusive results are bad.
/// Ambiguous results are refined m = 8 -> 16 -> 32.
AsaVerdict asa_test(const RefinedBox& p, const DriftField& b, double eps, int m_s = 8);

/// max over lattice points of P of |B(x)| l(P); on good boxes this is c_1 eps.
double pointwise_smallness(const RefinedBox& p, const DriftField& b, int samples_per_axis = 8);

struct CarlesonLattice {
    int n_centers = 16;        // boundary points at angles 2 pi i / n_centers
    int k_min = 1;             // radii 2^-k, k_min..k_max
    int k_max = 6;
    double depth_cutoff = 1e-6;  // integrate over delta >= depth_cutoff
    int depth_nodes = 8;       // Gauss nodes per dyadic depth band
    int angle_panels = 8;      // Gauss panels across the angular chord
    int angle_nodes = 8;
    int m_s = 8;
};

struct CarlesonNormResult {
    double value = 0.0;
    Point argmax_center;
    double argmax_radius = 0.0;
    /// max over centers per radius 2^-k.
    std::vector<double> per_scale;
    CarlesonLattice lattice;
};

/// sup over the lattice of (1/sigma(Delta(x,r))) int_{B(x,r), delta >= cutoff} sup_local dV. 2-D only.
CarlesonNormResult carleson_norm(const DriftField& b, const CarlesonLattice& lattice = {});
/// Carleson average at a single (x, r).
double carleson_average(const DriftField& b, const Point& x, double r, const CarlesonLattice& lattice = {});

/// Amplitude A making the cone-singular field's Carleson norm equal to 1 (the norm scales like A^2).
double calibrate_cone_amplitude(const DyadicGrid& grid, const std::vector<CubeId>& targets, double m_bound,
                                const CarlesonLattice& lattice = {});

/// Surface measure of Delta(x, r) on the unit sphere.
double surface_ball_measure(int dim, double r);

} // namespace ample
