#pragma once

// Exit-distribution Monte Carlo for L = -Laplacian + B.grad on the unit ball
// and its subdomains, with the disk Poisson kernel and a polar finite
// difference solver as oracles.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ample/sawtooth.hpp"

namespace ample {

struct WalkerConfig {
    double step_factor = 0.1;
    double absorb_depth = 1e-4;
    std::int64_t max_steps = 10'000'000;
    std::uint64_t seed = 1;
    int threads = 0;
};

/// Checks 0 < rho <= 0.5 and delta_abs > 0.
void validate(const WalkerConfig& cfg);

/// Independent stream for walker `index` of stream `stream`.
std::mt19937_64 walker_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

struct ExitResult {
    bool escaped = false;
    BoundaryHit hit;
    std::int64_t steps = 0;
};

/// One Euler-Maruyama trajectory of dX = -B dt + sqrt(2) dW with
/// dt = rho^2 delta^2 / max(1, M). The start may sit on the boundary
/// (within delta_abs), in which case it is absorbed at once.
ExitResult simulate_exit(const Point& x, const DomainHandle& dom, const DriftField& b, const WalkerConfig& cfg,
                         std::mt19937_64& rng);

/// Cells of a domain boundary: outer-surface hits are binned by the dyadic
/// cube of their direction at generation k_est (per intersection part), hits
/// on removed polar boxes by (box, face).
class BoundaryPartition {
public:
    BoundaryPartition(const DyadicGrid& grid, int k_est, const DomainHandle& dom);

    std::size_t size() const { return ids_.size(); }
    const std::string& id(std::size_t cell) const { return ids_[cell]; }
    std::size_t classify(const BoundaryHit& hit) const;
    /// Cell of the outer surface in direction y (part 0).
    std::size_t sphere_cell(const Point& y) const;
    /// Cell of face `face` of removed box `box`.
    std::size_t face_cell(int box, int face) const;
    int k_est() const { return k_est_; }
    const DyadicGrid& grid() const { return grid_; }

private:
    DyadicGrid grid_;
    int k_est_;
    std::size_t parts_;
    std::size_t sphere_cells_;
    std::size_t faces_per_box_;
    std::vector<std::string> ids_;
};

struct ExitRecord {
    Point point;
    std::size_t cell = 0;
    int box = -1;
    int face = 0;
};

struct MeasureEstimate {
    Point pole;
    std::shared_ptr<const BoundaryPartition> partition;
    std::vector<std::int64_t> counts;
    std::vector<double> mass;
    std::vector<double> stderr_;
    std::int64_t walkers = 0;
    std::int64_t completed = 0;
    std::int64_t escaped = 0;
    std::int64_t total_steps = 0;
    /// Exit points in walker order, when requested.
    std::vector<ExitRecord> exits;
    /// Set when more than 1% of the walkers hit max_steps.
    std::string warning;

    struct Mass {
        double value = 0.0;
        double stderr_ = 0.0;
    };
    /// Mass of the union of cells accepted by `cell_pred`.
    Mass mass_of_cells(const std::function<bool(std::size_t)>& cell_pred) const;
    /// Mass of the exits accepted by `pred` (needs recorded exits).
    Mass mass_of_exits(const std::function<bool(const ExitRecord&)>& pred) const;
};

MeasureEstimate estimate_measure(const Point& x, const DomainHandle& dom, const DriftField& b,
                                 std::shared_ptr<const BoundaryPartition> partition, std::int64_t n_walkers,
                                 const WalkerConfig& cfg, bool record_exits = false, std::uint64_t stream = 0);

/// `cell mass stderr` table with a commented header.
void write_measure(std::ostream& os, const MeasureEstimate& est);

/// Harmonic measure of the arc [lo, hi] of the unit circle seen from x, |x| < 1.
double poisson_measure(const Point& x, const Arc& arc);
/// The disk Poisson kernel (1 - |x|^2) / (2 pi |x - e^{i theta}|^2).
double poisson_kernel(const Point& x, double theta);

// ---------------------------------------------------------------------------
// Finite differences on the disk.

struct FdConfig {
    /// Number of angular nodes.
    int n_theta = 256;
    /// Largest radial spacing.
    double h_max = 1.0 / 64.0;
    /// Spacing is at most grading * depth near the circle.
    double grading = 0.1;
    /// Depth of the outermost interior ring.
    double h_min = 1e-4;
};

struct SolutionGrid {
    /// Interior ring radii, increasing, all < 1.
    std::vector<double> radii;
    std::vector<double> thetas;
    /// values[i * n_theta + j] at (radii[i], thetas[j]).
    std::vector<double> values;
    std::vector<double> boundary;
    /// Drift at each node, same layout as values.
    std::vector<Point> drift;
    /// Largest cell Peclet number and how many edges were upwinded.
    double max_peclet = 0.0;
    std::int64_t upwinded = 0;
    /// Mesh parameter: the largest spacing in arc length.
    double h = 0.0;

    std::size_t n_theta() const { return thetas.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * thetas.size() + j]; }
    /// Bilinear interpolation in (r, theta); boundary data at r = 1.
    double evaluate(const Point& x) const;
};

/// Solves Laplacian u - B.grad u = 0 in the disk with u = f on the circle.
/// Throws PreconditionError when the assembled matrix is not an M-matrix and
/// Error when the discrete maximum principle fails.
SolutionGrid fd_solve(const DriftField& b, const std::function<double(double)>& f, const FdConfig& cfg = {});
/// Cell-averaged indicator of the arc [lo, hi] on the angular nodes.
std::function<double(double)> smoothed_arc_indicator(const Arc& arc, int n_theta);
void write_solution_grid(std::ostream& os, const SolutionGrid& g);

// ---------------------------------------------------------------------------
// Markov chain identity.

struct MarkovBudget {
    std::int64_t direct_walkers = 100000;
    std::int64_t outer_walkers = 100000;
    std::int64_t inner_walkers = 10000;
    /// Flag the report as partial when the combined standard error exceeds this (0 = no target).
    double target_stderr = 0.0;
};

struct MarkovReport {
    double lhs = 0.0;
    double lhs_stderr = 0.0;
    double rhs = 0.0;
    double rhs_stderr = 0.0;
    double residual = 0.0;
    double combined_stderr = 0.0;
    std::size_t cells_used = 0;
    std::int64_t escaped = 0;
    bool partial = false;

    bool within(double k) const { return residual <= k * combined_stderr; }
};

/// Compares omega^x_D(F) with the two-stage estimate through the stopping law on the
/// boundary of the smaller domain D_small, caching inner estimates per boundary cell.
MarkovReport markov_identity_check(const Point& x, const DomainHandle& d, const DomainHandle& d_small,
                                   const std::function<bool(const BoundaryHit&)>& in_f, const DriftField& b,
                                   const BoundaryPartition& small_cells, const MarkovBudget& budget,
                                   const WalkerConfig& cfg);

/// Sawtooth form: D = Omega_p, D_small = Lambda_{p-1}; needs p >= 2 and x in both.
MarkovReport markov_identity_check(const Point& x, int p, const std::function<bool(const BoundaryHit&)>& in_f,
                                   const SawtoothDomain& dom, const DriftField& b, int k_est,
                                   const MarkovBudget& budget, const WalkerConfig& cfg);

} // namespace ample
