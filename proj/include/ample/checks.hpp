#pragma once

// Numerical checks of the analytic estimates: Bourgain lower bounds, the
// twin-ball construction, boundary Holder decay, the Borel-set criterion,
// weak-A_infinity envelopes and the BMO Carleson functional.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ample/measure.hpp"

namespace ample {

enum class Verdict { supported, inconclusive, violated };
std::string to_string(Verdict v);

/// 3-standard-error rule for an estimated quantity against a lower bound.
Verdict lower_bound_verdict(double value, double stderr_, double floor);

struct ReportEntry {
    std::string name;
    double value = 0.0;
    /// Standard error, or NaN when not applicable.
    double stderr_ = std::numeric_limits<double>::quiet_NaN();
};

struct ClaimReport {
    std::string claim;
    std::vector<ReportEntry> parameters;
    std::vector<ReportEntry> estimates;
    std::vector<std::string> notes;
    Verdict verdict = Verdict::inconclusive;

    void param(const std::string& name, double v) { parameters.push_back({name, v}); }
    void estimate(const std::string& name, double v, double se = std::numeric_limits<double>::quiet_NaN())
    {
        estimates.push_back({name, v, se});
    }
    /// Value of a named estimate; throws PreconditionError when missing.
    double get(const std::string& name) const;
    bool has(const std::string& name) const;
};

/// Structured text, one block per report.
void write_report(std::ostream& os, const ClaimReport& r);
/// Tab-separated `claim kind name value stderr verdict` rows.
void write_report_table(std::ostream& os, const std::vector<ClaimReport>& reports);

struct OperatorSpec {
    int dim = 2;
    double lambda = 1.0;
    double m_bound = 1.0;
    double eps = 0.1;
    double eta = 0.1;
    int k_max = 8;
    /// Twin-ball constants.
    double a0 = 0.01;
    double a = 0.01;

    /// Smallest integer l0 with c = M / (eps l0) <= 1.
    std::int64_t l0() const;
    double c() const;
    /// (c eps / M) 2^-k.
    double tau(int k) const;
};

struct ConstantsRow {
    std::string name;
    double value = 0.0;
};
std::vector<ConstantsRow> constants_table(const OperatorSpec& spec);
void write_constants(std::ostream& os, const std::vector<ConstantsRow>& rows);

struct CheckBudget {
    std::int64_t walkers = 100000;
    WalkerConfig walker;
};

// ---------------------------------------------------------------------------

/// Surface ball Delta(xhat, 10 delta(x)) as a predicate on exits, with the Poisson
/// value when the domain is the unit disk.
struct BourgainBall {
    Point x_hat;
    double delta = 0.0;
    double radius = 0.0;
};
BourgainBall bourgain_ball(const Point& x, const DomainHandle& dom);

/// omega^x(Delta(xhat, 10 delta(x))) - 3 stderr against `floor`. Refuses with
/// PreconditionError when sampled |B| delta exceeds eps on B(x, 2 delta(x)).
ClaimReport bourgain_check(const Point& x, const DomainHandle& dom, const DriftField& b, const OperatorSpec& spec,
                           const CheckBudget& budget, double floor = 0.5);
/// Poles (1 - 2^-k) e for k in `depths` along direction `e`; reports the minimum certified value.
ClaimReport bourgain_sweep(const DomainHandle& dom, const DriftField& b, const OperatorSpec& spec,
                           const CheckBudget& budget, const std::vector<int>& depths, const Point& e,
                           double floor = 0.5);

struct TwinBalls {
    int case_id = 1;
    int p_x = 0;
    int k_x = 0;
    double r = 0.0;
    Point x_hat;
    double r_x = 0.0;
    double t = 0.0;
    Point x1, x2;
    /// Radius of B_1 and B_2.
    double ball_radius = 0.0;
    /// Case 1: the Bourgain ball B(x) and its half B_1(x).
    Point bx_center;
    double bx_radius = 0.0;
    /// Case 2: the truncated sector C_x around the radial direction of x2.
    TruncatedSector sector;
    std::vector<std::string> diagnostics;
};

/// Exactly one case fires: Case 1 when the touching point lies on the unit
/// sphere or on a removed box whose closure meets the closed Whitney box of x,
/// Case 2 otherwise. Throws PreconditionError when x is outside Omega_eta.
TwinBalls construct_twin_balls(const Point& x, const SawtoothDomain& dom, const OperatorSpec& spec);
/// True when y lies on the boundary piece Delta_1 of the construction.
bool in_delta1(const TwinBalls& tb, const Point& y);
bool in_delta2(const TwinBalls& tb, const Point& y);

ClaimReport claim1_twin_balls(const Point& x, const SawtoothDomain& dom, const DriftField& b, const OperatorSpec& spec,
                              const CheckBudget& budget);

struct HolderData {
    Point q;
    double r = 0.5;
    /// Boundary data: the cell-averaged indicator of this arc (empty arc = f == 0).
    Arc support{0.0, 0.0};
    std::optional<double> beta;
    FdConfig fd;
};

ClaimReport holder_exponent_fit(const HolderData& data, const DriftField& b, const OperatorSpec& spec);

struct CriterionConfig {
    std::vector<double> thetas{0.1};
    std::vector<int> depths{2, 3, 4, 5, 6};
    Point direction = Point(1.0, 0.0);
    /// Equal-width cells per surface ball Delta_x.
    int cells_per_ball = 64;
    int random_sets = 20;
};

/// Worst-case omega^x(F) over sets F of cells with sigma(F) >= (1 - theta) sigma(Delta_x),
/// from a greedy adversary removing the heaviest cells. 2-D; Delta_x must lie on the circle.
ClaimReport criterion_scan(const DomainHandle& dom, const DriftField& b, const OperatorSpec& spec,
                           const CriterionConfig& cc, const CheckBudget& budget);
/// Same adversary against exact Poisson cell masses (zero drift, unit disk).
double criterion_poisson_c0(double theta, const CriterionConfig& cc);

struct AinftyPair {
    double sigma_ratio = 0.0;
    double omega_ratio = 0.0;
};

struct AinftyConfig {
    std::vector<double> centers{0.0, kPi / 2.0, kPi, 1.5 * kPi};
    double r = 0.25;
    int pairs_per_ball = 40;
    std::uint64_t seed = 7;
    std::vector<double> theta_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
};

struct AinftyEnvelope {
    std::vector<AinftyPair> pairs;
    std::int64_t excluded = 0;
    /// Minimal C0 for each theta of the grid.
    std::vector<double> theta;
    std::vector<double> c0;
};

/// Minimal C0(theta) = max omega_ratio / sigma_ratio^theta over the pairs.
AinftyEnvelope ainfty_envelope(const std::vector<AinftyPair>& pairs, const std::vector<double>& theta_grid);
ClaimReport weak_ainfty_fit(const DriftField& b, const OperatorSpec& spec, const AinftyConfig& ac,
                            const CheckBudget& budget, AinftyEnvelope* out = nullptr, bool poisson_oracle = false);

struct BmoResult {
    double carleson_sup = 0.0;
    double bmo_norm = 0.0;
    double ratio = 0.0;
    bool zero_bmo = false;
    /// Depth below which the integrand is taken from the boundary data.
    double radial_cutoff = 0.0;
};

/// Integral of |grad u|^2 delta over B(x, r) ∩ disk, x on the circle.
double carleson_integral(const SolutionGrid& u, const Point& x, double r);
/// Dyadic BMO seminorm of nodal boundary data over arcs of generations 1..k.
double dyadic_bmo(const SolutionGrid& u, int k_max = 8);
BmoResult bmo_carleson_functional(const SolutionGrid& u, int n_centers = 16, int k_min = 1, int k_max = 5);
ClaimReport bmo_report(const SolutionGrid& u, const std::string& label);

// ---------------------------------------------------------------------------

struct ScatterSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
    bool line = false;
};
/// Standalone SVG scatter plot with optional log axes.
void write_svg(std::ostream& os, const std::string& title, const std::vector<ScatterSeries>& series, bool log_x = false,
               bool log_y = false);

} // namespace ample
