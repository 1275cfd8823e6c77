#pragma once

// Stopping-time families of maximal ASA-bad Whitney boxes and the nested
// sawtooth domains they cut out of the unit ball.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ample/drift.hpp"

namespace ample {

struct SelectedBox {
    CubeId cube;
    /// Index of the generation-1 root cube containing `cube`.
    std::int64_t root = 0;
    /// Index into the previous family's boxes (the unique S-region holding this box); -1 in family 1.
    int parent = -1;
};

struct StoppingFamily {
    int generation = 1;
    /// Sorted by (root, cube); pairwise disjoint cubes.
    std::vector<SelectedBox> boxes;
    /// sigma of the union of the family's cubes.
    double shadow_measure = 0.0;

    bool empty() const { return boxes.empty(); }
};

struct ConstructionParams {
    double eps = 0.1;
    double eta = 0.1;
    double m_bound = 1.0;
    int m_s = 8;
    int threads = 0;
};

/// Certified ceiling on the number of families: ceil(2^n M / (eps eta)).
std::int64_t n0_bound(int dim, double m_bound, double eps, double eta);

/// True when some refined box of U_Q fails the average smallness test.
bool whitney_box_bad(const DyadicGrid& grid, CubeId q, const DriftField& b, double eps, int m_s = 8);

/// Verdicts for every refined box of every Whitney box with generation <= k_max, in (cube, octant) order.
std::vector<AsaVerdict> classify_refined_boxes(const DyadicGrid& grid, const DriftField& b, double eps, int m_s = 8,
                                               int threads = 0);

StoppingFamily extract_family_first(const DyadicGrid& grid, const DriftField& b, const ConstructionParams& params);
StoppingFamily extract_family_next(const DyadicGrid& grid, const StoppingFamily& prev, const DriftField& b,
                                   const ConstructionParams& params);

enum class LevelKind { omega, lambda };

struct Level {
    LevelKind kind = LevelKind::omega;
    /// Family index p >= 0; p = 0 is the unit ball.
    int p = 0;
};

class SawtoothDomain {
public:
    /// Builds from explicit families of cubes, checking the nesting (each box of
    /// family p lies in the S-region of one box of family p-1).
    static SawtoothDomain from_families(const DyadicGrid& grid, double eta, const std::vector<std::vector<CubeId>>& families);

    int dim() const { return grid_.dim(); }
    const DyadicGrid& grid() const { return grid_; }
    double eta() const { return eta_; }
    const std::vector<StoppingFamily>& families() const { return families_; }
    /// N_stop, the number of families (the final one may be empty).
    int generations() const { return static_cast<int>(families_.size()); }

    /// B minus the closed Carleson boxes T_Q (omega) or S-regions S_Q (lambda) of family p.
    std::shared_ptr<const ExcisedBall> region(Level level) const;
    DomainHandle handle(Level level) const;
    bool contains(const Point& x, Level level) const;
    /// Omega_eta = Omega_{N_stop}.
    Level final_level() const { return {LevelKind::omega, generations()}; }

    /// sigma(final shadow) / sigma(sphere). Exact integer arithmetic in 2-D.
    double ampleness_fraction() const;
    /// Final shadow fraction inside each generation-1 root cube.
    std::vector<double> root_fractions() const;
    /// sigma(shadow of family p) / sigma(sphere) for p = 1..N_stop.
    std::vector<double> shadow_fractions() const;

    /// Construction bookkeeping.
    double eps = 0.0;
    double m_bound = 0.0;
    std::int64_t n0 = 0;

private:
    SawtoothDomain(DyadicGrid grid, double eta) : grid_(std::move(grid)), eta_(eta) {}
    double family_fraction(const StoppingFamily& f) const;

    DyadicGrid grid_;
    double eta_;
    std::vector<StoppingFamily> families_;
    std::vector<std::shared_ptr<const ExcisedBall>> omega_, lambda_;

    void finalize();
    friend SawtoothDomain build_ample_sawtooth(const DyadicGrid&, const DriftField&, const ConstructionParams&);
};

/// Runs the stopping-time construction until a family's shadow is at most eta sigma(sphere)
/// or a family comes out empty. Throws ConstructionViolation when more than N0 families are needed.
SawtoothDomain build_ample_sawtooth(const DyadicGrid& grid, const DriftField& b, const ConstructionParams& params);

/// `# sawtooth ...` header followed by `family root generation index` records.
void write_sawtooth(std::ostream& os, const SawtoothDomain& dom);
SawtoothDomain read_sawtooth(std::istream& is);

} // namespace ample
