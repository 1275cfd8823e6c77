#include "ample/sawtooth.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "ample/parallel.hpp"

namespace ample {

namespace {

// Depth-first maximal-bad scan below `q` (q itself included when include_self).
void scan(const DyadicGrid& grid, CubeId q, bool include_self, const DriftField& b, const ConstructionParams& params,
          std::vector<CubeId>& out)
{
    if (include_self && whitney_box_bad(grid, q, b, params.eps, params.m_s)) {
        out.push_back(q);
        return;
    }
    for (CubeId c : grid.children(q)) scan(grid, c, true, b, params, out);
}

std::int64_t root_of(const DyadicGrid& grid, CubeId q)
{
    return grid.ancestor(q, 1).index;
}

void sort_family(StoppingFamily& f)
{
    std::sort(f.boxes.begin(), f.boxes.end(), [](const SelectedBox& a, const SelectedBox& b) {
        return a.root != b.root ? a.root < b.root : a.cube < b.cube;
    });
}

double shadow_of(const DyadicGrid& grid, const std::vector<SelectedBox>& boxes)
{
    double s = 0.0;
    for (const SelectedBox& b : boxes) s += surface_measure(grid.extent(b.cube));
    return s;
}

} // namespace

std::int64_t n0_bound(int dim, double m_bound, double eps, double eta)
{
    if (!(eps > 0.0 && eta > 0.0 && m_bound > 0.0)) throw InputError("N0 needs positive M, eps and eta");
    const double v = std::ldexp(m_bound, dim - 1) / (eps * eta);
    // guard the ceiling against representation error in eps * eta (0.1 * 0.1 = 0.010000000000000002)
    const double r = std::round(v);
    if (std::abs(v - r) <= 1e-9 * std::max(1.0, r)) return static_cast<std::int64_t>(r);
    return static_cast<std::int64_t>(std::ceil(v));
}

bool whitney_box_bad(const DyadicGrid& grid, CubeId q, const DriftField& b, double eps, int m_s)
{
    for (const RefinedBox& p : refine(whitney_box(grid, q)))
        if (!asa_test(p, b, eps, m_s).good) return true;
    return false;
}

std::vector<AsaVerdict> classify_refined_boxes(const DyadicGrid& grid, const DriftField& b, double eps, int m_s,
                                               int threads)
{
    std::vector<CubeId> cubes;
    for (int k = 1; k <= grid.k_max(); ++k)
        for (CubeId id : grid.generation(k)) cubes.push_back(id);
    const std::size_t per = grid.dim() == 2 ? 4 : 8;
    std::vector<AsaVerdict> out(cubes.size() * per);
    parallel_for(cubes.size(), threads, [&](std::size_t i) {
        const auto kids = refine(whitney_box(grid, cubes[i]));
        for (std::size_t o = 0; o < kids.size(); ++o) out[i * per + o] = asa_test(kids[o], b, eps, m_s);
    });
    return out;
}

StoppingFamily extract_family_first(const DyadicGrid& grid, const DriftField& b, const ConstructionParams& params)
{
    const auto roots = grid.generation(1);
    std::vector<std::vector<CubeId>> found(roots.size());
    parallel_for(roots.size(), params.threads,
                 [&](std::size_t j) { scan(grid, roots[j], true, b, params, found[j]); });
    StoppingFamily f;
    f.generation = 1;
    for (std::size_t j = 0; j < roots.size(); ++j)
        for (CubeId q : found[j]) f.boxes.push_back({q, roots[j].index, -1});
    sort_family(f);
    f.shadow_measure = shadow_of(grid, f.boxes);
    return f;
}

StoppingFamily extract_family_next(const DyadicGrid& grid, const StoppingFamily& prev, const DriftField& b,
                                   const ConstructionParams& params)
{
    if (prev.empty()) throw PreconditionError("extract_family_next needs a nonempty previous family");
    std::vector<std::vector<CubeId>> found(prev.boxes.size());
    // Whitney boxes inside S_Q are exactly the U_Q' with Q' a strict descendant of Q
    parallel_for(prev.boxes.size(), params.threads,
                 [&](std::size_t m) { scan(grid, prev.boxes[m].cube, false, b, params, found[m]); });
    StoppingFamily f;
    f.generation = prev.generation + 1;
    for (std::size_t m = 0; m < prev.boxes.size(); ++m)
        for (CubeId q : found[m]) f.boxes.push_back({q, prev.boxes[m].root, static_cast<int>(m)});
    sort_family(f);
    f.shadow_measure = shadow_of(grid, f.boxes);
    return f;
}

// ---------------------------------------------------------------------------

void SawtoothDomain::finalize()
{
    omega_.clear();
    lambda_.clear();
    auto ball = std::make_shared<ExcisedBall>();
    ball->dim = dim();
    omega_.push_back(ball);
    lambda_.push_back(ball);
    for (const StoppingFamily& f : families_) {
        auto om = std::make_shared<ExcisedBall>();
        auto la = std::make_shared<ExcisedBall>();
        om->dim = la->dim = dim();
        for (const SelectedBox& s : f.boxes) {
            const CarlesonBox t = carleson_box(grid_, s.cube);
            om->boxes.push_back(t.t.closure());
            la->boxes.push_back(t.s.closure());
        }
        omega_.push_back(om);
        lambda_.push_back(la);
    }
}

std::shared_ptr<const ExcisedBall> SawtoothDomain::region(Level level) const
{
    if (level.p < 0 || level.p > generations())
        throw PreconditionError("sawtooth level " + std::to_string(level.p) + " does not exist");
    return level.kind == LevelKind::omega ? omega_[static_cast<std::size_t>(level.p)]
                                          : lambda_[static_cast<std::size_t>(level.p)];
}

DomainHandle SawtoothDomain::handle(Level level) const
{
    return DomainHandle::sawtooth(region(level));
}

bool SawtoothDomain::contains(const Point& x, Level level) const
{
    return handle(level).contains(x);
}

double SawtoothDomain::family_fraction(const StoppingFamily& f) const
{
    if (dim() == 2) {
        // count in units of the finest arc: a generation-k arc is 2^(k_max - k) units
        std::int64_t units = 0;
        for (const SelectedBox& s : f.boxes) units += std::int64_t{1} << (grid_.k_max() - s.cube.generation);
        return static_cast<double>(units) / static_cast<double>(std::int64_t{1} << (grid_.k_max() + 2));
    }
    return f.shadow_measure / grid_.total_measure();
}

double SawtoothDomain::ampleness_fraction() const
{
    if (families_.empty()) return 0.0;
    return family_fraction(families_.back());
}

std::vector<double> SawtoothDomain::shadow_fractions() const
{
    std::vector<double> out;
    for (const StoppingFamily& f : families_) out.push_back(family_fraction(f));
    return out;
}

std::vector<double> SawtoothDomain::root_fractions() const
{
    const std::size_t roots = static_cast<std::size_t>(grid_.count(1));
    std::vector<double> out(roots, 0.0);
    if (families_.empty()) return out;
    for (const SelectedBox& s : families_.back().boxes) {
        if (dim() == 2) {
            out[static_cast<std::size_t>(s.root)] += std::ldexp(1.0, 1 - s.cube.generation);
        } else {
            out[static_cast<std::size_t>(s.root)] +=
                surface_measure(grid_.extent(s.cube)) / surface_measure(grid_.extent({1, s.root}));
        }
    }
    return out;
}

SawtoothDomain SawtoothDomain::from_families(const DyadicGrid& grid, double eta,
                                             const std::vector<std::vector<CubeId>>& families)
{
    if (!(eta > 0.0 && eta < 1.0)) throw InputError("eta must lie in (0, 1)");
    SawtoothDomain dom(grid, eta);
    for (std::size_t p = 0; p < families.size(); ++p) {
        StoppingFamily f;
        f.generation = static_cast<int>(p) + 1;
        for (CubeId q : families[p]) {
            if (!grid.valid(q)) throw InputError("sawtooth cube outside the grid");
            SelectedBox s{q, root_of(grid, q), -1};
            if (p > 0) {
                const auto& prev = dom.families_.back().boxes;
                for (std::size_t m = 0; m < prev.size(); ++m)
                    if (prev[m].cube.generation < q.generation && grid.contains(prev[m].cube, q)) {
                        if (s.parent >= 0) throw InputError("previous family boxes overlap");
                        s.parent = static_cast<int>(m);
                    }
                if (s.parent < 0)
                    throw InputError("family " + std::to_string(p + 1) + " box is not inside an S-region of family " +
                                     std::to_string(p));
            }
            f.boxes.push_back(s);
        }
        if (f.empty() && p + 1 < families.size()) throw InputError("only the last family may be empty");
        sort_family(f);
        for (std::size_t a = 0; a < f.boxes.size(); ++a)
            for (std::size_t b = a + 1; b < f.boxes.size(); ++b)
                if (grid.contains(f.boxes[a].cube, f.boxes[b].cube) || grid.contains(f.boxes[b].cube, f.boxes[a].cube))
                    throw InputError("family " + std::to_string(p + 1) + " is not an antichain");
        f.shadow_measure = shadow_of(grid, f.boxes);
        dom.families_.push_back(std::move(f));
    }
    dom.finalize();
    return dom;
}

SawtoothDomain build_ample_sawtooth(const DyadicGrid& grid, const DriftField& b, const ConstructionParams& params)
{
    if (!(params.eps > 0.0)) throw InputError("eps must be positive");
    if (!(params.eta > 0.0 && params.eta < 1.0)) throw InputError("eta must lie in (0, 1)");
    if (!(params.m_bound > 0.0)) throw InputError("M must be positive");
    if (b.dim() != grid.dim()) throw InputError("drift and grid dimensions differ");
    const PointwiseBoundResult pb = pointwise_bound_check(b);
    if (pb.worst_ratio * b.declared_m() > params.m_bound * (1.0 + 1e-12))
        throw InputError("drift violates |B| <= M/delta for the requested M");

    SawtoothDomain dom(grid, params.eta);
    dom.eps = params.eps;
    dom.m_bound = params.m_bound;
    dom.n0 = n0_bound(grid.dim(), params.m_bound, params.eps, params.eta);
    const double target = params.eta * grid.total_measure();

    StoppingFamily f = extract_family_first(grid, b, params);
    if (!f.empty()) {
        for (;;) {
            if (static_cast<std::int64_t>(dom.families_.size()) + 1 > dom.n0)
                throw ConstructionViolation("the construction needs more than N0 = " + std::to_string(dom.n0) +
                                            " families");
            dom.families_.push_back(f);
            if (f.empty() || f.shadow_measure <= target) break;
            f = extract_family_next(grid, dom.families_.back(), b, params);
        }
    }
    dom.finalize();
    return dom;
}

// ---------------------------------------------------------------------------

void write_sawtooth(std::ostream& os, const SawtoothDomain& dom)
{
    os << std::setprecision(17);
    os << "# sawtooth dim " << dom.dim() << " kmax " << dom.grid().k_max() << " eta " << dom.eta() << " eps "
       << dom.eps << " M " << dom.m_bound << " N0 " << dom.n0 << " families " << dom.generations() << '\n';
    os << "# family root generation index\n";
    for (const StoppingFamily& f : dom.families())
        for (const SelectedBox& s : f.boxes)
            os << f.generation << ' ' << s.root << ' ' << s.cube.generation << ' ' << s.cube.index << '\n';
}

SawtoothDomain read_sawtooth(std::istream& is)
{
    std::string line;
    std::string hash, tag, key;
    std::istringstream hs;
    // other comment lines may precede the header
    while (true) {
        if (!std::getline(is, line)) throw InputError("not a sawtooth file");
        hs = std::istringstream(line);
        hash.clear();
        tag.clear();
        hs >> hash >> tag;
        if (hash == "#" && tag == "sawtooth") break;
        if (hash.empty() || hash[0] != '#') throw InputError("not a sawtooth file");
    }
    std::map<std::string, double> header;
    double value;
    while (hs >> key >> value) header[key] = value;
    for (const char* k : {"dim", "kmax", "eta", "families"})
        if (!header.count(k)) throw InputError(std::string("sawtooth header lacks '") + k + "'");
    const DyadicGrid grid(static_cast<int>(header["dim"]), static_cast<int>(header["kmax"]));
    std::vector<std::vector<CubeId>> families(static_cast<std::size_t>(header["families"]));
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long long fam, root, gen, idx;
        if (!(ls >> fam >> root >> gen >> idx) || fam < 1 || fam > static_cast<long long>(families.size()))
            throw InputError("malformed sawtooth record on line " + std::to_string(lineno));
        families[static_cast<std::size_t>(fam - 1)].push_back({static_cast<int>(gen), idx});
    }
    SawtoothDomain dom = SawtoothDomain::from_families(grid, header["eta"], families);
    dom.eps = header.count("eps") ? header["eps"] : 0.0;
    dom.m_bound = header.count("M") ? header["M"] : 0.0;
    dom.n0 = header.count("N0") ? static_cast<std::int64_t>(header["N0"]) : 0;
    return dom;
}

} // namespace ample
