#include "ample/dyadic.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

namespace ample {

namespace {

std::int64_t pow2(int e)
{
    return std::int64_t{1} << e;
}

// Angular length of the circle collar within chord distance d of an arc endpoint.
double chord_to_angle(double d)
{
    return 2.0 * std::asin(std::min(1.0, 0.5 * d));
}

template <int N>
double gauss_patch(const CubePatch& p)
{
    using boost::math::quadrature::gauss;
    return gauss<double, N>::integrate(
        [&](double u) {
            return gauss<double, N>::integrate(
                [&](double v) { return std::pow(1.0 + u * u + v * v, -1.5); }, p.v0, p.v1);
        },
        p.u0, p.u1);
}

double adaptive_patch_area(const CubePatch& p, int depth = 0)
{
    const double coarse = gauss_patch<7>(p);
    const double fine = gauss_patch<15>(p);
    if (std::abs(fine - coarse) <= 1e-10 * std::abs(fine) || depth >= 6) return fine;
    const double um = 0.5 * (p.u0 + p.u1), vm = 0.5 * (p.v0 + p.v1);
    return adaptive_patch_area({p.face, p.u0, um, p.v0, vm}, depth + 1) +
           adaptive_patch_area({p.face, um, p.u1, p.v0, vm}, depth + 1) +
           adaptive_patch_area({p.face, p.u0, um, vm, p.v1}, depth + 1) +
           adaptive_patch_area({p.face, um, p.u1, vm, p.v1}, depth + 1);
}

// Chord distance from a unit vector to the great-circle arc between unit vectors a and b.
double chord_to_great_arc(const Point& x, const Point& a, const Point& b)
{
    const Point n = cross(a, b).normalized();
    const Point proj = x - n * dot(x, n);
    double best = std::min(distance(x, a), distance(x, b));
    if (proj.norm() > 0.0) {
        const Point q = proj.normalized();
        // q lies on the arc when it is between a and b
        if (dot(cross(a, q), n) >= 0.0 && dot(cross(q, b), n) >= 0.0) best = std::min(best, distance(x, q));
    }
    return best;
}

struct CubeGeometry {
    double diameter;
    double inner_radius;  // chord radius of the largest surface ball about the center
};

CubeGeometry cube_geometry(const DyadicCube& q)
{
    if (const auto* arc = std::get_if<Arc>(&q.extent)) {
        const double w = arc->width();
        return {2.0 * std::sin(0.5 * std::min(w, kPi)), 2.0 * std::sin(0.25 * w)};
    }
    const auto& p = std::get<CubePatch>(q.extent);
    const std::array<Point, 4> corners{cube_direction(p.face, p.u0, p.v0), cube_direction(p.face, p.u1, p.v0),
                                       cube_direction(p.face, p.u1, p.v1), cube_direction(p.face, p.u0, p.v1)};
    double diam = 0.0;
    // gnomonic patches are geodesically convex; the diameter is attained on the boundary
    constexpr int kEdgeSamples = 16;
    std::vector<Point> rim;
    for (int e = 0; e < 4; ++e) {
        const Point& a = corners[static_cast<std::size_t>(e)];
        const Point& b = corners[static_cast<std::size_t>((e + 1) % 4)];
        for (int s = 0; s < kEdgeSamples; ++s) {
            const double t = static_cast<double>(s) / kEdgeSamples;
            rim.push_back((a * (1.0 - t) + b * t).normalized());
        }
    }
    for (std::size_t i = 0; i < rim.size(); ++i)
        for (std::size_t j = i + 1; j < rim.size(); ++j) diam = std::max(diam, distance(rim[i], rim[j]));
    double inner = std::numeric_limits<double>::infinity();
    for (int e = 0; e < 4; ++e)
        inner = std::min(inner, chord_to_great_arc(q.center, corners[static_cast<std::size_t>(e)],
                                                   corners[static_cast<std::size_t>((e + 1) % 4)]));
    return {diam, inner};
}

// Surface measure of {x in Q : dist(x, E \ Q) <= d}.
double collar_measure(const DyadicCube& q, double d, std::mt19937_64& rng, int samples)
{
    if (const auto* arc = std::get_if<Arc>(&q.extent)) {
        const double w = arc->width();
        return std::min(w, 2.0 * chord_to_angle(d));
    }
    // 3-D: Monte Carlo on the gnomonic rectangle weighted by the area element
    const auto& p = std::get<CubePatch>(q.extent);
    const std::array<Point, 4> corners{cube_direction(p.face, p.u0, p.v0), cube_direction(p.face, p.u1, p.v0),
                                       cube_direction(p.face, p.u1, p.v1), cube_direction(p.face, p.u0, p.v1)};
    std::uniform_real_distribution<double> uu(p.u0, p.u1), vv(p.v0, p.v1);
    double in = 0.0, total = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double u = uu(rng), v = vv(rng);
        const double w = std::pow(1.0 + u * u + v * v, -1.5);
        const Point x = cube_direction(p.face, u, v);
        double bd = std::numeric_limits<double>::infinity();
        for (int e = 0; e < 4; ++e)
            bd = std::min(bd, chord_to_great_arc(x, corners[static_cast<std::size_t>(e)],
                                                 corners[static_cast<std::size_t>((e + 1) % 4)]));
        total += w;
        if (bd <= d) in += w;
    }
    return q.surface_measure * in / total;
}

std::string fmt_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace

// ---------------------------------------------------------------------------

DyadicGrid::DyadicGrid(int dim, int k_max) : dim_(dim), k_max_(k_max)
{
    if (dim != 2 && dim != 3) throw InputError("dyadic grid dimension must be 2 or 3");
    const int cap = dim == 2 ? kMaxGeneration2D : kMaxGeneration3D;
    if (k_max < 1 || k_max > cap)
        throw InputError("k_max must lie in [1, " + std::to_string(cap) + "] for dimension " + std::to_string(dim));
}

std::int64_t DyadicGrid::count(int k) const
{
    return dim_ == 2 ? pow2(k + 2) : 6 * pow2(2 * (k - 1));
}

bool DyadicGrid::valid(CubeId id) const
{
    return id.generation >= 1 && id.generation <= k_max_ && id.index >= 0 && id.index < count(id.generation);
}

void DyadicGrid::check(CubeId id) const
{
    if (!valid(id))
        throw InputError("cube (" + std::to_string(id.generation) + ", " + std::to_string(id.index) +
                         ") is not in the grid");
}

std::vector<CubeId> DyadicGrid::generation(int k) const
{
    if (k < 1 || k > k_max_) throw InputError("generation out of range");
    std::vector<CubeId> out;
    out.reserve(static_cast<std::size_t>(count(k)));
    for (std::int64_t j = 0; j < count(k); ++j) out.push_back({k, j});
    return out;
}

AngularExtent DyadicGrid::extent(CubeId id) const
{
    check(id);
    if (dim_ == 2) {
        const double n = static_cast<double>(count(id.generation));
        const double lo = kTwoPi * static_cast<double>(id.index) / n;
        const double hi = id.index + 1 == count(id.generation) ? kTwoPi : kTwoPi * static_cast<double>(id.index + 1) / n;
        return Arc{lo, hi};
    }
    const std::int64_t side = pow2(id.generation - 1);
    const std::int64_t per_face = side * side;
    const int face = static_cast<int>(id.index / per_face);
    const std::int64_t rem = id.index % per_face;
    const std::int64_t i = rem / side, j = rem % side;
    const double h = 2.0 / static_cast<double>(side);
    return CubePatch{face, -1.0 + h * static_cast<double>(i), -1.0 + h * static_cast<double>(i + 1),
                     -1.0 + h * static_cast<double>(j), -1.0 + h * static_cast<double>(j + 1)};
}

DyadicCube DyadicGrid::cube(CubeId id) const
{
    DyadicCube q;
    q.id = id;
    q.extent = extent(id);
    q.center = extent_center(q.extent);
    q.surface_measure = surface_measure(q.extent);
    return q;
}

CubeId DyadicGrid::parent(CubeId id) const
{
    check(id);
    if (id.generation == 1) throw PreconditionError("generation-1 cubes have no parent in the grid");
    if (dim_ == 2) return {id.generation - 1, id.index / 2};
    const std::int64_t side = pow2(id.generation - 1);
    const std::int64_t per_face = side * side;
    const std::int64_t face = id.index / per_face, rem = id.index % per_face;
    const std::int64_t i = rem / side, j = rem % side;
    const std::int64_t pside = side / 2;
    return {id.generation - 1, face * pside * pside + (i / 2) * pside + j / 2};
}

std::vector<CubeId> DyadicGrid::children(CubeId id) const
{
    check(id);
    if (id.generation == k_max_) return {};
    const int k = id.generation + 1;
    if (dim_ == 2) return {{k, 2 * id.index}, {k, 2 * id.index + 1}};
    const std::int64_t side = pow2(id.generation - 1);
    const std::int64_t per_face = side * side;
    const std::int64_t face = id.index / per_face, rem = id.index % per_face;
    const std::int64_t i = rem / side, j = rem % side;
    const std::int64_t cside = 2 * side;
    std::vector<CubeId> out;
    for (std::int64_t di = 0; di < 2; ++di)
        for (std::int64_t dj = 0; dj < 2; ++dj)
            out.push_back({k, face * cside * cside + (2 * i + di) * cside + 2 * j + dj});
    return out;
}

CubeId DyadicGrid::ancestor(CubeId id, int k) const
{
    check(id);
    if (k > id.generation || k < 1) throw PreconditionError("ancestor generation out of range");
    while (id.generation > k) id = parent(id);
    return id;
}

bool DyadicGrid::contains(CubeId outer, CubeId inner) const
{
    if (inner.generation < outer.generation) return false;
    return ancestor(inner, outer.generation) == outer;
}

CubeId DyadicGrid::locate(const Point& y, int k) const
{
    if (k < 1 || k > k_max_) throw InputError("generation out of range");
    if (dim_ == 2) {
        const std::int64_t n = count(k);
        auto j = static_cast<std::int64_t>(std::floor(y.angle() / kTwoPi * static_cast<double>(n)));
        j = std::clamp<std::int64_t>(j, 0, n - 1);
        // guard the floor against rounding at arc endpoints
        const Arc a = std::get<Arc>(extent({k, j}));
        const double t = y.angle();
        if (t < a.lo && j > 0) --j;
        else if (t >= a.hi && j + 1 < n) ++j;
        return {k, j};
    }
    const FaceCoords fc = cube_face_coords(y);
    const std::int64_t side = pow2(k - 1);
    auto cell = [&](double s) {
        auto i = static_cast<std::int64_t>(std::floor((s + 1.0) * 0.5 * static_cast<double>(side)));
        return std::clamp<std::int64_t>(i, 0, side - 1);
    };
    return {k, fc.face * side * side + cell(fc.u) * side + cell(fc.v)};
}

DyadicGrid build_grid(int dim, int k_max)
{
    return DyadicGrid(dim, k_max);
}

double surface_measure(const AngularExtent& e)
{
    if (const auto* arc = std::get_if<Arc>(&e)) return arc->width();
    return adaptive_patch_area(std::get<CubePatch>(e));
}

double surface_measure(const DyadicCube& q)
{
    return surface_measure(q.extent);
}

// ---------------------------------------------------------------------------

bool PropertyReport::all_pass() const
{
    return std::all_of(entries.begin(), entries.end(), [](const PropertyEntry& e) { return e.pass; });
}

PropertyReport verify_grid_properties(const DyadicGrid& grid)
{
    PropertyReport rep;
    const int dim = grid.dim();
    const int kmax = grid.k_max();
    // 3-D generations beyond this are checked on a deterministic sample of cubes
    const int exhaustive = dim == 2 ? kmax : std::min(kmax, 5);
    rep.exhaustive_through = exhaustive;
    std::mt19937_64 rng(0x5eed);
    const double c_star_ceiling = dim == 2 ? 4.0 : 8.0;

    auto cubes_of = [&](int k) {
        if (k <= exhaustive) return grid.generation(k);
        std::vector<CubeId> ids;
        std::uniform_int_distribution<std::int64_t> pick(0, grid.count(k) - 1);
        for (int s = 0; s < 512; ++s) ids.push_back({k, pick(rng)});
        // the most distorted cubes sit at face corners and edges
        const std::int64_t side = std::int64_t{1} << (k - 1);
        const std::array<std::int64_t, 3> marks{0, side / 2, side - 1};
        for (std::int64_t f = 0; f < 6; ++f)
            for (std::int64_t i : marks)
                for (std::int64_t j : marks) ids.push_back({k, f * side * side + i * side + j});
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        return ids;
    };

    // (i) cover: measures of each generation sum to the sphere's measure
    {
        PropertyEntry e{"(i) cover", true, 0.0, ""};
        const double tol = dim == 2 ? 1e-10 : 1e-6;
        for (int k = 1; k <= exhaustive; ++k) {
            double sum = 0.0;
            for (std::int64_t j = 0; j < grid.count(k); ++j) sum += surface_measure(grid.extent({k, j}));
            const double err = std::abs(sum - grid.total_measure());
            e.value = std::max(e.value, err);
            if (err > tol) {
                e.pass = false;
                e.witness = "generation " + std::to_string(k) + " total " + fmt_double(sum);
            }
        }
        // arcs tile without gaps or overlaps
        if (dim == 2) {
            for (int k = 1; k <= exhaustive && e.pass; ++k) {
                double prev = 0.0;
                for (std::int64_t j = 0; j < grid.count(k); ++j) {
                    const Arc a = std::get<Arc>(grid.extent({k, j}));
                    if (a.lo != prev || !(a.hi > a.lo)) {
                        e.pass = false;
                        e.witness = "gap at generation " + std::to_string(k) + " index " + std::to_string(j);
                        break;
                    }
                    prev = a.hi;
                }
                if (e.pass && prev != kTwoPi) {
                    e.pass = false;
                    e.witness = "generation " + std::to_string(k) + " does not close";
                }
            }
        }
        rep.entries.push_back(e);
    }

    // (ii)-(iii) nesting: each child lies inside its parent and siblings partition it
    {
        PropertyEntry e{"(ii)-(iii) nesting", true, 0.0, ""};
        for (int k = 2; k <= kmax && e.pass; ++k) {
            for (CubeId id : cubes_of(k - 1)) {
                const auto kids = grid.children(id);
                double kid_measure = 0.0;
                for (CubeId c : kids) {
                    if (grid.parent(c) != id) {
                        e.pass = false;
                        e.witness = "parent map broken at (" + std::to_string(c.generation) + "," + std::to_string(c.index) + ")";
                    }
                    const AngularExtent ce = grid.extent(c);
                    if (!extent_contains(grid.extent(id), extent_center(ce))) {
                        e.pass = false;
                        e.witness = "child center outside parent";
                    }
                    kid_measure += surface_measure(ce);
                }
                const double pm = surface_measure(grid.extent(id));
                const double rel = std::abs(kid_measure - pm) / pm;
                e.value = std::max(e.value, rel);
                if (rel > (dim == 2 ? 1e-12 : 1e-7)) {
                    e.pass = false;
                    e.witness = "children do not partition parent";
                }
                if (!e.pass) break;
            }
        }
        // all pairs (k < m) for small grids: exactly one containing cube per generation
        if (dim == 2 && kmax <= 8 && e.pass) {
            for (int m = 2; m <= kmax && e.pass; ++m)
                for (CubeId fine : grid.generation(m)) {
                    const Arc fa = std::get<Arc>(grid.extent(fine));
                    for (int k = 1; k < m; ++k) {
                        int hits = 0;
                        for (CubeId coarse : grid.generation(k)) {
                            const Arc ca = std::get<Arc>(grid.extent(coarse));
                            if (fa.lo >= ca.lo && fa.hi <= ca.hi) ++hits;
                        }
                        if (hits != 1) {
                            e.pass = false;
                            e.witness = "cube (" + std::to_string(m) + "," + std::to_string(fine.index) + ") lies in " +
                                        std::to_string(hits) + " cubes of generation " + std::to_string(k);
                        }
                    }
                }
        }
        rep.entries.push_back(e);
    }

    // (iv) diameter and (v) inner surface ball
    {
        PropertyEntry d{"(iv) diameter", true, 0.0, ""};
        PropertyEntry b{"(v) surface ball", true, 0.0, ""};
        double c_star = 0.0, a0 = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= kmax; ++k) {
            double ck = 0.0, ak = std::numeric_limits<double>::infinity();
            const double scale = std::ldexp(1.0, k);
            // arcs of one generation are congruent
            const std::vector<CubeId> ids = dim == 2 ? std::vector<CubeId>{{k, 0}} : cubes_of(k);
            for (CubeId id : ids) {
                const CubeGeometry g = cube_geometry(grid.cube(id));
                ck = std::max(ck, g.diameter * scale);
                ak = std::min(ak, g.inner_radius * scale);
            }
            rep.c_star_by_generation.push_back(ck);
            rep.a0_by_generation.push_back(ak);
            c_star = std::max(c_star, ck);
            a0 = std::min(a0, ak);
        }
        rep.c_star_diameter = c_star;
        rep.a0 = a0;
        d.value = c_star;
        d.pass = c_star <= c_star_ceiling;
        if (!d.pass) d.witness = "fitted C_* " + fmt_double(c_star) + " exceeds " + fmt_double(c_star_ceiling);
        b.value = a0;
        b.pass = a0 > 0.0;
        rep.entries.push_back(d);
        rep.entries.push_back(b);
    }

    // (vi) thin boundary: fit collar/sigma(Q) <= C rho^gamma over rho in {a0/2, a0/4, a0/8}
    {
        PropertyEntry t{"(vi) thin boundary", true, 0.0, ""};
        const std::array<double, 3> rhos{rep.a0 / 2.0, rep.a0 / 4.0, rep.a0 / 8.0};
        std::array<double, 3> ratio{};
        for (std::size_t i = 0; i < rhos.size(); ++i) {
            double worst = 0.0;
            for (int k = 1; k <= kmax; ++k) {
                const double d = rhos[i] * std::ldexp(1.0, -k);
                const std::vector<CubeId> ids =
                    dim == 2 ? std::vector<CubeId>{{k, 0}}
                             : [&] {
                                   auto all = cubes_of(std::min(k, 3));
                                   if (all.size() > 24) all.resize(24);
                                   if (k > 3) {
                                       std::vector<CubeId> deep;
                                       for (CubeId c : all) deep.push_back(grid.locate(grid.cube(c).center, k));
                                       return deep;
                                   }
                                   return all;
                               }();
                for (CubeId id : ids) {
                    const DyadicCube q = grid.cube(id);
                    worst = std::max(worst, collar_measure(q, d, rng, 4000) / q.surface_measure);
                }
            }
            ratio[i] = worst;
        }
        // least-squares slope in log-log
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            const double x = std::log(rhos[i]), y = std::log(ratio[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double gamma = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
        double c = 0.0;
        for (std::size_t i = 0; i < 3; ++i) c = std::max(c, ratio[i] / std::pow(rhos[i], gamma));
        rep.gamma = gamma;
        rep.c_star_thin = c;
        t.value = gamma;
        t.pass = std::isfinite(gamma) && gamma > 0.0 && std::isfinite(c) && c <= c_star_ceiling;
        if (!t.pass) t.witness = "gamma " + fmt_double(gamma) + ", C " + fmt_double(c);
        rep.entries.push_back(t);
    }
    return rep;
}

std::string to_string(const AngularExtent& e)
{
    std::ostringstream os;
    os << std::setprecision(17);
    if (const auto* arc = std::get_if<Arc>(&e)) {
        os << "arc " << arc->lo << ' ' << arc->hi;
    } else {
        const auto& p = std::get<CubePatch>(e);
        os << "patch " << p.face << ' ' << p.u0 << ' ' << p.u1 << ' ' << p.v0 << ' ' << p.v1;
    }
    return os.str();
}

void write_grid(std::ostream& os, const DyadicGrid& grid)
{
    os << "# dyadic grid dim=" << grid.dim() << " k_max=" << grid.k_max() << '\n';
    os << "# generation index extent measure\n";
    os << std::setprecision(17);
    for (int k = 1; k <= grid.k_max(); ++k)
        for (std::int64_t j = 0; j < grid.count(k); ++j) {
            const AngularExtent e = grid.extent({k, j});
            os << k << ' ' << j << ' ' << to_string(e) << ' ' << surface_measure(e) << '\n';
        }
}

} // namespace ample
