#include "ample/whitney.hpp"

#include <algorithm>
#include <random>

namespace ample {

namespace {

bool arcs_overlap(const Arc& a, const Arc& b)
{
    return std::max(a.lo, b.lo) < std::min(a.hi, b.hi);
}

bool patches_overlap(const CubePatch& a, const CubePatch& b)
{
    return a.face == b.face && std::max(a.u0, b.u0) < std::min(a.u1, b.u1) && std::max(a.v0, b.v0) < std::min(a.v1, b.v1);
}

bool extents_overlap(const AngularExtent& a, const AngularExtent& b)
{
    if (a.index() != b.index()) return false;
    if (const auto* x = std::get_if<Arc>(&a)) return arcs_overlap(*x, std::get<Arc>(b));
    return patches_overlap(std::get<CubePatch>(a), std::get<CubePatch>(b));
}

bool slabs_overlap(const Slab& a, const Slab& b)
{
    return std::max(a.r_lo, b.r_lo) < std::min(a.r_hi, b.r_hi) && extents_overlap(a.extent, b.extent);
}

bool extent_within(const AngularExtent& inner, const AngularExtent& outer)
{
    if (inner.index() != outer.index()) return false;
    if (const auto* a = std::get_if<Arc>(&inner)) {
        const Arc& b = std::get<Arc>(outer);
        return a->lo >= b.lo && a->hi <= b.hi;
    }
    const auto& a = std::get<CubePatch>(inner);
    const auto& b = std::get<CubePatch>(outer);
    return a.face == b.face && a.u0 >= b.u0 && a.u1 <= b.u1 && a.v0 >= b.v0 && a.v1 <= b.v1;
}

bool slab_within(const Slab& inner, const Slab& outer)
{
    return inner.r_lo >= outer.r_lo && inner.r_hi <= outer.r_hi && extent_within(inner.extent, outer.extent);
}

} // namespace

bool Slab::contains(const Point& y) const
{
    const double r = y.norm();
    if (!(r > r_lo && r <= r_hi && r < 1.0)) return false;
    return extent_contains_half_open(extent, y);
}

double Slab::volume() const
{
    const double m = extent_measure_exact(extent);
    if (dim() == 2) return 0.5 * m * (r_hi * r_hi - r_lo * r_lo);
    return m * (r_hi * r_hi * r_hi - r_lo * r_lo * r_lo) / 3.0;
}

Point Face::at(double s, double t) const
{
    if (role != FaceRole::lateral) {
        if (const auto* a = std::get_if<Arc>(&extent)) return Point::polar(radius, a->lo + s * a->width());
        const auto& p = std::get<CubePatch>(extent);
        return cube_direction(p.face, p.u0 + s * (p.u1 - p.u0), p.v0 + t * (p.v1 - p.v0)) * radius;
    }
    const double r = r_lo + s * (r_hi - r_lo);
    if (const auto* a = std::get_if<Arc>(&extent)) return Point::polar(r, index == 3 ? a->lo : a->hi);
    const auto& p = std::get<CubePatch>(extent);
    switch (index) {
    case 3: return cube_direction(p.face, p.u0, p.v0 + t * (p.v1 - p.v0)) * r;
    case 4: return cube_direction(p.face, p.u1, p.v0 + t * (p.v1 - p.v0)) * r;
    case 5: return cube_direction(p.face, p.u0 + t * (p.u1 - p.u0), p.v0) * r;
    default: return cube_direction(p.face, p.u0 + t * (p.u1 - p.u0), p.v1) * r;
    }
}

double Face::area() const
{
    const bool planar = std::holds_alternative<Arc>(extent);
    if (role != FaceRole::lateral) {
        const double m = extent_measure_exact(extent);
        return planar ? radius * m : radius * radius * m;
    }
    if (planar) return r_hi - r_lo;
    // a planar sector between two radial lines
    const Point a = at(0.0, 0.0).normalized(), b = at(0.0, 1.0).normalized();
    const double phi = std::acos(std::clamp(dot(a, b), -1.0, 1.0));
    return 0.5 * phi * (r_hi * r_hi - r_lo * r_lo);
}

WhitneyBox whitney_box(const DyadicGrid& grid, CubeId q)
{
    const int k = q.generation;
    return {q, Slab{grid.extent(q), whitney_r_lo(k), whitney_r_hi(k)}, std::ldexp(1.0, -k)};
}

CarlesonBox carleson_box(const DyadicGrid& grid, CubeId q)
{
    const int k = q.generation;
    const AngularExtent e = grid.extent(q);
    return {q, Slab{e, whitney_r_lo(k), 1.0}, Slab{e, whitney_r_hi(k), 1.0}, Slab{e, whitney_r_lo(k), whitney_r_hi(k)}};
}

std::vector<RefinedBox> refine(const WhitneyBox& u)
{
    const Slab& s = u.region;
    const double rm = 0.5 * (s.r_lo + s.r_hi);
    const double side = 0.5 * u.side_length;
    std::vector<RefinedBox> out;
    if (const auto* a = std::get_if<Arc>(&s.extent)) {
        const double m = a->mid();
        for (int oct = 0; oct < 4; ++oct) {
            const Arc arc = (oct & 2) ? Arc{m, a->hi} : Arc{a->lo, m};
            const double lo = (oct & 1) ? rm : s.r_lo, hi = (oct & 1) ? s.r_hi : rm;
            out.push_back({u.cube, oct, Slab{arc, lo, hi}, side});
        }
        return out;
    }
    const auto& p = std::get<CubePatch>(s.extent);
    const double um = 0.5 * (p.u0 + p.u1), vm = 0.5 * (p.v0 + p.v1);
    for (int oct = 0; oct < 8; ++oct) {
        CubePatch c = p;
        if (oct & 2) c.u0 = um;
        else c.u1 = um;
        if (oct & 4) c.v0 = vm;
        else c.v1 = vm;
        const double lo = (oct & 1) ? rm : s.r_lo, hi = (oct & 1) ? s.r_hi : rm;
        out.push_back({u.cube, oct, Slab{c, lo, hi}, side});
    }
    return out;
}

std::vector<Face> faces(const Slab& s)
{
    std::vector<Face> out;
    out.push_back({1, FaceRole::top, s.r_lo, 0.0, 0.0, s.extent});
    out.push_back({2, FaceRole::bottom, s.r_hi, 0.0, 0.0, s.extent});
    const int lateral = s.dim() == 2 ? 2 : 4;
    for (int i = 0; i < lateral; ++i) out.push_back({3 + i, FaceRole::lateral, 0.0, s.r_lo, s.r_hi, s.extent});
    return out;
}

int whitney_generation(double r)
{
    if (!(r > 0.5) || r >= 1.0) return 0;
    const double d = 1.0 - r;
    int k = static_cast<int>(std::ceil(-std::log2(d))) - 1;
    // exact correction at slab endpoints
    while (k > 1 && !(r > whitney_r_lo(k))) --k;
    while (r > whitney_r_hi(k)) ++k;
    return std::max(k, 1);
}

CubeId containing_whitney(const DyadicGrid& grid, const Point& y)
{
    const int k = whitney_generation(y.norm());
    if (k < 1 || k > grid.k_max()) return {0, 0};
    return grid.locate(y, k);
}

PartitionReport verify_whitney_partition(const DyadicGrid& grid)
{
    PartitionReport rep;
    rep.disjoint = rep.refined_partition = rep.refined_containment = rep.faces_consistent = true;
    const int kmax = grid.k_max();
    const int dim = grid.dim();
    const int exhaustive = dim == 2 ? kmax : std::min(kmax, 4);
    std::mt19937_64 rng(0x3117);

    std::vector<WhitneyBox> boxes;
    double total = 0.0;
    for (int k = 1; k <= kmax; ++k) {
        if (k <= exhaustive) {
            for (CubeId id : grid.generation(k)) boxes.push_back(whitney_box(grid, id));
            double gen = 0.0;
            // sum the generation's volumes with exact arithmetic on the shared slab
            for (CubeId id : grid.generation(k)) gen += extent_measure_exact(grid.extent(id));
            const double rl = whitney_r_lo(k), rh = whitney_r_hi(k);
            total += dim == 2 ? 0.5 * gen * (rh * rh - rl * rl) : gen * (rh * rh * rh - rl * rl * rl) / 3.0;
        } else {
            // sampled generation: every cube of a generation shares the slab
            const double rl = whitney_r_lo(k), rh = whitney_r_hi(k);
            total += grid.total_measure() * (dim == 2 ? 0.5 * (rh * rh - rl * rl) : (rh * rh * rh - rl * rl * rl) / 3.0);
            std::uniform_int_distribution<std::int64_t> pick(0, grid.count(k) - 1);
            for (int s = 0; s < 256; ++s) boxes.push_back(whitney_box(grid, {k, pick(rng)}));
        }
    }
    const double r_in = 0.5, r_out = whitney_r_hi(kmax);
    const double covered = dim == 2 ? kPi * (r_out * r_out - r_in * r_in)
                                    : 4.0 * kPi * (r_out * r_out * r_out - r_in * r_in * r_in) / 3.0;
    rep.annulus_volume = dim == 2 ? kPi * (1.0 - 0.25) : 4.0 * kPi * (1.0 - 0.125) / 3.0;
    rep.collar_volume = rep.annulus_volume - covered;
    rep.volume_error = std::abs(total - covered);

    // pairwise disjointness; boxes of different generations are separated radially
    for (std::size_t i = 0; i < boxes.size() && rep.disjoint; ++i)
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
            if (boxes[i].cube == boxes[j].cube) continue;
            if (slabs_overlap(boxes[i].region, boxes[j].region)) {
                rep.disjoint = false;
                rep.witness = "boxes (" + std::to_string(boxes[i].cube.generation) + "," +
                              std::to_string(boxes[i].cube.index) + ") and (" + std::to_string(boxes[j].cube.generation) +
                              "," + std::to_string(boxes[j].cube.index) + ") overlap";
                break;
            }
        }

    // refinement: children pairwise disjoint, inside the parent, volumes add up
    const int refine_through = std::min(exhaustive, 6);
    for (const WhitneyBox& u : boxes) {
        if (u.cube.generation > refine_through) continue;
        const auto kids = refine(u);
        double vol = 0.0;
        for (std::size_t a = 0; a < kids.size(); ++a) {
            vol += kids[a].region.volume();
            if (!slab_within(kids[a].region, u.region)) rep.refined_containment = false;
            // exactly one Whitney box of the same generation contains the child's center
            const Point c = extent_center(kids[a].region.extent) * (0.5 * (kids[a].region.r_lo + kids[a].region.r_hi));
            if (containing_whitney(grid, c) != u.cube) rep.refined_containment = false;
            for (std::size_t b = a + 1; b < kids.size(); ++b)
                if (slabs_overlap(kids[a].region, kids[b].region)) rep.refined_partition = false;
        }
        if (std::abs(vol - u.region.volume()) > 1e-14 * std::max(1.0, u.region.volume()) + 1e-15)
            rep.refined_partition = false;
        if (!rep.refined_partition || !rep.refined_containment) {
            if (rep.witness.empty())
                rep.witness = "refinement of (" + std::to_string(u.cube.generation) + "," + std::to_string(u.cube.index) + ")";
            break;
        }
    }

    // face roles: bottom of U_Q is the top of S_Q; top of U_Q is at 1 - 2^-k
    for (const WhitneyBox& u : boxes) {
        const CarlesonBox t = carleson_box(grid, u.cube);
        const auto fu = faces(u.region);
        const auto fs = faces(t.s);
        if (fu[1].radius != fs[0].radius || fu[0].radius != whitney_r_lo(u.cube.generation) ||
            t.t.r_lo != t.u.r_lo || t.s.r_lo != t.u.r_hi) {
            rep.faces_consistent = false;
            if (rep.witness.empty()) rep.witness = "face mismatch at generation " + std::to_string(u.cube.generation);
            break;
        }
    }
    return rep;
}

} // namespace ample
