#include "ample/geometry.hpp"

#include <algorithm>
#include <limits>

namespace ample {

namespace {

constexpr double kTieTol = 1e-14;
constexpr double kClosedTol = 1e-12;

struct Near2 {
    double distance;
    double x;
    double y;
    int face;
};

double segment_distance(double px, double py, double ax, double ay, double bx, double by, double& qx, double& qy)
{
    const double ux = bx - ax, uy = by - ay;
    const double len2 = ux * ux + uy * uy;
    double t = len2 > 0.0 ? ((px - ax) * ux + (py - ay) * uy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    qx = ax + t * ux;
    qy = ay + t * uy;
    return std::hypot(px - qx, py - qy);
}

// Nearest point of the closed annular sector {r_in <= rho <= r_out, 0 <= phi <= w}.
Near2 sector_nearest(double px, double py, double r_in, double r_out, double w)
{
    const double rho = std::hypot(px, py);
    if (rho == 0.0) {
        if (r_in == 0.0) return {0.0, px, py, 0};
        return {r_in, r_in, 0.0, 1};
    }
    const double phi = wrap_angle(std::atan2(py, px));
    if (phi <= w + kClosedTol || phi >= kTwoPi - kClosedTol) {
        if (rho < r_in) return {r_in - rho, r_in * px / rho, r_in * py / rho, 1};
        if (rho > r_out) return {rho - r_out, r_out * px / rho, r_out * py / rho, 2};
        // on or in the closed box: report the nearest face
        const double t = phi > w + kClosedTol ? 0.0 : phi;
        auto ray = [rho](double a) { return a < 0.5 * kPi ? rho * std::sin(std::max(0.0, a)) : rho; };
        const std::array<double, 4> d{r_in > 0.0 ? rho - r_in : std::numeric_limits<double>::infinity(), r_out - rho,
                                      ray(t), ray(w - t)};
        const int face = static_cast<int>(std::min_element(d.begin(), d.end()) - d.begin()) + 1;
        return {0.0, px, py, face};
    }
    double ax, ay, bx, by;
    const double da = segment_distance(px, py, r_in, 0.0, r_out, 0.0, ax, ay);
    const double cw = std::cos(w), sw = std::sin(w);
    const double db = segment_distance(px, py, r_in * cw, r_in * sw, r_out * cw, r_out * sw, bx, by);
    if (db < da) return {db, bx, by, 4};
    return {da, ax, ay, 3};
}

void cube_axes(int face, int& a, double& s, int& b, int& c)
{
    a = face / 2;
    s = (face % 2 == 0) ? 1.0 : -1.0;
    b = (a + 1) % 3;
    c = (a + 2) % 3;
}

double gnomonic_area_primitive(double u, double v)
{
    return std::atan(u * v / std::sqrt(1.0 + u * u + v * v));
}

Point perpendicular(const Point& a)
{
    if (a.dim() == 2) return {-a[1], a[0]};
    // least-aligned coordinate axis, crossed with a
    int k = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(a[i]) < std::abs(a[k])) k = i;
    return cross(a, Point::axis(3, k)).normalized();
}

bool better(const BoundaryHit& cand, const BoundaryHit& best)
{
    if (!std::isfinite(best.distance)) return true;
    const double tol = kTieTol * std::max(1.0, best.distance);
    if (cand.distance < best.distance - tol) return true;
    if (cand.distance > best.distance + tol) return false;
    return lex_less(cand.point, best.point);
}

} // namespace

// ---------------------------------------------------------------------------
// Point

Point Point::zero(int dim)
{
    return dim == 2 ? Point(0.0, 0.0) : Point(0.0, 0.0, 0.0);
}

Point Point::axis(int dim, int i)
{
    Point p = zero(dim);
    p[i] = 1.0;
    return p;
}

double Point::angle() const
{
    return wrap_angle(std::atan2(c_[1], c_[0]));
}

Point Point::normalized() const
{
    const double n = norm();
    if (n == 0.0) return axis(dim_, 0);
    return *this * (1.0 / n);
}

bool Point::finite() const
{
    return std::isfinite(c_[0]) && std::isfinite(c_[1]) && std::isfinite(c_[2]);
}

Point& Point::operator+=(const Point& o)
{
    for (std::size_t i = 0; i < 3; ++i) c_[i] += o.c_[i];
    return *this;
}

Point& Point::operator-=(const Point& o)
{
    for (std::size_t i = 0; i < 3; ++i) c_[i] -= o.c_[i];
    return *this;
}

Point& Point::operator*=(double s)
{
    for (double& v : c_) v *= s;
    return *this;
}

double dot(const Point& a, const Point& b)
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

double distance(const Point& a, const Point& b)
{
    return (a - b).norm();
}

Point cross(const Point& a, const Point& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

bool lex_less(const Point& a, const Point& b)
{
    for (int i = 0; i < a.dim(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

double wrap_angle(double theta)
{
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

// ---------------------------------------------------------------------------
// Angular extents

int extent_dim(const AngularExtent& e)
{
    return std::holds_alternative<Arc>(e) ? 2 : 3;
}

FaceCoords cube_face_coords(const Point& dir)
{
    int a = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(dir[i]) > std::abs(dir[a])) a = i;
    const double w = std::abs(dir[a]);
    const int face = 2 * a + (dir[a] >= 0.0 ? 0 : 1);
    return {face, dir[(a + 1) % 3] / w, dir[(a + 2) % 3] / w};
}

Point cube_direction(int face, double u, double v)
{
    int a, b, c;
    double s;
    cube_axes(face, a, s, b, c);
    Point p(0.0, 0.0, 0.0);
    p[a] = s;
    p[b] = u;
    p[c] = v;
    return p.normalized();
}

Point extent_center(const AngularExtent& e)
{
    if (const auto* arc = std::get_if<Arc>(&e)) return Point::polar(1.0, arc->mid());
    const auto& p = std::get<CubePatch>(e);
    return cube_direction(p.face, 0.5 * (p.u0 + p.u1), 0.5 * (p.v0 + p.v1));
}

bool extent_contains(const AngularExtent& e, const Point& dir)
{
    if (const auto* arc = std::get_if<Arc>(&e)) {
        const double d = wrap_angle(dir.angle() - arc->lo);
        return d <= arc->width() + kClosedTol || d >= kTwoPi - kClosedTol;
    }
    const auto& p = std::get<CubePatch>(e);
    int a, b, c;
    double s;
    cube_axes(p.face, a, s, b, c);
    const double w = s * dir[a];
    if (w <= 0.0) return false;
    const double u = dir[b] / w, v = dir[c] / w;
    return u >= p.u0 - kClosedTol && u <= p.u1 + kClosedTol && v >= p.v0 - kClosedTol && v <= p.v1 + kClosedTol;
}

bool extent_contains_half_open(const AngularExtent& e, const Point& dir)
{
    if (const auto* arc = std::get_if<Arc>(&e)) {
        const double t = dir.angle();
        return t >= arc->lo && t < arc->hi;
    }
    const auto& p = std::get<CubePatch>(e);
    const FaceCoords fc = cube_face_coords(dir);
    if (fc.face != p.face) return false;
    const bool in_u = fc.u >= p.u0 && (fc.u < p.u1 || p.u1 == 1.0);
    const bool in_v = fc.v >= p.v0 && (fc.v < p.v1 || p.v1 == 1.0);
    return in_u && in_v;
}

bool extents_meet_closed(const AngularExtent& a, const AngularExtent& b)
{
    if (const auto* x = std::get_if<Arc>(&a)) {
        const Arc& y = std::get<Arc>(b);
        for (double shift : {-kTwoPi, 0.0, kTwoPi})
            if (x->lo + shift <= y.hi && y.lo <= x->hi + shift) return true;
        return false;
    }
    const auto& p = std::get<CubePatch>(a);
    const auto& q = std::get<CubePatch>(b);
    if (p.face == q.face) return p.u0 <= q.u1 && q.u0 <= p.u1 && p.v0 <= q.v1 && q.v0 <= p.v1;
    auto corner_in = [](const CubePatch& c, const CubePatch& other) {
        for (double u : {c.u0, c.u1})
            for (double v : {c.v0, c.v1}) {
                const Point d = cube_direction(c.face, u, v);
                // an edge direction belongs to two faces; test it in the other face's coordinates
                const int axis = other.face / 2;
                const double sign = other.face % 2 ? -1.0 : 1.0;
                const double lead = sign * d[axis];
                if (lead <= 0.0) continue;
                const int ia = (axis + 1) % 3, ib = (axis + 2) % 3;
                const double ou = d[ia] / lead, ov = d[ib] / lead;
                const double tol = 1e-12;
                if (std::abs(ou) <= 1.0 + tol && std::abs(ov) <= 1.0 + tol && ou >= other.u0 - tol && ou <= other.u1 + tol &&
                    ov >= other.v0 - tol && ov <= other.v1 + tol)
                    return true;
            }
        return false;
    };
    return corner_in(p, q) || corner_in(q, p);
}

double extent_measure_exact(const AngularExtent& e)
{
    if (const auto* arc = std::get_if<Arc>(&e)) return arc->width();
    const auto& p = std::get<CubePatch>(e);
    return gnomonic_area_primitive(p.u1, p.v1) - gnomonic_area_primitive(p.u0, p.v1) -
           gnomonic_area_primitive(p.u1, p.v0) + gnomonic_area_primitive(p.u0, p.v0);
}

// ---------------------------------------------------------------------------
// Polar boxes

bool PolarBox::contains(const Point& y) const
{
    const double r = y.norm();
    if (r < r_inner - kClosedTol || r > r_outer + kClosedTol) return false;
    if (r == 0.0) return r_inner == 0.0;
    return extent_contains(extent, y);
}

double PolarBox::volume() const
{
    if (const auto* arc = std::get_if<Arc>(&extent))
        return 0.5 * arc->width() * (r_outer * r_outer - r_inner * r_inner);
    const double r3 = r_outer * r_outer * r_outer - r_inner * r_inner * r_inner;
    return extent_measure_exact(extent) * r3 / 3.0;
}

BoxProximity nearest_on_box(const PolarBox& box, const Point& x)
{
    const double rho = x.norm();
    if (rho == 0.0) {
        if (box.r_inner == 0.0) return {0.0, x, 0};
        return {box.r_inner, extent_center(box.extent) * box.r_inner, 1};
    }

    if (const auto* arc = std::get_if<Arc>(&box.extent)) {
        const double c = std::cos(arc->lo), s = std::sin(arc->lo);
        // rotate into the frame where the arc starts at angle 0
        const double lx = c * x[0] + s * x[1];
        const double ly = -s * x[0] + c * x[1];
        const Near2 n = sector_nearest(lx, ly, box.r_inner, box.r_outer, arc->width());
        return {n.distance, Point(c * n.x - s * n.y, s * n.x + c * n.y), n.face};
    }

    if (extent_contains(box.extent, x)) {
        if (rho < box.r_inner) return {box.r_inner - rho, x * (box.r_inner / rho), 1};
        if (rho > box.r_outer) return {rho - box.r_outer, x * (box.r_outer / rho), 2};
    }

    const auto& p = std::get<CubePatch>(box.extent);
    const std::array<std::array<double, 4>, 4> edges{{
        {p.u0, p.v0, p.u0, p.v1},
        {p.u1, p.v0, p.u1, p.v1},
        {p.u0, p.v0, p.u1, p.v0},
        {p.u0, p.v1, p.u1, p.v1},
    }};
    if (extent_contains(box.extent, x)) {
        // on or in the closed box: report the nearest face
        double best = box.r_inner > 0.0 ? rho - box.r_inner : std::numeric_limits<double>::infinity();
        int face = 1;
        if (box.r_outer - rho < best) {
            best = box.r_outer - rho;
            face = 2;
        }
        for (int i = 0; i < 4; ++i) {
            const auto& e = edges[static_cast<std::size_t>(i)];
            const Point n = cross(cube_direction(p.face, e[0], e[1]), cube_direction(p.face, e[2], e[3])).normalized();
            const double h = std::abs(dot(x, n));
            if (h < best) {
                best = h;
                face = 3 + i;
            }
        }
        return {0.0, x, face};
    }
    BoxProximity best{std::numeric_limits<double>::infinity(), x, 0};
    for (int i = 0; i < 4; ++i) {
        const auto& e = edges[static_cast<std::size_t>(i)];
        const Point d0 = cube_direction(p.face, e[0], e[1]);
        const Point d1 = cube_direction(p.face, e[2], e[3]);
        const Point e1 = d0;
        const Point e2 = (d1 - e1 * dot(d1, e1)).normalized();
        const Point n = cross(e1, e2);
        const double w = std::atan2(dot(d1, e2), dot(d1, e1));
        const double h = dot(x, n);
        const Near2 q = sector_nearest(dot(x, e1), dot(x, e2), box.r_inner, box.r_outer, w);
        const double dist = std::hypot(q.distance, h);
        if (dist < best.distance) best = {dist, e1 * q.x + e2 * q.y, 3 + i};
    }
    return best;
}

// ---------------------------------------------------------------------------
// Domains

DomainHandle DomainHandle::unit_ball(int dim)
{
    if (dim != 2 && dim != 3) throw InputError("dimension must be 2 or 3");
    return DomainHandle(dim, UnitBall{});
}

DomainHandle DomainHandle::sawtooth(std::shared_ptr<const ExcisedBall> region)
{
    if (!region) throw InputError("sawtooth domain requires a region");
    const int dim = region->dim;
    return DomainHandle(dim, std::move(region));
}

DomainHandle DomainHandle::ball(const Point& center, double radius)
{
    if (!(radius > 0.0)) throw InputError("ball radius must be positive");
    return DomainHandle(center.dim(), Ball{center, radius});
}

DomainHandle DomainHandle::sector(int dim, const TruncatedSector& s)
{
    if (!(s.r_hi > s.r_lo) || s.r_lo < 0.0 || !(s.half_angle > 0.0))
        throw InputError("malformed truncated sector");
    TruncatedSector t = s;
    t.axis = s.axis.normalized();
    return DomainHandle(dim, t);
}

DomainHandle DomainHandle::intersection(std::vector<DomainHandle> parts)
{
    if (parts.empty()) throw InputError("intersection of no domains");
    const int dim = parts.front().dim();
    return DomainHandle(dim, Intersection{std::make_shared<const std::vector<DomainHandle>>(std::move(parts))});
}

DomainHandle::Kind DomainHandle::kind() const
{
    switch (v_.index()) {
    case 0: return Kind::unit_ball;
    case 1: return Kind::sawtooth;
    case 2: return Kind::ball;
    case 3: return Kind::truncated_sector;
    default: return Kind::intersection;
    }
}

const ExcisedBall* DomainHandle::excised() const
{
    if (const auto* p = std::get_if<std::shared_ptr<const ExcisedBall>>(&v_)) return p->get();
    return nullptr;
}

std::size_t DomainHandle::part_count() const
{
    if (const auto* p = std::get_if<Intersection>(&v_)) return p->parts->size();
    return 1;
}

bool DomainHandle::contains(const Point& x) const
{
    return std::visit(
        [&](const auto& d) -> bool {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, UnitBall>) {
                return x.norm2() < 1.0;
            } else if constexpr (std::is_same_v<T, std::shared_ptr<const ExcisedBall>>) {
                if (x.norm2() >= 1.0) return false;
                for (const PolarBox& b : d->boxes)
                    if (b.contains(x)) return false;
                return true;
            } else if constexpr (std::is_same_v<T, Ball>) {
                return distance(x, d.center) < d.radius;
            } else if constexpr (std::is_same_v<T, TruncatedSector>) {
                const double r = x.norm();
                if (!(r > d.r_lo && r < d.r_hi)) return false;
                const double c = std::clamp(dot(x, d.axis) / r, -1.0, 1.0);
                return std::acos(c) < d.half_angle;
            } else {
                for (const DomainHandle& p : *d.parts)
                    if (!p.contains(x)) return false;
                return true;
            }
        },
        v_);
}

BoundaryHit DomainHandle::nearest_boundary(const Point& x) const
{
    return std::visit(
        [&](const auto& d) -> BoundaryHit {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, UnitBall>) {
                const double r = x.norm();
                return {1.0 - r, x.normalized(), 0, -1, 0};
            } else if constexpr (std::is_same_v<T, std::shared_ptr<const ExcisedBall>>) {
                const double r = x.norm();
                BoundaryHit best{1.0 - r, x.normalized(), 0, -1, 0};
                for (std::size_t i = 0; i < d->boxes.size(); ++i) {
                    const BoxProximity bp = nearest_on_box(d->boxes[i], x);
                    const BoundaryHit cand{bp.distance, bp.point, 0, static_cast<int>(i), bp.face};
                    if (better(cand, best)) best = cand;
                }
                return best;
            } else if constexpr (std::is_same_v<T, Ball>) {
                const Point rel = x - d.center;
                return {d.radius - rel.norm(), d.center + rel.normalized() * d.radius, 0, -1, 0};
            } else if constexpr (std::is_same_v<T, TruncatedSector>) {
                const double r = x.norm();
                const Point dir = x.normalized();
                BoundaryHit best{d.r_hi - r, dir * d.r_hi, 0, -1, 2};
                if (d.r_lo > 0.0) {
                    const BoundaryHit inner{r - d.r_lo, dir * d.r_lo, 0, -1, 1};
                    if (better(inner, best)) best = inner;
                }
                Point perp = x - d.axis * dot(x, d.axis);
                perp = perp.norm() > 0.0 ? perp.normalized() : perpendicular(d.axis);
                const Point ray = d.axis * std::cos(d.half_angle) + perp * std::sin(d.half_angle);
                // distance to the segment {t ray : r_lo <= t <= r_hi}
                const double t = std::clamp(dot(x, ray), d.r_lo, d.r_hi);
                const Point q = ray * t;
                const BoundaryHit lateral{distance(x, q), q, 0, -1, 3};
                if (better(lateral, best)) best = lateral;
                return best;
            } else {
                BoundaryHit best;
                best.distance = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < d.parts->size(); ++i) {
                    BoundaryHit h = (*d.parts)[i].nearest_boundary(x);
                    h.part = static_cast<int>(i);
                    if (better(h, best)) best = h;
                }
                return best;
            }
        },
        v_);
}

double DomainHandle::boundary_distance(const Point& x) const
{
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, UnitBall>) {
                return 1.0 - x.norm();
            } else if constexpr (std::is_same_v<T, std::shared_ptr<const ExcisedBall>>) {
                double best = 1.0 - x.norm();
                for (const PolarBox& b : d->boxes) {
                    // cheap lower bound: radial gap to the box's inner sphere
                    if (b.r_inner - x.norm() >= best) continue;
                    best = std::min(best, nearest_on_box(b, x).distance);
                }
                return best;
            } else if constexpr (std::is_same_v<T, Ball>) {
                return d.radius - distance(x, d.center);
            } else if constexpr (std::is_same_v<T, Intersection>) {
                double best = std::numeric_limits<double>::infinity();
                for (const DomainHandle& p : *d.parts) best = std::min(best, p.boundary_distance(x));
                return best;
            } else {
                return nearest_boundary(x).distance;
            }
        },
        v_);
}

double DomainHandle::boundary_diameter() const
{
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Ball>) {
                return 2.0 * d.radius;
            } else if constexpr (std::is_same_v<T, TruncatedSector>) {
                return 2.0 * d.r_hi;
            } else if constexpr (std::is_same_v<T, Intersection>) {
                double best = std::numeric_limits<double>::infinity();
                for (const DomainHandle& p : *d.parts) best = std::min(best, p.boundary_diameter());
                return best;
            } else {
                return 2.0;
            }
        },
        v_);
}

// ---------------------------------------------------------------------------
// Operations

double dist_to_boundary(const Point& x, const DomainHandle& dom)
{
    if (!dom.contains(x)) throw DomainError("point is not inside the domain");
    return dom.nearest_boundary(x).distance;
}

Point touching_point(const Point& x, const DomainHandle& dom)
{
    if (!dom.contains(x)) throw DomainError("point is not inside the domain");
    return dom.nearest_boundary(x).point;
}

SurfaceBall delta_x_ball(const Point& x, const DomainHandle& dom)
{
    const BoundaryHit hit = [&] {
        if (!dom.contains(x)) throw DomainError("point is not inside the domain");
        return dom.nearest_boundary(x);
    }();
    const double diam = dom.boundary_diameter();
    SurfaceBall sb{hit.point, 10.0 * hit.distance, false};
    if (sb.radius > diam) {
        sb.radius = diam * (1.0 + 1e-9);
        sb.clamped = true;
    }
    return sb;
}

Point corkscrew_point(const SurfaceBall& sb, const DomainHandle& dom, double c)
{
    if (!(c > 0.0 && c < 1.0)) throw PreconditionError("corkscrew constant must lie in (0, 1)");
    if (!(sb.radius > 0.0)) throw PreconditionError("surface ball radius must be positive");
    const double r = sb.radius;

    if (dom.kind() == DomainHandle::Kind::unit_ball && std::abs(sb.center.norm() - 1.0) < 1e-12 && r < 2.0) {
        if (c > 0.5) throw CorkscrewError("no corkscrew point at the requested constant", 0.5);
        return sb.center * (1.0 - 0.5 * r);
    }

    auto score = [&](const Point& a) {
        if (!dom.contains(a)) return -1.0;
        return std::min(dom.boundary_distance(a), r - distance(a, sb.center)) / r;
    };

    const int dim = dom.dim();
    Point best = sb.center;
    double best_score = -1.0;
    auto consider = [&](const Point& a) {
        const double s = score(a);
        if (s > best_score + 1e-15) {
            best_score = s;
            best = a;
        }
    };
    for (int j = 1; j < 16; ++j) {
        const double rho = r * j / 16.0;
        if (dim == 2) {
            for (int i = 0; i < 64; ++i) consider(sb.center + Point::polar(rho, kTwoPi * i / 64.0));
        } else {
            for (int a = 0; a <= 16; ++a) {
                const double pol = kPi * a / 16.0;
                const int naz = (a == 0 || a == 16) ? 1 : 32;
                for (int b = 0; b < naz; ++b) {
                    const double az = kTwoPi * b / naz;
                    consider(sb.center + Point(std::sin(pol) * std::cos(az), std::sin(pol) * std::sin(az), std::cos(pol)) * rho);
                }
            }
        }
    }
    // pattern search polish
    for (double step = r / 32.0; step > r * 1e-4; step *= 0.5) {
        bool moved = true;
        while (moved) {
            moved = false;
            for (int i = 0; i < dim; ++i) {
                for (double sgn : {1.0, -1.0}) {
                    Point cand = best;
                    cand[i] += sgn * step;
                    const double s = score(cand);
                    if (s > best_score + 1e-15) {
                        best_score = s;
                        best = cand;
                        moved = true;
                    }
                }
            }
        }
    }
    if (best_score < c) throw CorkscrewError("no corkscrew point at the requested constant", std::max(best_score, 0.0));
    return best;
}

} // namespace ample
