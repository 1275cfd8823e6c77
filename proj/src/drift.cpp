#include "ample/drift.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

#include <boost/math/quadrature/gauss.hpp>

namespace ample {

struct DriftField::Impl {
    int dim = 2;
    double m_bound = 1.0;
    Family family = Family::zero;
    std::string label;
    double strength = 0.0;
    std::vector<CubeId> targets;
    Evaluator eval;
    std::function<bool(const PolarBox&)> support;
};

namespace {

double depth_of(const Point& y)
{
    return 1.0 - y.norm();
}

Point inward(const Point& x)
{
    return -x.normalized();
}

// Closed overlap of two radial intervals and two angular extents; arcs may
// extend past [0, 2pi).
bool closed_arcs_meet(Arc a, const Arc& b)
{
    for (double shift : {-kTwoPi, 0.0, kTwoPi})
        if (a.lo + shift <= b.hi && b.lo <= a.hi + shift) return true;
    return false;
}

bool closed_extents_meet(const AngularExtent& a, const AngularExtent& b)
{
    if (const auto* x = std::get_if<Arc>(&a)) return closed_arcs_meet(*x, std::get<Arc>(b));
    const auto& p = std::get<CubePatch>(a);
    const auto& q = std::get<CubePatch>(b);
    return p.face == q.face && p.u0 <= q.u1 && q.u0 <= p.u1 && p.v0 <= q.v1 && q.v0 <= p.v1;
}

double sin2(double x)
{
    const double s = std::sin(x);
    return s * s;
}

// Smooth bump of the cone-singular family over the Whitney slab of one target.
double cone_bump(const AngularExtent& e, int k, const Point& y)
{
    const double d = depth_of(y);
    const double d0 = std::ldexp(1.0, -k - 1);
    if (!(d > d0 && d < 2.0 * d0)) return 0.0;
    const double depth = sin2(kPi * (d - d0) / d0);
    if (const auto* a = std::get_if<Arc>(&e)) {
        const double s = wrap_angle(y.angle() - a->lo) / a->width();
        if (s >= 1.0) return 0.0;
        return depth * sin2(kPi * s);
    }
    const auto& p = std::get<CubePatch>(e);
    const FaceCoords fc = cube_face_coords(y);
    if (fc.face != p.face) return 0.0;
    const double su = (fc.u - p.u0) / (p.u1 - p.u0), sv = (fc.v - p.v0) / (p.v1 - p.v0);
    if (su <= 0.0 || su >= 1.0 || sv <= 0.0 || sv >= 1.0) return 0.0;
    return depth * sin2(kPi * su) * sin2(kPi * sv);
}

// Closed polar box containing every ball B(t, delta(t)/2) with t in the slab.
// Returns false when no such box is cheap to describe (the caller then assumes support).
bool influence_box(const Slab& s, PolarBox& out)
{
    const double lo = s.r_lo - 0.5 * (1.0 - s.r_lo);
    const double hi = s.r_hi + 0.5 * (1.0 - s.r_hi);
    if (!(lo > 0.0)) return false;
    const double alpha = std::asin(std::min(1.0, 0.5 * (1.0 - s.r_lo) / lo)) + 1e-12;
    if (const auto* a = std::get_if<Arc>(&s.extent)) {
        out = {Arc{a->lo - alpha, a->hi + alpha}, lo, hi};
        return true;
    }
    // gnomonic coordinates stretch angles by at most 1 + u^2 + v^2 <= 3
    CubePatch p = std::get<CubePatch>(s.extent);
    const double du = 3.0 * std::tan(std::min(alpha, 1.0)) + 1e-12;
    p.u0 -= du;
    p.u1 += du;
    p.v0 -= du;
    p.v1 += du;
    if (p.u0 < -1.0 || p.u1 > 1.0 || p.v0 < -1.0 || p.v1 > 1.0) return false;
    out = {p, lo, hi};
    return true;
}

// False only when the field vanishes on every ball B(t, delta(t)/2), t in the slab.
bool may_influence(const Slab& s, const DriftField& b)
{
    PolarBox infl;
    if (influence_box(s, infl)) return b.may_be_nonzero(infl);
    // fall back to the full shell over the same depth range
    const double lo = std::max(0.0, s.r_lo - 0.5 * (1.0 - s.r_lo));
    const double hi = s.r_hi + 0.5 * (1.0 - s.r_hi);
    if (std::holds_alternative<Arc>(s.extent)) return b.may_be_nonzero({Arc{0.0, kTwoPi}, lo, hi});
    for (int f = 0; f < 6; ++f) {
        CubePatch face;
        face.face = f;
        if (b.may_be_nonzero({face, lo, hi})) return true;
    }
    return false;
}

struct NodeBuckets {
    int dim = 2;
    int cells = 32;
    std::vector<Point> pos;
    std::vector<Point> val;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets;

    int cell_of(double c) const
    {
        return std::clamp(static_cast<int>(std::floor((c + 1.0) * 0.5 * cells)), 0, cells - 1);
    }
    std::int64_t key(int i, int j, int l) const
    {
        return (static_cast<std::int64_t>(i) * cells + j) * cells + l;
    }
    void build()
    {
        for (std::size_t n = 0; n < pos.size(); ++n) {
            const Point& p = pos[n];
            buckets[key(cell_of(p[0]), cell_of(p[1]), dim == 3 ? cell_of(p[2]) : 0)].push_back(n);
        }
    }
    Point nearest(const Point& x) const
    {
        const int ci = cell_of(x[0]), cj = cell_of(x[1]), cl = dim == 3 ? cell_of(x[2]) : 0;
        const double h = 2.0 / cells;
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (int ring = 0; ring <= cells; ++ring) {
            // every node outside the ring's cube is at least (ring) cells away
            if (best < (ring - 1) * h) break;
            const int lmax = dim == 3 ? ring : 0;
            for (int di = -ring; di <= ring; ++di)
                for (int dj = -ring; dj <= ring; ++dj)
                    for (int dl = -lmax; dl <= lmax; ++dl) {
                        if (std::max({std::abs(di), std::abs(dj), std::abs(dl)}) != ring) continue;
                        const auto it = buckets.find(key(ci + di, cj + dj, cl + dl));
                        if (ci + di < 0 || ci + di >= cells || cj + dj < 0 || cj + dj >= cells || cl + dl < 0 ||
                            cl + dl >= cells || it == buckets.end())
                            continue;
                        for (std::size_t n : it->second) {
                            const double d = distance(x, pos[n]);
                            if (d < best || (d == best && n < arg)) {
                                best = d;
                                arg = n;
                            }
                        }
                    }
        }
        return val[arg];
    }
};

DriftField validated(DriftField f)
{
    const PointwiseBoundResult r = pointwise_bound_check(f);
    if (!r.pass) {
        std::ostringstream os;
        os << "drift '" << f.label() << "' violates |B| <= M/delta (ratio " << r.worst_ratio << " at (";
        for (int i = 0; i < f.dim(); ++i) os << (i ? ", " : "") << r.witness[i];
        os << "))";
        throw InputError(os.str());
    }
    return f;
}

void check_dim(int dim)
{
    if (dim != 2 && dim != 3) throw InputError("drift dimension must be 2 or 3");
}

} // namespace

// ---------------------------------------------------------------------------

std::string to_string(DriftField::Family f)
{
    switch (f) {
    case DriftField::Family::zero: return "zero";
    case DriftField::Family::uniform_small: return "uniform-small";
    case DriftField::Family::cone_singular: return "cone-singular";
    case DriftField::Family::grid_sampled: return "grid-sampled";
    default: return "custom";
    }
}

DriftField DriftField::zero(int dim, double m_bound)
{
    check_dim(dim);
    if (!(m_bound > 0.0)) throw InputError("M must be positive");
    auto impl = std::make_shared<Impl>();
    impl->dim = dim;
    impl->m_bound = m_bound;
    impl->family = Family::zero;
    impl->label = "zero";
    impl->eval = [dim](const Point&) { return Point::zero(dim); };
    impl->support = [](const PolarBox&) { return false; };
    return DriftField(impl);
}

DriftField DriftField::uniform_small(int dim, double eps_hat, double m_bound)
{
    check_dim(dim);
    if (!(eps_hat >= 0.0)) throw InputError("uniform-small strength must be nonnegative");
    if (!(m_bound > 0.0)) throw InputError("M must be positive");
    auto impl = std::make_shared<Impl>();
    impl->dim = dim;
    impl->m_bound = m_bound;
    impl->family = Family::uniform_small;
    impl->strength = eps_hat;
    std::ostringstream os;
    os << "uniform-small(" << eps_hat << ")";
    impl->label = os.str();
    impl->eval = [eps_hat](const Point& x) { return inward(x) * (eps_hat / depth_of(x)); };
    const bool nonzero = eps_hat > 0.0;
    impl->support = [nonzero](const PolarBox&) { return nonzero; };
    return validated(DriftField(impl));
}

DriftField DriftField::cone_singular(const DyadicGrid& grid, std::vector<CubeId> targets, double amplitude,
                                     double m_bound)
{
    if (!(m_bound > 0.0)) throw InputError("M must be positive");
    if (!(amplitude >= 0.0)) throw InputError("cone amplitude must be nonnegative");
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    std::vector<std::pair<AngularExtent, int>> slabs;
    for (CubeId id : targets) slabs.emplace_back(grid.extent(id), id.generation);
    auto impl = std::make_shared<Impl>();
    impl->dim = grid.dim();
    impl->m_bound = m_bound;
    impl->family = Family::cone_singular;
    impl->strength = amplitude;
    impl->targets = targets;
    std::ostringstream os;
    os << "cone-singular(A=" << amplitude << ", " << targets.size() << " targets)";
    impl->label = os.str();
    impl->eval = [slabs, amplitude, dim = grid.dim()](const Point& x) {
        double phi = 0.0;
        for (const auto& [e, k] : slabs) phi = std::max(phi, cone_bump(e, k, x));
        if (phi == 0.0) return Point::zero(dim);
        return inward(x) * (amplitude * phi / depth_of(x));
    };
    impl->support = [slabs, amplitude](const PolarBox& region) {
        if (amplitude == 0.0) return false;
        for (const auto& [e, k] : slabs) {
            if (region.r_inner > whitney_r_hi(k) || region.r_outer < whitney_r_lo(k)) continue;
            if (closed_extents_meet(region.extent, e)) return true;
        }
        return false;
    };
    return validated(DriftField(impl));
}

DriftField DriftField::grid_sampled(std::istream& in, int dim, double m_bound)
{
    check_dim(dim);
    if (!(m_bound > 0.0)) throw InputError("M must be positive");
    auto nodes = std::make_shared<NodeBuckets>();
    nodes->dim = dim;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<double> v;
        double d;
        while (ls >> d) v.push_back(d);
        if (v.empty()) continue;
        const std::size_t want = dim == 2 ? 4 : 6;
        if (v.size() != want || !ls.eof())
            throw InputError("grid-sampled drift: malformed record on line " + std::to_string(lineno));
        for (double c : v)
            if (!std::isfinite(c)) throw InputError("grid-sampled drift: non-finite value on line " + std::to_string(lineno));
        if (!(v[0] >= 0.0 && v[0] < 1.0))
            throw InputError("grid-sampled drift: node radius outside [0, 1) on line " + std::to_string(lineno));
        if (dim == 2) {
            nodes->pos.push_back(Point::polar(v[0], v[1]));
            nodes->val.push_back(Point(v[2], v[3]));
        } else {
            const double r = v[0], th = v[1], ph = v[2];
            nodes->pos.push_back(Point(r * std::sin(ph) * std::cos(th), r * std::sin(ph) * std::sin(th), r * std::cos(ph)));
            nodes->val.push_back(Point(v[3], v[4], v[5]));
        }
    }
    if (nodes->pos.empty()) throw InputError("grid-sampled drift: no nodes");
    for (std::size_t n = 0; n < nodes->pos.size(); ++n)
        if (nodes->val[n].norm() * depth_of(nodes->pos[n]) > m_bound)
            throw InputError("grid-sampled drift: node " + std::to_string(n) + " violates |B| <= M/delta");
    nodes->build();
    auto impl = std::make_shared<Impl>();
    impl->dim = dim;
    impl->m_bound = m_bound;
    impl->family = Family::grid_sampled;
    impl->label = "grid-sampled(" + std::to_string(nodes->pos.size()) + " nodes)";
    impl->eval = [nodes](const Point& x) { return nodes->nearest(x); };
    impl->support = [](const PolarBox&) { return true; };
    return validated(DriftField(impl));
}

DriftField DriftField::grid_sampled_file(const std::string& path, int dim, double m_bound)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open drift file '" + path + "'");
    return grid_sampled(in, dim, m_bound);
}

DriftField DriftField::custom(int dim, Evaluator eval, double m_bound, std::string label, bool validate,
                              std::function<bool(const PolarBox&)> may_be_nonzero)
{
    check_dim(dim);
    if (!eval) throw InputError("custom drift needs an evaluator");
    auto impl = std::make_shared<Impl>();
    impl->dim = dim;
    impl->m_bound = m_bound;
    impl->family = Family::custom;
    impl->label = std::move(label);
    impl->eval = std::move(eval);
    impl->support = may_be_nonzero ? std::move(may_be_nonzero) : [](const PolarBox&) { return true; };
    DriftField f(impl);
    return validate ? validated(f) : f;
}

Point DriftField::operator()(const Point& x) const
{
    return impl_->eval(x);
}

int DriftField::dim() const
{
    return impl_->dim;
}

double DriftField::declared_m() const
{
    return impl_->m_bound;
}

DriftField::Family DriftField::family() const
{
    return impl_->family;
}

const std::string& DriftField::label() const
{
    return impl_->label;
}

double DriftField::strength() const
{
    return impl_->strength;
}

const std::vector<CubeId>& DriftField::targets() const
{
    return impl_->targets;
}

bool DriftField::may_be_nonzero(const PolarBox& region) const
{
    return impl_->support(region);
}

DriftField DriftField::scaled(double s) const
{
    auto impl = std::make_shared<Impl>(*impl_);
    impl->family = s == 1.0 ? impl_->family : Family::custom;
    impl->m_bound = std::abs(s) * impl_->m_bound;
    std::ostringstream os;
    os << s << "*" << impl_->label;
    impl->label = os.str();
    auto base = impl_;
    impl->eval = [base, s](const Point& x) { return base->eval(x) * s; };
    if (s == 0.0) impl->support = [](const PolarBox&) { return false; };
    return DriftField(impl);
}

DriftField operator+(const DriftField& a, const DriftField& b)
{
    if (a.dim() != b.dim()) throw InputError("cannot add drifts of different dimensions");
    auto impl = std::make_shared<DriftField::Impl>();
    impl->dim = a.dim();
    impl->m_bound = a.declared_m() + b.declared_m();
    impl->family = DriftField::Family::custom;
    impl->label = a.label() + "+" + b.label();
    impl->eval = [a, b](const Point& x) { return a(x) + b(x); };
    impl->support = [a, b](const PolarBox& r) { return a.may_be_nonzero(r) || b.may_be_nonzero(r); };
    return DriftField(impl);
}

// ---------------------------------------------------------------------------

PointwiseBoundResult pointwise_bound_check(const DriftField& b, int samples, std::uint64_t seed)
{
    PointwiseBoundResult res;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int dim = b.dim();
    const double m = b.declared_m();
    for (int s = 0; s < samples; ++s) {
        Point dir = dim == 2 ? Point(n(rng), n(rng)) : Point(n(rng), n(rng), n(rng));
        dir = dir.normalized();
        double r;
        if (s % 2 == 0) {
            r = std::pow(u(rng), 1.0 / dim);  // uniform in the ball
        } else {
            r = 1.0 - std::pow(10.0, -6.0 * u(rng));  // log-uniform depth in [1e-6, 1]
        }
        r = std::min(r, 1.0 - 1e-12);
        const Point x = dir * r;
        const double ratio = b.magnitude(x) * depth_of(x) / m;
        ++res.samples;
        if (!std::isfinite(ratio)) {
            res.worst_ratio = std::numeric_limits<double>::infinity();
            res.witness = x;
            res.pass = false;
            return res;
        }
        if (ratio > res.worst_ratio) {
            res.worst_ratio = ratio;
            res.witness = x;
        }
    }
    // a small relative slack absorbs rounding in fields built exactly at the ceiling
    res.pass = res.worst_ratio <= 1.0 + 1e-12;
    return res;
}

double sup_local(const Point& t, const DriftField& b, int m_s)
{
    if (m_s < 1) throw PreconditionError("sup_local needs m_s >= 1");
    const double delta = depth_of(t);
    if (!(delta > 0.0)) throw DomainError("sup_local needs an interior point");
    const double rho = 0.5 * delta;
    const Point e = t.normalized();
    auto value = [&](const Point& y) {
        const double m = b.magnitude(y);
        return m * m * depth_of(y);
    };
    double best = value(t);
    if (b.dim() == 2) {
        const double phi0 = e.angle();
        for (int i = 0; i < m_s; ++i) {
            const double phi = phi0 + kTwoPi * i / m_s;
            const Point dir(std::cos(phi), std::sin(phi));
            for (int j = 1; j <= m_s; ++j) best = std::max(best, value(t + dir * (rho * j / m_s)));
        }
        return best;
    }
    // orthonormal frame (e, p1, p2)
    int k = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(e[i]) < std::abs(e[k])) k = i;
    const Point p1 = cross(e, Point::axis(3, k)).normalized();
    const Point p2 = cross(e, p1);
    for (int a = 0; a <= m_s; ++a) {
        const double pol = kPi * a / m_s;
        const int naz = (a == 0 || a == m_s) ? 1 : m_s;
        for (int c = 0; c < naz; ++c) {
            const double az = kTwoPi * c / m_s;
            const Point dir = e * std::cos(pol) + (p1 * std::cos(az) + p2 * std::sin(az)) * std::sin(pol);
            for (int j = 1; j <= m_s; ++j) best = std::max(best, value(t + dir * (rho * j / m_s)));
        }
    }
    return best;
}

double sup_local_adaptive(const Point& t, const DriftField& b)
{
    double prev = sup_local(t, b, 8);
    for (int m = 16; m <= 64; m *= 2) {
        const double cur = sup_local(t, b, m);
        if (std::abs(cur - prev) <= 0.05 * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

namespace {

double midpoint_rule(const Slab& s, const DriftField& b, int m, int m_s)
{
    double total = 0.0;
    if (const auto* a = std::get_if<Arc>(&s.extent)) {
        for (int i = 0; i < m; ++i) {
            const double th0 = a->lo + a->width() * i / m, th1 = a->lo + a->width() * (i + 1) / m;
            for (int j = 0; j < m; ++j) {
                const double r0 = s.r_lo + (s.r_hi - s.r_lo) * j / m, r1 = s.r_lo + (s.r_hi - s.r_lo) * (j + 1) / m;
                const double vol = 0.5 * (th1 - th0) * (r1 * r1 - r0 * r0);
                total += vol * sup_local(Point::polar(0.5 * (r0 + r1), 0.5 * (th0 + th1)), b, m_s);
            }
        }
        return total;
    }
    const auto& p = std::get<CubePatch>(s.extent);
    for (int i = 0; i < m; ++i) {
        const double u0 = p.u0 + (p.u1 - p.u0) * i / m, u1 = p.u0 + (p.u1 - p.u0) * (i + 1) / m;
        for (int l = 0; l < m; ++l) {
            const double v0 = p.v0 + (p.v1 - p.v0) * l / m, v1 = p.v0 + (p.v1 - p.v0) * (l + 1) / m;
            const double omega = extent_measure_exact(CubePatch{p.face, u0, u1, v0, v1});
            const Point dir = cube_direction(p.face, 0.5 * (u0 + u1), 0.5 * (v0 + v1));
            for (int j = 0; j < m; ++j) {
                const double r0 = s.r_lo + (s.r_hi - s.r_lo) * j / m, r1 = s.r_lo + (s.r_hi - s.r_lo) * (j + 1) / m;
                const double vol = omega * (r1 * r1 * r1 - r0 * r0 * r0) / 3.0;
                total += vol * sup_local(dir * (0.5 * (r0 + r1)), b, m_s);
            }
        }
    }
    return total;
}

} // namespace

AsaIntegral asa_integral(const RefinedBox& p, const DriftField& b, int m, int m_s)
{
    if (m < 1) throw PreconditionError("asa_integral needs m >= 1");
    AsaIntegral out;
    out.m = m;
    if (!may_influence(p.region, b)) return out;
    out.coarse = midpoint_rule(p.region, b, m, m_s);
    out.value = midpoint_rule(p.region, b, 2 * m, m_s);
    out.error_bound = std::abs(out.value - out.coarse) / 3.0;
    if (!std::isfinite(out.value) || !std::isfinite(out.error_bound))
        throw QuadratureError("non-finite ASA integral on a refined box of generation " +
                              std::to_string(p.parent.generation));
    return out;
}

AsaVerdict asa_test(const RefinedBox& p, const DriftField& b, double eps, int m_s)
{
    if (!(eps > 0.0)) throw PreconditionError("ASA test needs eps > 0");
    AsaVerdict v;
    v.box = p;
    const int n = p.region.dim() - 1;
    v.threshold = eps * std::pow(p.side_length, n);
    AsaIntegral q = asa_integral(p, b, 8, m_s);
    auto ambiguous = [&](const AsaIntegral& a) { return std::abs(a.value - v.threshold) <= a.error_bound; };
    while (q.m < 32 && ambiguous(q) && q.error_bound > 0.1 * v.threshold) q = asa_integral(p, b, 2 * q.m, m_s);
    v.integral = q.value;
    v.error_bound = q.error_bound;
    v.m = q.m;
    v.inconclusive = ambiguous(q) && q.error_bound > 0.0;
    v.refinement_requested = q.error_bound > 0.1 * v.threshold;
    v.good = q.value + q.error_bound < v.threshold * (1.0 - 1e-12);
    return v;
}

double pointwise_smallness(const RefinedBox& p, const DriftField& b, int samples_per_axis)
{
    const Slab& s = p.region;
    const int m = samples_per_axis;
    double best = 0.0;
    for (int j = 0; j < m; ++j) {
        const double r = s.r_lo + (s.r_hi - s.r_lo) * (j + 0.5) / m;
        if (const auto* a = std::get_if<Arc>(&s.extent)) {
            for (int i = 0; i < m; ++i) best = std::max(best, b.magnitude(Point::polar(r, a->lo + a->width() * (i + 0.5) / m)));
        } else {
            const auto& c = std::get<CubePatch>(s.extent);
            for (int i = 0; i < m; ++i)
                for (int l = 0; l < m; ++l)
                    best = std::max(best, b.magnitude(cube_direction(c.face, c.u0 + (c.u1 - c.u0) * (i + 0.5) / m,
                                                                     c.v0 + (c.v1 - c.v0) * (l + 0.5) / m) * r));
        }
    }
    return best * p.side_length;
}

// ---------------------------------------------------------------------------

double surface_ball_measure(int dim, double r)
{
    if (dim == 2) return 4.0 * std::asin(std::min(1.0, 0.5 * r));
    return kPi * std::min(r, 2.0) * std::min(r, 2.0);
}

double carleson_average(const DriftField& b, const Point& x, double r, const CarlesonLattice& lat)
{
    if (b.dim() != 2) throw UnsupportedError("the Carleson norm is implemented for the disk only");
    const double alpha = x.angle();
    const double top = std::min(r, 1.0);
    if (!(lat.depth_cutoff < top)) return 0.0;
    const auto& dn = lat.depth_nodes;
    const auto gl_nodes = [](int n, std::vector<double>& xs, std::vector<double>& ws) {
        // Gauss-Legendre nodes on [-1, 1] via Boost's fixed-order rules
        xs.clear();
        ws.clear();
        auto push = [&](const auto& absc, const auto& wts, bool odd) {
            for (std::size_t i = 0; i < absc.size(); ++i) {
                if (i == 0 && odd) {
                    xs.push_back(0.0);
                    ws.push_back(wts[0]);
                    continue;
                }
                xs.push_back(absc[i]);
                ws.push_back(wts[i]);
                xs.push_back(-absc[i]);
                ws.push_back(wts[i]);
            }
        };
        using boost::math::quadrature::gauss;
        switch (n) {
        case 4: push(gauss<double, 4>::abscissa(), gauss<double, 4>::weights(), false); break;
        case 8: push(gauss<double, 8>::abscissa(), gauss<double, 8>::weights(), false); break;
        case 16: push(gauss<double, 16>::abscissa(), gauss<double, 16>::weights(), false); break;
        default: throw InputError("Carleson lattice node counts must be 4, 8 or 16");
        }
    };
    std::vector<double> dx, dw, ax, aw;
    gl_nodes(dn, dx, dw);
    gl_nodes(lat.angle_nodes, ax, aw);

    double total = 0.0;
    // dyadic depth bands [2^-j-1, 2^-j] clipped to [cutoff, top]
    for (int j = 0; j < 64; ++j) {
        double hi = std::ldexp(1.0, -j), lo = std::ldexp(1.0, -j - 1);
        if (lo >= top) continue;
        hi = std::min(hi, top);
        lo = std::max(lo, lat.depth_cutoff);
        if (hi <= lat.depth_cutoff) break;
        if (lo >= hi) continue;
        for (std::size_t a = 0; a < dx.size(); ++a) {
            const double d = 0.5 * (lo + hi) + 0.5 * (hi - lo) * dx[a];
            const double rho = 1.0 - d;
            const double c = std::clamp((1.0 + rho * rho - r * r) / (2.0 * rho), -1.0, 1.0);
            const double half = std::acos(c);
            if (half <= 0.0) continue;
            double inner = 0.0;
            for (int pnl = 0; pnl < lat.angle_panels; ++pnl) {
                const double p0 = -half + 2.0 * half * pnl / lat.angle_panels;
                const double p1 = -half + 2.0 * half * (pnl + 1) / lat.angle_panels;
                for (std::size_t q = 0; q < ax.size(); ++q) {
                    const double phi = 0.5 * (p0 + p1) + 0.5 * (p1 - p0) * ax[q];
                    inner += 0.5 * (p1 - p0) * aw[q] * sup_local(Point::polar(rho, alpha + phi), b, lat.m_s);
                }
            }
            total += 0.5 * (hi - lo) * dw[a] * rho * inner;
        }
    }
    return total / surface_ball_measure(2, r);
}

CarlesonNormResult carleson_norm(const DriftField& b, const CarlesonLattice& lat)
{
    if (b.dim() != 2) throw UnsupportedError("the Carleson norm is implemented for the disk only");
    CarlesonNormResult res;
    res.lattice = lat;
    for (int k = lat.k_min; k <= lat.k_max; ++k) {
        const double r = std::ldexp(1.0, -k);
        double scale_max = 0.0;
        for (int i = 0; i < lat.n_centers; ++i) {
            const Point x = Point::polar(1.0, kTwoPi * i / lat.n_centers);
            const double v = carleson_average(b, x, r, lat);
            scale_max = std::max(scale_max, v);
            if (v > res.value) {
                res.value = v;
                res.argmax_center = x;
                res.argmax_radius = r;
            }
        }
        res.per_scale.push_back(scale_max);
    }
    return res;
}

double calibrate_cone_amplitude(const DyadicGrid& grid, const std::vector<CubeId>& targets, double m_bound,
                                const CarlesonLattice& lattice)
{
    const DriftField unit = DriftField::cone_singular(grid, targets, std::min(1.0, m_bound), m_bound);
    const double n = carleson_norm(unit, lattice).value;
    if (!(n > 0.0)) throw PreconditionError("cone targets are invisible to the Carleson lattice");
    const double a = std::min(1.0, m_bound) / std::sqrt(n);
    if (a > m_bound) throw PreconditionError("calibrated amplitude exceeds the pointwise bound M");
    return a;
}

} // namespace ample
