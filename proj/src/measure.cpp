#include "ample/measure.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <complex>
#include <iomanip>
#include <ostream>

#include "ample/parallel.hpp"

namespace ample {

namespace {

std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::size_t kBatch = 1 << 15;

} // namespace

void validate(const WalkerConfig& cfg)
{
    if (!(cfg.step_factor > 0.0 && cfg.step_factor <= 0.5)) throw InputError("step factor must lie in (0, 0.5]");
    if (!(cfg.absorb_depth > 0.0)) throw InputError("absorption depth must be positive");
    if (cfg.max_steps < 1) throw InputError("max_steps must be positive");
}

std::mt19937_64 walker_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
    s = splitmix64(s ^ index);
    return std::mt19937_64(s);
}

ExitResult simulate_exit(const Point& x, const DomainHandle& dom, const DriftField& b, const WalkerConfig& cfg,
                         std::mt19937_64& rng)
{
    const int dim = dom.dim();
    const double rho2 = cfg.step_factor * cfg.step_factor;
    const double m = std::max(1.0, b.declared_m());
    std::normal_distribution<double> gauss(0.0, 1.0);
    ExitResult out;
    Point cur = x;
    if (dom.boundary_distance(cur) >= cfg.absorb_depth && !dom.contains(cur))
        throw PreconditionError("walker start lies outside the domain");
    for (;;) {
        const double d = dom.boundary_distance(cur);
        if (d < cfg.absorb_depth) {
            out.hit = dom.nearest_boundary(cur);
            return out;
        }
        if (out.steps >= cfg.max_steps) {
            out.escaped = true;
            out.hit.point = cur;
            return out;
        }
        const double dt = rho2 * d * d / m;
        const double sd = std::sqrt(2.0 * dt);
        Point next = cur - b(cur) * dt;
        for (int i = 0; i < dim; ++i) next[i] += sd * gauss(rng);
        ++out.steps;
        if (!dom.contains(next)) {
            // bisect the step for the last inside point, then project
            double lo = 0.0, hi = 1.0;
            const double len = distance(cur, next);
            while ((hi - lo) * len > 0.25 * cfg.absorb_depth) {
                const double mid = 0.5 * (lo + hi);
                if (dom.contains(cur + (next - cur) * mid))
                    lo = mid;
                else
                    hi = mid;
            }
            out.hit = dom.nearest_boundary(cur + (next - cur) * lo);
            return out;
        }
        cur = next;
    }
}

// ---------------------------------------------------------------------------

BoundaryPartition::BoundaryPartition(const DyadicGrid& grid, int k_est, const DomainHandle& dom)
    : grid_(grid), k_est_(k_est)
{
    if (k_est < 1 || k_est > grid.k_max()) throw InputError("k_est must lie in [1, k_max]");
    if (grid.dim() != dom.dim()) throw InputError("grid and domain dimensions differ");
    parts_ = dom.part_count();
    sphere_cells_ = static_cast<std::size_t>(grid.count(k_est));
    faces_per_box_ = grid.dim() == 2 ? 4 : 6;
    const std::size_t boxes = dom.excised() ? dom.excised()->boxes.size() : 0;
    for (std::size_t p = 0; p < parts_; ++p)
        for (std::size_t c = 0; c < sphere_cells_; ++c)
            ids_.push_back((parts_ > 1 ? "P" + std::to_string(p) + ":" : std::string()) + "S" + std::to_string(k_est) +
                           ":" + std::to_string(c));
    for (std::size_t bx = 0; bx < boxes; ++bx)
        for (std::size_t f = 1; f <= faces_per_box_; ++f) ids_.push_back("B" + std::to_string(bx) + ":F" + std::to_string(f));
}

std::size_t BoundaryPartition::sphere_cell(const Point& y) const
{
    return static_cast<std::size_t>(grid_.locate(y, k_est_).index);
}

std::size_t BoundaryPartition::face_cell(int box, int face) const
{
    const std::size_t c = parts_ * sphere_cells_ + static_cast<std::size_t>(box) * faces_per_box_ +
                          static_cast<std::size_t>(face - 1);
    if (box < 0 || face < 1 || c >= ids_.size()) throw PreconditionError("no such face cell");
    return c;
}

std::size_t BoundaryPartition::classify(const BoundaryHit& hit) const
{
    if (hit.box >= 0 && parts_ == 1) return face_cell(hit.box, hit.face);
    return static_cast<std::size_t>(hit.part) * sphere_cells_ + sphere_cell(hit.point);
}

MeasureEstimate::Mass MeasureEstimate::mass_of_cells(const std::function<bool(std::size_t)>& cell_pred) const
{
    std::int64_t n = 0;
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (cell_pred(c)) n += counts[c];
    Mass out;
    if (completed == 0) return out;
    out.value = static_cast<double>(n) / static_cast<double>(completed);
    out.stderr_ = std::sqrt(out.value * (1.0 - out.value) / static_cast<double>(completed));
    return out;
}

MeasureEstimate::Mass MeasureEstimate::mass_of_exits(const std::function<bool(const ExitRecord&)>& pred) const
{
    if (completed > 0 && exits.empty()) throw PreconditionError("exit points were not recorded");
    std::int64_t n = 0;
    for (const ExitRecord& e : exits)
        if (pred(e)) ++n;
    Mass out;
    if (completed == 0) return out;
    out.value = static_cast<double>(n) / static_cast<double>(completed);
    out.stderr_ = std::sqrt(out.value * (1.0 - out.value) / static_cast<double>(completed));
    return out;
}

MeasureEstimate estimate_measure(const Point& x, const DomainHandle& dom, const DriftField& b,
                                 std::shared_ptr<const BoundaryPartition> partition, std::int64_t n_walkers,
                                 const WalkerConfig& cfg, bool record_exits, std::uint64_t stream)
{
    validate(cfg);
    if (!partition) throw PreconditionError("estimate_measure needs a partition");
    if (n_walkers < 1) throw InputError("need at least one walker");
    if (!dom.contains(x)) throw PreconditionError("pole lies outside the domain");
    MeasureEstimate est;
    est.pole = x;
    est.partition = partition;
    est.counts.assign(partition->size(), 0);
    est.walkers = n_walkers;
    std::vector<ExitResult> batch;
    for (std::int64_t start = 0; start < n_walkers; start += static_cast<std::int64_t>(kBatch)) {
        const std::size_t n = static_cast<std::size_t>(std::min<std::int64_t>(kBatch, n_walkers - start));
        batch.assign(n, {});
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            auto rng = walker_rng(cfg.seed, stream, static_cast<std::uint64_t>(start) + i);
            batch[i] = simulate_exit(x, dom, b, cfg, rng);
        });
        for (const ExitResult& r : batch) {
            est.total_steps += r.steps;
            if (r.escaped) {
                ++est.escaped;
                continue;
            }
            ++est.completed;
            const std::size_t cell = partition->classify(r.hit);
            ++est.counts[cell];
            if (record_exits) est.exits.push_back({r.hit.point, cell, r.hit.box, r.hit.face});
        }
    }
    est.mass.resize(est.counts.size());
    est.stderr_.resize(est.counts.size());
    for (std::size_t c = 0; c < est.counts.size(); ++c) {
        const double m = est.completed ? static_cast<double>(est.counts[c]) / static_cast<double>(est.completed) : 0.0;
        est.mass[c] = m;
        est.stderr_[c] = est.completed ? std::sqrt(m * (1.0 - m) / static_cast<double>(est.completed)) : 0.0;
    }
    if (est.escaped * 100 > est.walkers)
        est.warning = std::to_string(est.escaped) + " of " + std::to_string(est.walkers) +
                      " walkers hit max_steps; estimates are unreliable";
    return est;
}

void write_measure(std::ostream& os, const MeasureEstimate& est)
{
    os << std::setprecision(12);
    os << "# measure pole";
    for (double c : est.pole.coords()) os << ' ' << c;
    os << " walkers " << est.walkers << " completed " << est.completed << " escaped " << est.escaped << '\n';
    if (!est.warning.empty()) os << "# warning " << est.warning << '\n';
    os << "cell\tmass\tstderr\n";
    for (std::size_t c = 0; c < est.mass.size(); ++c)
        os << est.partition->id(c) << '\t' << est.mass[c] << '\t' << est.stderr_[c] << '\n';
}

// ---------------------------------------------------------------------------

double poisson_kernel(const Point& x, double theta)
{
    const Point e = Point::polar(1.0, theta);
    return (1.0 - x.norm2()) / (kTwoPi * (x - e).norm2());
}

double poisson_measure(const Point& x, const Arc& arc)
{
    if (x.dim() != 2) throw UnsupportedError("the Poisson oracle is for the unit disk");
    if (!(x.norm() < 1.0)) throw DomainError("pole must lie inside the unit disk");
    if (!(arc.hi >= arc.lo) || arc.hi - arc.lo > kTwoPi + 1e-15) throw InputError("arc must satisfy lo <= hi <= lo + 2pi");
    const std::complex<double> z(x[0], x[1]);
    // the subtended angle formula needs pieces shorter than pi
    const int pieces = std::max(1, static_cast<int>(std::ceil((arc.hi - arc.lo) / (0.5 * kPi))));
    const double w = (arc.hi - arc.lo) / pieces;
    double sum = 0.0;
    for (int i = 0; i < pieces; ++i) {
        const double a = arc.lo + w * i, b = (i + 1 == pieces) ? arc.hi : arc.lo + w * (i + 1);
        const std::complex<double> ratio = (std::polar(1.0, b) - z) / (std::polar(1.0, a) - z);
        // the angle subtended at z exceeds pi when z lies between the chord and the arc
        double angle = std::arg(ratio);
        if (angle < 0.0) angle += kTwoPi;
        sum += angle / kPi - (b - a) / kTwoPi;
    }
    return sum;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> radial_nodes(const FdConfig& cfg)
{
    if (!(cfg.h_max > 0.0 && cfg.h_max < 0.5 && cfg.grading > 0.0 && cfg.h_min > 0.0 && cfg.h_min < cfg.h_max))
        throw InputError("bad finite-difference mesh parameters");
    std::vector<double> depth;
    for (double d = cfg.h_min; 1.0 - d > 0.5 * cfg.h_max; d += std::min(cfg.h_max, cfg.grading * d)) depth.push_back(d);
    std::vector<double> r;
    for (auto it = depth.rbegin(); it != depth.rend(); ++it) r.push_back(1.0 - *it);
    return r;
}

} // namespace

double SolutionGrid::evaluate(const Point& x) const
{
    const double r = x.norm();
    if (r > 1.0 + 1e-12) throw DomainError("evaluation point outside the disk");
    const std::size_t nt = thetas.size();
    const double dth = kTwoPi / static_cast<double>(nt);
    const double th = x.angle() / dth;
    const std::size_t j0 = static_cast<std::size_t>(std::floor(th)) % nt, j1 = (j0 + 1) % nt;
    const double s = th - std::floor(th);
    auto ring = [&](std::size_t i) { return (1.0 - s) * at(i, j0) + s * at(i, j1); };
    if (r <= radii.front()) {
        double center = 0.0;
        for (std::size_t j = 0; j < nt; ++j) center += at(0, j);
        center /= static_cast<double>(nt);
        const double t = r / radii.front();
        return (1.0 - t) * center + t * ring(0);
    }
    if (r >= radii.back()) {
        const double t = (r - radii.back()) / (1.0 - radii.back());
        return (1.0 - t) * ring(radii.size() - 1) + t * ((1.0 - s) * boundary[j0] + s * boundary[j1]);
    }
    const std::size_t i1 = static_cast<std::size_t>(std::upper_bound(radii.begin(), radii.end(), r) - radii.begin());
    const std::size_t i0 = i1 - 1;
    const double t = (r - radii[i0]) / (radii[i1] - radii[i0]);
    return (1.0 - t) * ring(i0) + t * ring(i1);
}

SolutionGrid fd_solve(const DriftField& b, const std::function<double(double)>& f, const FdConfig& cfg)
{
    if (b.dim() != 2) throw UnsupportedError("fd_solve is two-dimensional");
    if (cfg.n_theta < 8 || cfg.n_theta % 2) throw InputError("n_theta must be even and at least 8");
    SolutionGrid g;
    g.radii = radial_nodes(cfg);
    const std::size_t nr = g.radii.size(), nt = static_cast<std::size_t>(cfg.n_theta);
    const double dth = kTwoPi / static_cast<double>(nt);
    for (std::size_t j = 0; j < nt; ++j) {
        g.thetas.push_back(dth * static_cast<double>(j));
        g.boundary.push_back(f(g.thetas.back()));
    }
    g.drift.resize(nr * nt);
    g.h = dth;
    for (std::size_t i = 0; i < nr; ++i) {
        const double below = i == 0 ? g.radii[0] : g.radii[i] - g.radii[i - 1];
        g.h = std::max(g.h, below);
    }

    const auto idx = [nt](std::size_t i, std::size_t j) { return static_cast<int>(i * nt + j); };
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(nr * nt * 5);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nr * nt));

    for (std::size_t i = 0; i < nr; ++i) {
        const double r = g.radii[i];
        const double r_plus = i + 1 < nr ? g.radii[i + 1] : 1.0;
        const double f_plus = 0.5 * (r + r_plus);
        const double f_minus = i == 0 ? 0.0 : 0.5 * (g.radii[i - 1] + r);
        const double H = f_plus - f_minus;
        const double a_plus = f_plus / (r * (r_plus - r) * H);
        const double a_minus = i == 0 ? 0.0 : f_minus / (r * (r - g.radii[i - 1]) * H);
        const double a_theta = 1.0 / (r * r * dth * dth);
        for (std::size_t j = 0; j < nt; ++j) {
            const double th = g.thetas[j];
            const Point bx = b(Point::polar(r, th));
            g.drift[i * nt + j] = bx;
            // generator Laplacian + v.grad with v = -B
            const double vr = -(bx[0] * std::cos(th) + bx[1] * std::sin(th));
            const double vt = -(-bx[0] * std::sin(th) + bx[1] * std::cos(th));

            // radial neighbours: the inner one is across the origin for the first ring
            const std::size_t jm = (j + nt / 2) % nt;
            const int minus_node = i == 0 ? idx(0, jm) : idx(i - 1, j);
            const double r_minus = i == 0 ? -r : g.radii[i - 1];
            double w_plus = a_plus, w_minus = a_minus;
            const double span = r_plus - r_minus;
            const double c = vr / span;
            g.max_peclet = std::max(g.max_peclet, std::abs(vr) * 0.5 * span);
            if (w_plus + c >= 0.0 && w_minus - c >= 0.0) {
                w_plus += c;
                w_minus -= c;
            } else {
                ++g.upwinded;
                if (vr > 0.0)
                    w_plus += vr / (r_plus - r);
                else
                    w_minus += -vr / (r - r_minus);
            }

            double w_up = a_theta, w_down = a_theta;
            const double ct = vt / (r * 2.0 * dth);
            g.max_peclet = std::max(g.max_peclet, std::abs(vt) * r * dth);
            if (std::abs(ct) <= a_theta) {
                w_up += ct;
                w_down -= ct;
            } else {
                ++g.upwinded;
                if (vt > 0.0)
                    w_up += vt / (r * dth);
                else
                    w_down += -vt / (r * dth);
            }

            if (w_plus < 0.0 || w_minus < 0.0 || w_up < 0.0 || w_down < 0.0)
                throw PreconditionError("finite-difference scheme is not an M-matrix at r = " + std::to_string(r) +
                                        "; refine the mesh for this drift");
            const int row = idx(i, j);
            trip.emplace_back(row, row, w_plus + w_minus + w_up + w_down);
            if (i + 1 < nr)
                trip.emplace_back(row, idx(i + 1, j), -w_plus);
            else
                rhs[row] += w_plus * g.boundary[j];
            if (w_minus != 0.0) trip.emplace_back(row, minus_node, -w_minus);
            trip.emplace_back(row, idx(i, (j + 1) % nt), -w_up);
            trip.emplace_back(row, idx(i, (j + nt - 1) % nt), -w_down);
        }
    }

    Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(nr * nt), static_cast<Eigen::Index>(nr * nt));
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw Error("sparse LU factorization failed: " + lu.lastErrorMessage());
    const Eigen::VectorXd u = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw Error("sparse LU solve failed");
    g.values.assign(u.data(), u.data() + u.size());

    const auto [fmin, fmax] = std::minmax_element(g.boundary.begin(), g.boundary.end());
    const double tol = 1e-9 * std::max(1.0, std::abs(*fmax - *fmin));
    for (double v : g.values)
        if (!(v >= *fmin - tol && v <= *fmax + tol))
            throw Error("discrete maximum principle violated: value " + std::to_string(v));
    return g;
}

std::function<double(double)> smoothed_arc_indicator(const Arc& arc, int n_theta)
{
    const double dth = kTwoPi / n_theta;
    return [arc, dth](double th) {
        double covered = 0.0;
        for (double shift : {-kTwoPi, 0.0, kTwoPi}) {
            const double lo = std::max(arc.lo + shift, th - 0.5 * dth);
            const double hi = std::min(arc.hi + shift, th + 0.5 * dth);
            covered += std::max(0.0, hi - lo);
        }
        return std::min(1.0, covered / dth);
    };
}

void write_solution_grid(std::ostream& os, const SolutionGrid& g)
{
    os << std::setprecision(12);
    os << "# fd grid rings " << g.radii.size() << " angles " << g.n_theta() << " h " << g.h << " upwinded "
       << g.upwinded << '\n';
    os << "r\ttheta\tu\tbx\tby\n";
    for (std::size_t i = 0; i < g.radii.size(); ++i)
        for (std::size_t j = 0; j < g.n_theta(); ++j) {
            const Point& d = g.drift[i * g.n_theta() + j];
            os << g.radii[i] << '\t' << g.thetas[j] << '\t' << g.at(i, j) << '\t' << d[0] << '\t' << d[1] << '\n';
        }
    for (std::size_t j = 0; j < g.n_theta(); ++j)
        os << 1.0 << '\t' << g.thetas[j] << '\t' << g.boundary[j] << "\t0\t0\n";
}

// ---------------------------------------------------------------------------

MarkovReport markov_identity_check(const Point& x, const DomainHandle& d, const DomainHandle& d_small,
                                   const std::function<bool(const BoundaryHit&)>& in_f, const DriftField& b,
                                   const BoundaryPartition& small_cells, const MarkovBudget& budget,
                                   const WalkerConfig& cfg)
{
    validate(cfg);
    if (!d.contains(x) || !d_small.contains(x)) throw PreconditionError("pole must lie in both domains");
    if (budget.direct_walkers < 1 || budget.outer_walkers < 1 || budget.inner_walkers < 1)
        throw InputError("Markov check needs positive walker budgets");
    MarkovReport rep;

    auto run = [&](const DomainHandle& dom, std::uint64_t stream, std::int64_t n,
                   const std::function<Point(std::int64_t)>& start) {
        std::vector<ExitResult> out(static_cast<std::size_t>(n));
        parallel_for(out.size(), cfg.threads, [&](std::size_t i) {
            auto rng = walker_rng(cfg.seed, stream, i);
            out[i] = simulate_exit(start(static_cast<std::int64_t>(i)), dom, b, cfg, rng);
        });
        return out;
    };

    // direct estimate of omega^x_D(F)
    std::int64_t hits = 0, done = 0;
    for (const ExitResult& r : run(d, 101, budget.direct_walkers, [&](std::int64_t) { return x; })) {
        if (r.escaped) {
            ++rep.escaped;
            continue;
        }
        ++done;
        if (in_f(r.hit)) ++hits;
    }
    rep.lhs = done ? static_cast<double>(hits) / static_cast<double>(done) : 0.0;
    rep.lhs_stderr = done ? std::sqrt(rep.lhs * (1.0 - rep.lhs) / static_cast<double>(done)) : 0.0;

    // stopping law on the boundary of the smaller domain, binned into cells
    std::vector<std::vector<Point>> stops(small_cells.size());
    std::int64_t outer_done = 0;
    for (const ExitResult& r : run(d_small, 102, budget.outer_walkers, [&](std::int64_t) { return x; })) {
        if (r.escaped) {
            ++rep.escaped;
            continue;
        }
        ++outer_done;
        stops[small_cells.classify(r.hit)].push_back(r.hit.point);
    }

    // inner estimates per cell, restarted round-robin from that cell's stopping points
    double rhs = 0.0, inner_var = 0.0;
    for (std::size_t c = 0; c < stops.size(); ++c) {
        if (stops[c].empty()) continue;
        ++rep.cells_used;
        const auto& pts = stops[c];
        std::int64_t h = 0, n = 0;
        const auto res = run(d, 1000 + c, budget.inner_walkers,
                             [&](std::int64_t k) { return pts[static_cast<std::size_t>(k) % pts.size()]; });
        for (const ExitResult& r : res) {
            if (r.escaped) {
                ++rep.escaped;
                continue;
            }
            ++n;
            if (in_f(r.hit)) ++h;
        }
        if (n == 0) continue;
        const double hc = static_cast<double>(h) / static_cast<double>(n);
        const double wc = static_cast<double>(pts.size()) / static_cast<double>(outer_done);
        rhs += wc * hc;
        inner_var += wc * wc * hc * (1.0 - hc) / static_cast<double>(n);
    }
    rep.rhs = rhs;
    // Var(omega^y(F)) over the stopping law is at most rhs (1 - rhs) since omega lies in [0, 1]
    rep.rhs_stderr = outer_done ? std::sqrt(rhs * (1.0 - rhs) / static_cast<double>(outer_done) + inner_var) : 0.0;
    rep.residual = std::abs(rep.lhs - rep.rhs);
    rep.combined_stderr = std::hypot(rep.lhs_stderr, rep.rhs_stderr);
    rep.partial = budget.target_stderr > 0.0 && rep.combined_stderr > budget.target_stderr;
    return rep;
}

MarkovReport markov_identity_check(const Point& x, int p, const std::function<bool(const BoundaryHit&)>& in_f,
                                   const SawtoothDomain& dom, const DriftField& b, int k_est,
                                   const MarkovBudget& budget, const WalkerConfig& cfg)
{
    if (p < 2 || p > dom.generations())
        throw PreconditionError("the Markov check needs 2 <= p <= N_stop (Lambda_{p-1} inside Omega_p)");
    const DomainHandle big = dom.handle({LevelKind::omega, p});
    const DomainHandle small = dom.handle({LevelKind::lambda, p - 1});
    const BoundaryPartition cells(dom.grid(), k_est, small);
    return markov_identity_check(x, big, small, in_f, b, cells, budget, cfg);
}

} // namespace ample
