#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "ample/checks.hpp"

namespace ample::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kAllChecks{"bourgain", "claim1", "holder", "criterion", "bmo", "ainfty"};

ordered_json config_json(const RunConfig& c)
{
    ordered_json j;
    j["dim"] = c.dim;
    j["kmax"] = c.k_max;
    j["drift"] = c.drift;
    j["eps"] = c.eps;
    j["eta"] = c.eta;
    j["m_bound"] = c.m_bound;
    j["walkers"] = c.walkers;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["out"] = c.out;
    j["sawtooth"] = c.sawtooth;
    j["pole"] = c.pole;
    j["checks"] = c.checks;
    j["step_factor"] = c.step_factor;
    j["absorb_depth"] = c.absorb_depth;
    j["k_est"] = c.k_est;
    j["a0"] = c.a0;
    j["a"] = c.a;
    return j;
}

// The configuration embedded in outputs; thread count and output root do not affect results.
std::string provenance(const RunConfig& c)
{
    ordered_json j = config_json(c);
    j.erase("threads");
    j.erase("out");
    return "# config " + j.dump() + '\n';
}

std::vector<CubeId> parse_targets(const std::string& s)
{
    std::vector<CubeId> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw InputError("cone target must be K:I, got '" + item + "'");
        try {
            out.push_back({std::stoi(item.substr(0, colon)), std::stoll(item.substr(colon + 1))});
        }
        catch (const std::logic_error&) {
            throw InputError("cone target must be K:I, got '" + item + "'");
        }
    }
    if (out.empty()) throw InputError("cone drift needs at least one target");
    return out;
}

double parse_number(const std::string& s, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    }
    catch (const std::logic_error&) {
        throw InputError("bad " + what + " '" + s + "'");
    }
}

DriftField make_drift(const RunConfig& c)
{
    const std::string& d = c.drift;
    if (d == "zero") return DriftField::zero(c.dim, c.m_bound);
    if (d.rfind("uniform:", 0) == 0) return DriftField::uniform_small(c.dim, parse_number(d.substr(8), "eps_hat"), c.m_bound);
    if (d.rfind("grid:", 0) == 0) return DriftField::grid_sampled_file(d.substr(5), c.dim, c.m_bound);
    if (d.rfind("cone:", 0) == 0) {
        std::string spec = d.substr(5);
        std::string amp;
        if (const auto at = spec.find('@'); at != std::string::npos) {
            amp = spec.substr(at + 1);
            spec = spec.substr(0, at);
        }
        const DyadicGrid grid = build_grid(c.dim, c.k_max);
        const auto targets = parse_targets(spec);
        for (const CubeId& t : targets)
            if (!grid.valid(t)) throw InputError("cone target outside the grid");
        double a = 0.0;
        if (amp.empty() || amp == "calibrated") {
            if (c.dim != 2) throw InputError("calibrated cone amplitudes are two-dimensional; give @A");
            a = calibrate_cone_amplitude(grid, targets, c.m_bound);
        }
        else {
            a = parse_number(amp, "cone amplitude");
        }
        return DriftField::cone_singular(grid, targets, a, c.m_bound);
    }
    throw InputError("unknown drift '" + d + "'");
}

WalkerConfig walker_config(const RunConfig& c)
{
    WalkerConfig w;
    w.step_factor = c.step_factor;
    w.absorb_depth = c.absorb_depth;
    w.seed = c.seed;
    w.threads = c.threads;
    return w;
}

OperatorSpec operator_spec(const RunConfig& c)
{
    OperatorSpec s;
    s.dim = c.dim;
    s.m_bound = c.m_bound;
    s.eps = c.eps;
    s.eta = c.eta;
    s.k_max = c.k_max;
    s.a0 = c.a0;
    s.a = c.a;
    return s;
}

Point make_point(const std::vector<double>& v)
{
    return v.size() == 2 ? Point(v[0], v[1]) : Point(v[0], v[1], v[2]);
}

fs::path output_dir(const RunConfig& c)
{
    std::string root = c.out;
    if (root.empty())
        if (const char* env = std::getenv("AMPLE_OUT")) root = env;
    if (root.empty()) root = "ample_out";
    fs::create_directories(root);
    return root;
}

std::ofstream open_out(const fs::path& p)
{
    std::ofstream os(p);
    if (!os) throw InputError("cannot write " + p.string());
    return os;
}

void write_config_file(const fs::path& dir, const RunConfig& c)
{
    auto os = open_out(dir / "config.json");
    os << config_json(c).dump(2) << '\n';
}

// ---------------------------------------------------------------------------

int cmd_decompose(const RunConfig& c, std::ostream& out)
{
    const DyadicGrid grid = build_grid(c.dim, c.k_max);
    const fs::path dir = output_dir(c);
    write_config_file(dir, c);
    std::int64_t cubes = 0;
    {
        auto os = open_out(dir / "grid.txt");
        os << provenance(c);
        write_grid(os, grid);
        for (int k = 1; k <= grid.k_max(); ++k) cubes += grid.count(k);
    }
    {
        auto os = open_out(dir / "whitney.tsv");
        os << provenance(c) << std::setprecision(17);
        os << "generation\tindex\tr_lo\tr_hi\trefined\textent\n";
        for (int k = 1; k <= grid.k_max(); ++k)
            for (std::int64_t j = 0; j < grid.count(k); ++j) {
                const WhitneyBox u = whitney_box(grid, {k, j});
                os << k << '\t' << j << '\t' << u.region.r_lo << '\t' << u.region.r_hi << '\t' << refine(u).size() << '\t'
                   << to_string(u.region.extent) << '\n';
            }
    }
    const PropertyReport props = verify_grid_properties(grid);
    const PartitionReport part = verify_whitney_partition(grid);
    {
        auto os = open_out(dir / "properties.tsv");
        os << provenance(c) << std::setprecision(12);
        os << "property\tpass\tvalue\twitness\n";
        for (const PropertyEntry& e : props.entries)
            os << e.property << '\t' << (e.pass ? 1 : 0) << '\t' << e.value << '\t' << e.witness << '\n';
        os << "whitney_disjoint\t" << part.disjoint << "\t0\t" << part.witness << '\n';
        os << "whitney_refined_partition\t" << part.refined_partition << "\t0\t\n";
        os << "whitney_refined_containment\t" << part.refined_containment << "\t0\t\n";
        os << "whitney_faces_consistent\t" << part.faces_consistent << "\t0\t\n";
        os << "whitney_volume_error\t1\t" << part.volume_error << "\t\n";
        os << "c_star\t1\t" << props.c_star() << "\t\n";
        os << "a0\t1\t" << props.a0 << "\t\n";
        os << "gamma\t1\t" << props.gamma << "\t\n";
    }
    const bool ok = props.all_pass() && part.pass();
    out << "cubes " << cubes << '\n';
    out << "grid properties " << (props.all_pass() ? "pass" : "FAIL") << ", whitney partition "
        << (part.pass() ? "pass" : "FAIL") << '\n';
    out << "outputs in " << dir.string() << '\n';
    return ok ? kOk : kConstructionViolation;
}

int cmd_classify_drift(const RunConfig& c, std::ostream& out)
{
    const DyadicGrid grid = build_grid(c.dim, c.k_max);
    const DriftField b = make_drift(c);
    const PointwiseBoundResult pw = pointwise_bound_check(b);
    if (!pw.pass)
        throw InputError("drift violates |B| <= M / delta: worst ratio " + std::to_string(pw.worst_ratio));
    const auto verdicts = classify_refined_boxes(grid, b, c.eps, 8, c.threads);
    const fs::path dir = output_dir(c);
    write_config_file(dir, c);
    std::int64_t bad = 0, inconclusive = 0;
    {
        auto os = open_out(dir / "verdicts.tsv");
        os << provenance(c) << std::setprecision(12);
        os << "generation\tindex\toctant\tintegral\tthreshold\terror\tgood\tinconclusive\n";
        for (const AsaVerdict& v : verdicts) {
            os << v.box.parent.generation << '\t' << v.box.parent.index << '\t' << v.box.octant << '\t' << v.integral << '\t'
               << v.threshold << '\t' << v.error_bound << '\t' << v.good << '\t' << v.inconclusive << '\n';
            bad += !v.good;
            inconclusive += v.inconclusive;
        }
    }
    out << "refined boxes " << verdicts.size() << ", bad " << bad << ", inconclusive " << inconclusive << '\n';
    out << "pointwise bound worst ratio " << pw.worst_ratio << '\n';
    if (c.dim == 2) out << "Carleson norm " << carleson_norm(b).value << '\n';
    out << "outputs in " << dir.string() << '\n';
    return kOk;
}

int cmd_build_sawtooth(const RunConfig& c, std::ostream& out)
{
    const DyadicGrid grid = build_grid(c.dim, c.k_max);
    const DriftField b = make_drift(c);
    ConstructionParams p;
    p.eps = c.eps;
    p.eta = c.eta;
    p.m_bound = c.m_bound;
    p.threads = c.threads;
    const SawtoothDomain dom = build_ample_sawtooth(grid, b, p);
    const fs::path dir = output_dir(c);
    write_config_file(dir, c);
    {
        auto os = open_out(dir / "sawtooth.txt");
        os << provenance(c);
        write_sawtooth(os, dom);
    }
    std::ostringstream sum;
    sum << std::setprecision(12);
    sum << "generations " << dom.generations() << ", fraction " << dom.ampleness_fraction() << ", eta " << c.eta << ", N0 "
        << dom.n0 << '\n';
    const auto shadows = dom.shadow_fractions();
    for (int f = 0; f < dom.generations(); ++f)
        sum << "family " << f + 1 << ": " << dom.families()[static_cast<std::size_t>(f)].boxes.size()
            << " boxes, shadow fraction " << shadows[static_cast<std::size_t>(f)] << '\n';
    {
        auto os = open_out(dir / "summary.txt");
        os << provenance(c) << sum.str();
    }
    out << sum.str() << "outputs in " << dir.string() << '\n';
    return kOk;
}

SawtoothDomain load_sawtooth(const RunConfig& c)
{
    if (c.sawtooth.empty()) throw InputError("this command needs --sawtooth (run build-sawtooth first)");
    std::ifstream is(c.sawtooth);
    if (!is) throw InputError("cannot read sawtooth artifact " + c.sawtooth);
    SawtoothDomain dom = read_sawtooth(is);
    if (dom.dim() != c.dim) throw InputError("sawtooth artifact dimension differs from --dim");
    return dom;
}

int cmd_estimate_measure(const RunConfig& c, std::ostream& out)
{
    const DriftField b = make_drift(c);
    std::optional<SawtoothDomain> saw;
    if (!c.sawtooth.empty()) saw = load_sawtooth(c);
    const DomainHandle dom = saw ? saw->handle(saw->final_level()) : DomainHandle::unit_ball(c.dim);
    const DyadicGrid grid = saw ? saw->grid() : build_grid(c.dim, std::max(c.k_est, 1));
    if (c.k_est > grid.k_max()) throw InputError("k_est exceeds the grid depth");
    std::vector<double> pv = c.pole;
    if (pv.empty()) pv = c.dim == 2 ? std::vector<double>{0.5, 0.0} : std::vector<double>{0.5, 0.0, 0.0};
    const Point x = make_point(pv);
    auto part = std::make_shared<BoundaryPartition>(grid, c.k_est, dom);
    const MeasureEstimate est = estimate_measure(x, dom, b, part, c.walkers, walker_config(c));
    const fs::path dir = output_dir(c);
    write_config_file(dir, c);
    {
        auto os = open_out(dir / "measure.tsv");
        os << provenance(c);
        write_measure(os, est);
    }
    out << "walkers " << est.walkers << ", completed " << est.completed << ", escaped " << est.escaped << ", cells "
        << part->size() << '\n';
    if (!est.warning.empty()) out << "warning: " << est.warning << '\n';
    out << "outputs in " << dir.string() << '\n';
    return kOk;
}

ClaimReport skipped(const std::string& claim, const std::string& why)
{
    ClaimReport r;
    r.claim = claim;
    r.verdict = Verdict::inconclusive;
    r.notes.push_back("skipped: " + why);
    return r;
}

int cmd_verify_claims(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    const SawtoothDomain saw = load_sawtooth(c);
    const DriftField b = make_drift(c);
    const DomainHandle dom = saw.handle(saw.final_level());
    const OperatorSpec spec = operator_spec(c);
    CheckBudget budget;
    budget.walkers = c.walkers;
    budget.walker = walker_config(c);
    const fs::path dir = output_dir(c);
    write_config_file(dir, c);

    auto selected = [&](const std::string& name) { return std::find(c.checks.begin(), c.checks.end(), name) != c.checks.end(); };
    auto guarded = [&](const std::string& name, auto&& fn) -> ClaimReport {
        try {
            return fn();
        }
        catch (const PreconditionError& e) {
            return skipped(name, e.what());
        }
        catch (const UnsupportedError& e) {
            return skipped(name, e.what());
        }
    };
    const Point e1 = Point::axis(c.dim, 0);
    std::vector<ClaimReport> reports;
    std::vector<ScatterSeries> holder_plot, ainfty_plot;

    if (selected("bourgain"))
        reports.push_back(guarded("bourgain_sweep", [&] { return bourgain_sweep(dom, b, spec, budget, {2, 3, 4, 5, 6}, e1); }));
    if (selected("claim1")) {
        std::vector<double> pv = c.pole;
        if (pv.empty()) {
            const Point d = Point::polar(0.8, 0.3);
            pv = c.dim == 2 ? std::vector<double>{d[0], d[1]} : std::vector<double>{d[0], d[1], 0.0};
        }
        reports.push_back(guarded("claim1_twin_balls", [&] { return claim1_twin_balls(make_point(pv), saw, b, spec, budget); }));
    }
    const bool planar = c.dim == 2;
    if (selected("holder")) {
        reports.push_back(guarded("holder_decay", [&] {
            if (!planar) throw UnsupportedError("two-dimensional check");
            HolderData d;
            d.q = Point(1.0, 0.0);
            d.r = 0.5;
            d.support = {0.5 * kPi, 1.5 * kPi};
            ClaimReport r = holder_exponent_fit(d, b, spec);
            ScatterSeries pts{"u(y_k)", {}, false}, fit{"fit", {}, true};
            for (int k = 0; k <= 4; ++k) {
                const std::string key = "u_k" + std::to_string(k);
                const double dist = d.r * std::pow(10.0, -k);
                if (r.has(key)) pts.points.push_back({dist, r.get(key)});
                if (r.has("alpha")) fit.points.push_back({dist, r.get("C") * std::pow(dist / d.r, r.get("alpha"))});
            }
            holder_plot = {pts, fit};
            return r;
        }));
    }
    if (selected("criterion"))
        reports.push_back(guarded("borel_criterion", [&] {
            if (!planar) throw UnsupportedError("two-dimensional check");
            return criterion_scan(dom, b, spec, CriterionConfig{}, budget);
        }));
    if (selected("bmo"))
        reports.push_back(guarded("bmo_carleson", [&] {
            if (!planar) throw UnsupportedError("two-dimensional check");
            return bmo_report(fd_solve(b, [](double t) { return std::cos(t); }), "f = cos theta");
        }));
    if (selected("ainfty"))
        reports.push_back(guarded("weak_ainfty", [&] {
            if (!planar) throw UnsupportedError("two-dimensional check");
            AinftyEnvelope env;
            ClaimReport r = weak_ainfty_fit(b, spec, AinftyConfig{}, budget, &env);
            ScatterSeries pts{"pairs", {}, false};
            for (const AinftyPair& p : env.pairs) pts.points.push_back({p.sigma_ratio, p.omega_ratio});
            ainfty_plot = {pts};
            for (std::size_t i = 0; i < env.theta.size(); i += 4) {
                ScatterSeries line{"C0 s^" + std::to_string(env.theta[i]).substr(0, 3), {}, true};
                for (int s = 1; s <= 20; ++s) {
                    const double x = s / 20.0;
                    line.points.push_back({x, env.c0[i] * std::pow(x, env.theta[i])});
                }
                ainfty_plot.push_back(line);
            }
            return r;
        }));

    {
        auto os = open_out(dir / "reports.txt");
        os << provenance(c);
        for (const ClaimReport& r : reports) write_report(os, r);
    }
    {
        auto os = open_out(dir / "claims.tsv");
        os << provenance(c);
        write_report_table(os, reports);
    }
    if (!holder_plot.empty()) {
        auto os = open_out(dir / "holder.svg");
        write_svg(os, "boundary decay", holder_plot, true, true);
    }
    if (!ainfty_plot.empty()) {
        auto os = open_out(dir / "ainfty.svg");
        write_svg(os, "weak A-infinity pairs", ainfty_plot);
    }

    bool violated = false;
    for (const ClaimReport& r : reports) {
        out << std::left << std::setw(20) << r.claim << ' ' << to_string(r.verdict) << '\n';
        if (r.verdict == Verdict::inconclusive)
            err << "warning: " << r.claim << " inconclusive" << (r.notes.empty() ? "" : ": " + r.notes.front()) << '\n';
        violated = violated || r.verdict == Verdict::violated;
    }
    out << "outputs in " << dir.string() << '\n';
    return violated ? kClaimViolated : kOk;
}

int cmd_constants(const RunConfig& c, std::ostream& out)
{
    const auto rows = constants_table(operator_spec(c));
    const fs::path dir = output_dir(c);
    write_config_file(dir, c);
    {
        auto os = open_out(dir / "constants.tsv");
        os << provenance(c);
        write_constants(os, rows);
    }
    write_constants(out, rows);
    return kOk;
}

} // namespace

void validate(const RunConfig& c)
{
    if (c.dim != 2 && c.dim != 3) throw InputError("--dim must be 2 or 3");
    const int cap = c.dim == 2 ? DyadicGrid::kMaxGeneration2D : DyadicGrid::kMaxGeneration3D;
    if (c.k_max < 1 || c.k_max > cap) throw InputError("--kmax must lie in [1, " + std::to_string(cap) + "]");
    if (!(c.eps > 0.0)) throw InputError("--eps must be positive");
    if (!(c.eta > 0.0 && c.eta < 1.0)) throw InputError("--eta must lie in (0, 1)");
    if (!(c.m_bound > 0.0)) throw InputError("--m-bound must be positive");
    if (c.walkers < 1) throw InputError("--walkers must be positive");
    if (c.threads < 0) throw InputError("--threads must be nonnegative");
    if (!(c.step_factor > 0.0 && c.step_factor <= 0.5)) throw InputError("step_factor must lie in (0, 0.5]");
    if (!(c.absorb_depth > 0.0 && c.absorb_depth < 0.5)) throw InputError("absorb_depth must lie in (0, 0.5)");
    if (c.k_est < 1 || c.k_est > cap) throw InputError("k_est out of range");
    if (!(c.a0 > 0.0 && c.a0 <= 1.0 && c.a > 0.0 && c.a <= 1.0)) throw InputError("a0 and a must lie in (0, 1]");
    if (!c.pole.empty()) {
        if (static_cast<int>(c.pole.size()) != c.dim) throw InputError("--pole needs one coordinate per dimension");
        double r2 = 0.0;
        for (double v : c.pole) r2 += v * v;
        if (!(r2 < 1.0)) throw InputError("--pole must lie inside the unit ball");
    }
    for (const std::string& ch : c.checks)
        if (std::find(kAllChecks.begin(), kAllChecks.end(), ch) == kAllChecks.end())
            throw InputError("unknown check '" + ch + "'");
}

std::string to_json(const RunConfig& cfg)
{
    return config_json(cfg).dump();
}

RunConfig parse_config(const std::string& text, RunConfig c)
{
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InputError("config must be a JSON object");
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const auto& v = it.value();
            if (k == "dim") c.dim = v.get<int>();
            else if (k == "kmax") c.k_max = v.get<int>();
            else if (k == "drift") c.drift = v.get<std::string>();
            else if (k == "eps") c.eps = v.get<double>();
            else if (k == "eta") c.eta = v.get<double>();
            else if (k == "m_bound") c.m_bound = v.get<double>();
            else if (k == "walkers") c.walkers = v.get<std::int64_t>();
            else if (k == "seed") c.seed = v.get<std::uint64_t>();
            else if (k == "threads") c.threads = v.get<int>();
            else if (k == "out") c.out = v.get<std::string>();
            else if (k == "sawtooth") c.sawtooth = v.get<std::string>();
            else if (k == "pole") c.pole = v.get<std::vector<double>>();
            else if (k == "checks") c.checks = v.get<std::vector<std::string>>();
            else if (k == "step_factor") c.step_factor = v.get<double>();
            else if (k == "absorb_depth") c.absorb_depth = v.get<double>();
            else if (k == "k_est") c.k_est = v.get<int>();
            else if (k == "a0") c.a0 = v.get<double>();
            else if (k == "a") c.a = v.get<double>();
            else throw InputError("unknown config key '" + k + "'");
        }
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad config value: ") + e.what());
    }
    return c;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Sawtooth domains, elliptic-measure estimates and claim checks for drift operators on the unit ball"};
    app.require_subcommand(1);
    RunConfig f;
    std::string config_path;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> flags;
    auto add = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file; flags override it");
        flags.push_back({sub->add_option("--dim", f.dim, "dimension (2 or 3)"), [&](RunConfig& c) { c.dim = f.dim; }});
        flags.push_back({sub->add_option("--kmax", f.k_max, "finest dyadic generation"), [&](RunConfig& c) { c.k_max = f.k_max; }});
        flags.push_back({sub->add_option("--drift", f.drift, "zero | uniform:E | cone:K:I[,K:I][@A] | grid:PATH"),
                         [&](RunConfig& c) { c.drift = f.drift; }});
        flags.push_back({sub->add_option("--eps", f.eps, "smallness parameter"), [&](RunConfig& c) { c.eps = f.eps; }});
        flags.push_back({sub->add_option("--eta", f.eta, "ampleness parameter"), [&](RunConfig& c) { c.eta = f.eta; }});
        flags.push_back({sub->add_option("--m-bound", f.m_bound, "pointwise drift bound M"),
                         [&](RunConfig& c) { c.m_bound = f.m_bound; }});
        flags.push_back({sub->add_option("--walkers", f.walkers, "walkers per estimate"), [&](RunConfig& c) { c.walkers = f.walkers; }});
        flags.push_back({sub->add_option("--seed", f.seed, "random seed"), [&](RunConfig& c) { c.seed = f.seed; }});
        flags.push_back({sub->add_option("--threads", f.threads, "worker cap (0 = hardware)"),
                         [&](RunConfig& c) { c.threads = f.threads; }});
        flags.push_back({sub->add_option("--out", f.out, "output directory (default $AMPLE_OUT or ./ample_out)"),
                         [&](RunConfig& c) { c.out = f.out; }});
        flags.push_back({sub->add_option("--sawtooth", f.sawtooth, "sawtooth artifact from build-sawtooth"),
                         [&](RunConfig& c) { c.sawtooth = f.sawtooth; }});
        flags.push_back({sub->add_option("--pole", f.pole, "pole coordinates, comma separated")->delimiter(','),
                         [&](RunConfig& c) { c.pole = f.pole; }});
        flags.push_back({sub->add_option("--checks", f.checks, "checks to run, comma separated")->delimiter(','),
                         [&](RunConfig& c) { c.checks = f.checks; }});
        flags.push_back({sub->add_option("--step-factor", f.step_factor, "walker step factor rho"),
                         [&](RunConfig& c) { c.step_factor = f.step_factor; }});
        flags.push_back({sub->add_option("--absorb-depth", f.absorb_depth, "walker absorption depth"),
                         [&](RunConfig& c) { c.absorb_depth = f.absorb_depth; }});
        flags.push_back({sub->add_option("--k-est", f.k_est, "boundary cell generation"), [&](RunConfig& c) { c.k_est = f.k_est; }});
        flags.push_back({sub->add_option("--a0", f.a0, "twin-ball constant a0"), [&](RunConfig& c) { c.a0 = f.a0; }});
        flags.push_back({sub->add_option("--a", f.a, "twin-ball constant a"), [&](RunConfig& c) { c.a = f.a; }});
    };
    const std::vector<std::pair<std::string, std::string>> commands{
        {"decompose", "build the dyadic grid and Whitney boxes and check their properties"},
        {"classify-drift", "run the average smallness test on every refined box"},
        {"build-sawtooth", "run the stopping-time construction"},
        {"estimate-measure", "Monte Carlo exit distribution from a pole"},
        {"verify-claims", "run the claim checks against a sawtooth artifact"},
        {"constants", "tabulate the derived constants"}};
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        subs.push_back(app.add_subcommand(name, help));
        add(subs.back());
    }

    std::vector<const char*> argv{"ample"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        RunConfig c;
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw InputError("cannot read config " + config_path);
            std::stringstream ss;
            ss << is.rdbuf();
            c = parse_config(ss.str());
        }
        for (auto& [opt, apply] : flags)
            if (opt->count() > 0) apply(c);
        validate(c);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "decompose") return cmd_decompose(c, out);
        if (cmd == "classify-drift") return cmd_classify_drift(c, out);
        if (cmd == "build-sawtooth") return cmd_build_sawtooth(c, out);
        if (cmd == "estimate-measure") return cmd_estimate_measure(c, out);
        if (cmd == "verify-claims") return cmd_verify_claims(c, out, err);
        return cmd_constants(c, out);
    }
    catch (const ConstructionViolation& e) {
        err << "construction violation: " << e.what() << '\n';
        return kConstructionViolation;
    }
    catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    }
    catch (const DomainError& e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    }
    catch (const PreconditionError& e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    }
    catch (const UnsupportedError& e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    }
    catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kConstructionViolation;
    }
    catch (const fs::filesystem_error& e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    }
}

} // namespace ample::cli
