#include "qcmod/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "qcmod/boundary_analysis.hpp"

namespace qcmod {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

Complex parse_point(const Json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument(what + ": expected [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

BeltramiField parse_field(const Json& j) {
    if (!j.contains("family")) throw std::invalid_argument("field: missing family");
    const std::string family = j.at("family").get<std::string>();
    BeltramiField field = BeltramiField::zero();
    if (family == "zero") {
        field = BeltramiField::zero();
    } else if (family == "constant") {
        field = BeltramiField::constant(parse_point(j.at("c"), "field constant c"));
    } else if (family == "power") {
        field = BeltramiField::power(j.at("c").get<double>(), j.at("alpha").get<double>(),
                                     j.value("phase", 0.0));
    } else if (family == "radial_stretch") {
        field = BeltramiField::radial_stretch(j.at("k").get<double>());
    } else if (family == "radial_stretch_ring") {
        field = BeltramiField::radial_stretch_ring(j.at("k").get<double>(),
                                                   j.at("rho").get<double>());
    } else if (family == "angular_stretch") {
        field = BeltramiField::angular_stretch(j.at("a").get<double>());
    } else if (family == "grid") {
        field = BeltramiField::from_grid_csv(j.at("path").get<std::string>());
    } else {
        throw std::invalid_argument("field: unknown family '" + family + "'");
    }
    if (field.sup_bound() >= 0.9)
        throw std::invalid_argument(
            "field: ess-sup bound must be below 0.9 (got " + fmt(field.sup_bound()) + ")");
    return field;
}

AnnulusSpec parse_annulus(const Json& j) {
    const double ri = j.at("r_inner").get<double>();
    const double ro = j.at("r_outer").get<double>();
    if (!(ri > 0.0)) throw std::invalid_argument("annulus: r_inner must be positive");
    if (!(ri < ro))
        throw std::invalid_argument("annulus: r_inner must be smaller than r_outer");
    return AnnulusSpec(parse_point(j.value("center", Json::array({0.0, 0.0})), "annulus center"),
                       ri, ro);
}

double parse_p(const Json& j) {
    const double p = j.at("p").get<double>();
    if (!(p > 0.0)) throw std::invalid_argument("pnorm: p must be positive");
    return p;
}

CircleMap parse_trace(const Json& j, const RunOptions&) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "identity") return CircleMap::identity(j.value("samples", 1024));
    if (kind == "angular_stretch")
        return CircleMap::angular_stretch(j.at("a").get<double>(), j.value("samples", 8192));
    if (kind == "field") {
        const BeltramiField field = parse_field(j.at("field"));
        const CartesianGrid grid(j.value("half_width", 2.0), j.value("n", 512));
        SolveOptions opts;
        opts.trace_samples = j.value("samples", 1024);
        return solve_extended(field, grid, opts).trace();
    }
    throw std::invalid_argument("trace: unknown kind '" + kind + "'");
}

std::string csv_escape_name(const std::string& name) {
    std::string out;
    for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out << contents;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("atomic rename failed: " + path + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument("config: " + path + ": " + e.what());
    }
    return from_json(j);
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
    static const std::set<std::string> kinds = {
        "solve",  "pnorm",  "twb",        "module",   "reduced-module",
        "derivative", "claim2", "claim3", "continuity", "symmetry"};
    ExperimentConfig cfg;
    if (!j.contains("schema_version"))
        throw std::invalid_argument("config: missing schema_version");
    cfg.schema_version_ = j.at("schema_version").get<int>();
    if (cfg.schema_version_ != 1)
        throw std::invalid_argument("config: unsupported schema_version " +
                                    std::to_string(cfg.schema_version_));
    if (!j.contains("experiments") || !j.at("experiments").is_array())
        throw std::invalid_argument("config: missing experiments array");
    std::set<std::string> seen;
    for (const Json& e : j.at("experiments")) {
        ExperimentSpec spec;
        if (!e.contains("name")) throw std::invalid_argument("config: experiment missing name");
        spec.name = e.at("name").get<std::string>();
        if (!seen.insert(spec.name).second)
            throw std::invalid_argument("config: duplicate experiment name '" + spec.name + "'");
        if (!e.contains("experiment"))
            throw std::invalid_argument("config: '" + spec.name + "' missing experiment kind");
        spec.kind = e.at("experiment").get<std::string>();
        if (!kinds.count(spec.kind))
            throw std::invalid_argument("config: unknown experiment '" + spec.kind + "'");
        spec.params = e;
        cfg.experiments_.push_back(std::move(spec));
    }
    // eager validation of the common parameter blocks, so bad configs fail
    // before any experiment runs
    for (const ExperimentSpec& s : cfg.experiments_) {
        if (s.params.contains("field")) parse_field(s.params.at("field"));
        if (s.params.contains("annulus")) parse_annulus(s.params.at("annulus"));
        if (s.params.contains("p")) parse_p(s.params);
    }
    return cfg;
}

Json ExperimentConfig::to_json() const {
    Json out;
    out["schema_version"] = schema_version_;
    out["experiments"] = Json::array();
    for (const ExperimentSpec& s : experiments_) out["experiments"].push_back(s.params);
    return out;
}

bool ExperimentReport::all_pass() const {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

Json ExperimentReport::to_json() const {
    Json out;
    out["schema_version"] = 1;
    out["tool_version"] = tool_version;
    out["config"] = config_echo;
    out["wall_ms"] = wall_ms;
    out["all_pass"] = all_pass();
    out["notes"] = notes;
    out["results"] = Json::array();
    for (const auto& r : results) {
        Json jr;
        jr["name"] = r.name;
        jr["experiment"] = r.kind;
        jr["pass"] = r.pass;
        jr["wall_ms"] = r.wall_ms;
        jr["data"] = r.data;
        jr["failures"] = r.failures;
        jr["artifacts"] = r.artifacts;
        out["results"].push_back(jr);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Individual experiments
// ---------------------------------------------------------------------------

namespace {

Json pnorm_to_json(const PNormResult& r) {
    Json j;
    j["p"] = r.p;
    j["value"] = r.diverged ? Json("inf") : Json(r.value);
    j["converged"] = r.converged;
    j["diverged"] = r.diverged;
    j["tolerance"] = r.tolerance;
    j["shells"] = r.shell_values;
    return j;
}

void check_expectation(const Json& params, double value, bool diverged,
                       ExperimentResult& res) {
    if (!params.contains("expect")) {
        if (!res.data.value("converged", true) && !diverged) {
            res.pass = false;
            res.failures.push_back("no verdict within the shell budget");
        }
        return;
    }
    const Json& e = params.at("expect");
    if (e.value("diverges", false)) {
        if (!diverged) {
            res.pass = false;
            res.failures.push_back("expected divergence, got " + fmt(value));
        }
        return;
    }
    if (diverged) {
        res.pass = false;
        res.failures.push_back("unexpected divergence");
        return;
    }
    const double want = e.at("value").get<double>();
    const double rel = e.value("rel_tol", 1e-4);
    if (std::abs(value - want) > rel * std::abs(want)) {
        res.pass = false;
        res.failures.push_back("value " + fmt(value) + " not within " + fmt(rel) +
                               " of " + fmt(want));
    }
}

void run_solve(const ExperimentSpec& spec, const RunOptions& run_opts,
               ExperimentResult& res) {
    const BeltramiField field = parse_field(spec.params.at("field"));
    const CartesianGrid grid(spec.params.value("half_width", 2.0),
                             spec.params.value("n", 512));
    SolveOptions opts;
    opts.tol = spec.params.value("tol", 1e-8);
    opts.max_iter = spec.params.value("max_iter", 200);
    opts.trace_samples = spec.params.value("trace_samples", 1024);
    const QcSolution sol = solve_extended(field, grid, opts);

    res.data["iterations"] = sol.iterations();
    res.data["final_residual"] = sol.residual_history().back();
    res.data["trace_radial_defect"] = sol.trace_radial_defect();
    res.data["trace_available"] = sol.has_trace();
    const MobiusTransform& m = sol.normalization();
    res.data["normalization"] = {{"a", {m.a.real(), m.a.imag()}},
                                 {"b", {m.b.real(), m.b.imag()}},
                                 {"c", {m.c.real(), m.c.imag()}},
                                 {"d", {m.d.real(), m.d.imag()}}};

    const std::string base = csv_escape_name(spec.name);
    // grid dump: x, y, Re F, Im F
    {
        std::string csv = "x,y,re_f,im_f\n";
        for (int i = 0; i < grid.n; ++i)
            for (int j = 0; j < grid.n; ++j) {
                const Complex z = grid.point(i, j);
                const Complex w = sol.values()(i, j);
                csv += fmt(z.real()) + "," + fmt(z.imag()) + "," + fmt(w.real()) + "," +
                       fmt(w.imag()) + "\n";
            }
        const std::string path = run_opts.out_dir + "/" + base + "_solution.csv";
        write_file_atomic(path, csv);
        res.artifacts.push_back(path);
    }
    {
        Json sidecar;
        sidecar["normalization"] = res.data["normalization"];
        sidecar["iterations"] = sol.iterations();
        sidecar["residual_history"] = sol.residual_history();
        sidecar["grid"] = {{"n", grid.n}, {"half_width", grid.half_width}};
        sidecar["field"] = field.describe();
        const std::string path = run_opts.out_dir + "/" + base + "_solution_meta.json";
        write_file_atomic(path, sidecar.dump(2) + "\n");
        res.artifacts.push_back(path);
    }
    if (sol.has_trace()) {
        std::string csv = "theta,re_f,im_f\n";
        const CircleMap& f = sol.trace();
        for (int k = 0; k < f.size(); ++k) {
            const double theta = kTwoPi * k / f.size();
            csv += fmt(theta) + "," + fmt(f.samples()[k].real()) + "," +
                   fmt(f.samples()[k].imag()) + "\n";
        }
        const std::string path = run_opts.out_dir + "/" + base + "_trace.csv";
        write_file_atomic(path, csv);
        res.artifacts.push_back(path);
    }
    res.pass = true;
}

void run_pnorm(const ExperimentSpec& spec, ExperimentResult& res) {
    const BeltramiField field = parse_field(spec.params.at("field"));
    const PNormResult r = p_norm(field, parse_p(spec.params));
    res.data = pnorm_to_json(r);
    res.pass = true;
    check_expectation(spec.params, r.value, r.diverged, res);
}

void run_twb(const ExperimentSpec& spec, ExperimentResult& res) {
    const BeltramiField field = parse_field(spec.params.at("field"));
    const double theta = spec.params.value("zeta_arg", 0.0);
    const double r = spec.params.value("r", 0.5);
    const PNormResult tw = twb_integral(field, std::polar(1.0, theta), r);
    res.data = pnorm_to_json(tw);
    res.data["zeta_arg"] = theta;
    res.data["r"] = r;
    res.pass = true;
    check_expectation(spec.params, tw.value, tw.diverged, res);
}

void run_module(const ExperimentSpec& spec, ExperimentResult& res) {
    const BeltramiField field = parse_field(spec.params.at("field"));
    const AnnulusSpec annulus = parse_annulus(spec.params.at("annulus"));
    const Json g = spec.params.value("grid", Json::object());
    const PolarAnnulusGrid grid(annulus, g.value("n_radial", 96), g.value("n_angular", 192));
    const ModuleEstimate est = mod_image_annulus(field, annulus, grid);
    res.data["computed"] = est.computed;
    res.data["lower_bound"] = est.lower_bound;
    res.data["upper_bound"] = est.upper_bound;
    res.data["tolerance"] = est.tolerance;
    res.data["diagnostics"] = {{"energy", est.diagnostics.energy},
                               {"n_radial", est.diagnostics.n_radial},
                               {"n_angular", est.diagnostics.n_angular},
                               {"cg_iterations", est.diagnostics.cg_iterations},
                               {"cg_residual", est.diagnostics.cg_residual}};
    res.pass = true;
    if (est.computed < est.lower_bound - est.tolerance ||
        est.computed > est.upper_bound + est.tolerance) {
        res.pass = false;
        res.failures.push_back("computed module escapes its two-sided bounds");
    }
    if (spec.params.contains("expect")) {
        const Json& e = spec.params.at("expect");
        const double want = e.at("value").get<double>();
        const double tol = e.value("abs_tol", 1e-3);
        if (std::abs(est.computed - want) > tol) {
            res.pass = false;
            res.failures.push_back("module " + fmt(est.computed) + " not within " + fmt(tol) +
                                   " of " + fmt(want));
        }
    }
}

void run_reduced_module(const ExperimentSpec& spec, ExperimentResult& res) {
    const Json& d = spec.params.at("domain");
    const std::string kind = d.at("kind").get<std::string>();
    const int samples = d.value("samples", 256);
    JordanCurve curve = [&]() {
        if (kind == "circle")
            return JordanCurve::circle(parse_point(d.at("center"), "domain center"),
                                       d.at("radius").get<double>(), samples);
        if (kind == "ellipse")
            return JordanCurve::ellipse(parse_point(d.at("center"), "domain center"),
                                        d.at("semi_a").get<double>(),
                                        d.at("semi_b").get<double>(), samples);
        if (kind == "csv") return JordanCurve::read_csv(d.at("path").get<std::string>());
        throw std::invalid_argument("reduced-module: unknown domain kind '" + kind + "'");
    }();
    const Complex w0 = parse_point(spec.params.at("w0"), "w0");
    const int panels = spec.params.value("panels", 256);
    const ReducedModuleResult robin = reduced_module(curve, w0, panels);
    const ReducedModuleResult extrap = reduced_module_extrapolated(curve, w0, {}, panels);
    res.data["robin"] = {{"value", robin.value}, {"tolerance", robin.tolerance}};
    res.data["extrapolation"] = {{"value", extrap.value}, {"tolerance", extrap.tolerance}};
    res.data["difference"] = std::abs(robin.value - extrap.value);
    res.pass = std::abs(robin.value - extrap.value) <= spec.params.value("agree_tol", 1e-2);
    if (!res.pass)
        res.failures.push_back("methods disagree by " +
                               fmt(std::abs(robin.value - extrap.value)));
    if (spec.params.contains("expect")) {
        const double want = spec.params.at("expect").at("value").get<double>();
        const double tol = spec.params.at("expect").value("abs_tol", 1e-6);
        if (std::abs(robin.value - want) > tol) {
            res.pass = false;
            res.failures.push_back("robin value " + fmt(robin.value) + " not within " +
                                   fmt(tol) + " of " + fmt(want));
        }
    }
}

void run_derivative(const ExperimentSpec& spec, const RunOptions& run_opts,
                    ExperimentResult& res) {
    const CircleMap trace = parse_trace(spec.params.at("trace"), run_opts);
    const double step = spec.params.value("fd_step", 0.05);
    std::vector<double> thetas;
    if (spec.params.contains("thetas")) {
        thetas = spec.params.at("thetas").get<std::vector<double>>();
    } else {
        const int n = spec.params.value("n_points", 16);
        for (int j = 0; j < n; ++j) thetas.push_back(kTwoPi * (j + 0.5) / n);
    }
    Json rows = Json::array();
    res.pass = true;
    for (double theta : thetas) {
        const DerivativeEstimate est = derivative_fd(trace, theta, step);
        rows.push_back({{"theta", theta},
                        {"magnitude", est.magnitude},
                        {"tolerance", est.tolerance}});
        if (!(est.magnitude > 0.0)) {
            res.pass = false;
            res.failures.push_back("vanishing derivative at theta " + fmt(theta));
        }
    }
    res.data["rows"] = rows;
    res.data["fd_step"] = step;
}

void run_claim2(const ExperimentSpec& spec, ExperimentResult& res) {
    const BeltramiField field = parse_field(spec.params.at("field"));
    const double theta = spec.params.value("zeta_arg", 0.0);
    const std::vector<double> rho1s =
        spec.params.at("rho1").get<std::vector<double>>();
    const double ratio = spec.params.value("rho2_ratio", 0.5);
    const Json g = spec.params.value("grid", Json::object());
    Json rows = Json::array();
    res.pass = true;
    for (double rho1 : rho1s) {
        const GapResult gr =
            module_gap(field, std::polar(1.0, theta), ratio * rho1, rho1,
                       g.value("n_radial", 64), g.value("n_angular", 128));
        rows.push_back({{"rho1", rho1},
                        {"rho2", ratio * rho1},
                        {"gap", gr.gap},
                        {"bound", gr.bound},
                        {"tolerance", gr.tolerance}});
        if (std::abs(gr.gap) > gr.bound + gr.tolerance) {
            res.pass = false;
            res.failures.push_back("|gap| exceeds bound at rho1 " + fmt(rho1));
        }
    }
    res.data["rows"] = rows;
    res.data["zeta_arg"] = theta;
}

void run_claim3(const ExperimentSpec& spec, ExperimentResult& res) {
    const BeltramiField field = parse_field(spec.params.at("field"));
    const CartesianGrid grid(spec.params.value("half_width", 2.0),
                             spec.params.value("n", 512));
    const QcSolution sol = solve_extended(field, grid);
    const double r = spec.params.value("r", 0.2);
    std::vector<double> rhos = spec.params.value(
        "rhos", std::vector<double>{r / 2, r / 4, r / 8});
    const double step = spec.params.value("fd_step", 0.05);
    const double rel_tol = spec.params.value("rel_tol", 0.05);
    const int n = spec.params.value("n_points", 8);
    Json rows = Json::array();
    res.pass = true;
    for (int j = 0; j < n; ++j) {
        const double theta = kTwoPi * (j + 0.5) / n;
        const DerivativeEstimate fd = derivative_fd(sol.trace(), theta, step);
        const DerivativeEstimate vm =
            derivative_via_modules(field, sol, std::polar(1.0, theta), r, rhos);
        const double rel = std::abs(vm.magnitude - fd.magnitude) / fd.magnitude;
        rows.push_back({{"theta", theta},
                        {"fd", fd.magnitude},
                        {"modules", vm.magnitude},
                        {"rel_diff", rel}});
        if (rel > rel_tol) {
            res.pass = false;
            res.failures.push_back("methods disagree by " + fmt(rel) + " at theta " +
                                   fmt(theta));
        }
    }
    res.data["rows"] = rows;
    res.data["r"] = r;
}

void run_continuity(const ExperimentSpec& spec, const RunOptions&, ExperimentResult& res) {
    const BeltramiField field = parse_field(spec.params.at("field"));
    const int n_zeta = spec.params.value("n_zeta", 32);
    const double r = spec.params.value("r", 0.2);
    const std::string method = spec.params.value("method", "modules");
    ModuleDefectOptions defect_opts;
    defect_opts.cells_per_octave = spec.params.value("cells_per_octave", 48);
    defect_opts.n_angular = spec.params.value("n_angular", 128);

    auto sweep_json = [](const OscillationSweep& s) {
        Json j;
        j["theta"] = s.theta;
        j["log_deriv"] = s.log_deriv;
        j["tolerance"] = s.tolerance;
        j["skipped_theta"] = s.skipped_theta;
        j["max_adjacent_oscillation"] = s.max_adjacent_oscillation;
        j["method"] = s.method == DerivativeMethod::modules ? "modules" : "fd";
        return j;
    };

    OscillationSweep coarse, fine;
    if (method == "modules") {
        const CartesianGrid grid(spec.params.value("half_width", 2.0),
                                 spec.params.value("n", 512));
        const QcSolution sol = solve_extended(field, grid);
        coarse = derivative_oscillation(field, sol, n_zeta, r, defect_opts);
        fine = derivative_oscillation(field, sol, 2 * n_zeta, r, defect_opts);
    } else if (method == "fd") {
        const CircleMap trace = parse_trace(spec.params.at("trace"), RunOptions{});
        const double step = spec.params.value("fd_step", 0.05);
        coarse = derivative_oscillation(trace, n_zeta, step);
        fine = derivative_oscillation(trace, 2 * n_zeta, step);
    } else {
        throw std::invalid_argument("continuity: unknown method '" + method + "'");
    }
    res.data["coarse"] = sweep_json(coarse);
    res.data["fine"] = sweep_json(fine);
    if (spec.params.contains("expect_jump")) {
        // a derivative jump must survive refinement (non-integrable coefficients)
        const double want = spec.params.at("expect_jump").at("value").get<double>();
        const double rel = spec.params.at("expect_jump").value("rel_tol", 0.1);
        res.pass = std::abs(coarse.max_adjacent_oscillation - want) <= rel * want &&
                   std::abs(fine.max_adjacent_oscillation - want) <= rel * want;
        if (!res.pass)
            res.failures.push_back("jump drifted from " + fmt(want) + ": " +
                                   fmt(coarse.max_adjacent_oscillation) + " -> " +
                                   fmt(fine.max_adjacent_oscillation));
    } else {
        res.pass = fine.max_adjacent_oscillation <= coarse.max_adjacent_oscillation;
        if (!res.pass)
            res.failures.push_back(
                "oscillation grew under refinement: " + fmt(coarse.max_adjacent_oscillation) +
                " -> " + fmt(fine.max_adjacent_oscillation));
    }
}

void run_symmetry(const ExperimentSpec& spec, const RunOptions& run_opts,
                  ExperimentResult& res) {
    const CircleMap trace = parse_trace(spec.params.at("trace"), run_opts);
    const std::vector<double> ts = spec.params.value(
        "t_values", std::vector<double>{0.1, 0.05, 0.025, 0.0125});
    const int n_theta = spec.params.value("n_theta", 256);
    Json rows = Json::array();
    std::vector<double> sups;
    for (double t : ts) {
        double sup = 0.0;
        for (int k = 0; k < n_theta; ++k)
            sup = std::max(sup, std::abs(symmetry_ratio(trace, kTwoPi * k / n_theta, t) - 1.0));
        Json row = {{"t", t}, {"sup_deviation", sup}};
        if (spec.params.contains("corner")) {
            row["corner_ratio"] =
                symmetry_ratio(trace, spec.params.at("corner").value("theta", 0.0), t);
        }
        rows.push_back(row);
        sups.push_back(sup);
    }
    res.data["rows"] = rows;
    res.pass = true;
    if (spec.params.value("require_decreasing", true)) {
        for (std::size_t i = 1; i < sups.size(); ++i)
            if (sups[i] > sups[i - 1]) {
                res.pass = false;
                res.failures.push_back("sup deviation grew from t " + fmt(ts[i - 1]) +
                                       " to t " + fmt(ts[i]));
            }
    }
    if (spec.params.contains("corner")) {
        const Json& c = spec.params.at("corner");
        const double want = c.at("expect_ratio").get<double>();
        const double rel = c.value("rel_tol", 0.05);
        const double got = rows.back().at("corner_ratio").get<double>();
        if (std::abs(got - want) > rel * want) {
            res.pass = false;
            res.failures.push_back("corner ratio " + fmt(got) + " not within " + fmt(rel) +
                                   " of " + fmt(want));
        }
    }
}

ExperimentResult run_one(const ExperimentSpec& spec, const RunOptions& opts) {
    ExperimentResult res;
    res.name = spec.name;
    res.kind = spec.kind;
    const double t0 = now_ms();
    try {
        if (spec.kind == "solve")
            run_solve(spec, opts, res);
        else if (spec.kind == "pnorm")
            run_pnorm(spec, res);
        else if (spec.kind == "twb")
            run_twb(spec, res);
        else if (spec.kind == "module")
            run_module(spec, res);
        else if (spec.kind == "reduced-module")
            run_reduced_module(spec, res);
        else if (spec.kind == "derivative")
            run_derivative(spec, opts, res);
        else if (spec.kind == "claim2")
            run_claim2(spec, res);
        else if (spec.kind == "claim3")
            run_claim3(spec, res);
        else if (spec.kind == "continuity")
            run_continuity(spec, opts, res);
        else if (spec.kind == "symmetry")
            run_symmetry(spec, opts, res);
    } catch (const std::exception& e) {
        res.pass = false;
        res.failures.push_back(e.what());
    }
    res.wall_ms = now_ms() - t0;
    return res;
}

}  // namespace

// ---------------------------------------------------------------------------
// Batch orchestration
// ---------------------------------------------------------------------------

ExperimentReport run(const ExperimentConfig& config, const RunOptions& opts) {
    fs::create_directories(opts.out_dir);
    ExperimentReport report;
    report.config_echo = config.to_json();
    const double t0 = now_ms();

    const auto& specs = config.experiments();
    report.results.resize(specs.size());
    const int jobs = std::max(1, opts.jobs);
    if (jobs == 1 || specs.size() <= 1) {
        for (std::size_t i = 0; i < specs.size(); ++i)
            report.results[i] = run_one(specs[i], opts);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= specs.size()) break;
                report.results[i] = run_one(specs[i], opts);
            }
        };
        std::vector<std::thread> pool;
        const int nw = std::min<std::size_t>(jobs, specs.size());
        pool.reserve(nw);
        for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    emit_plot_data(report, opts.out_dir);
    report.wall_ms = now_ms() - t0;
    write_file_atomic(opts.out_dir + "/report.json", report.to_json().dump(2) + "\n");
    return report;
}

std::vector<std::string> emit_plot_data(ExperimentReport& report, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::vector<std::string> written;

    auto emit = [&](ExperimentResult& res, const std::string& suffix, const std::string& csv,
                    std::size_t rows) {
        if (rows == 0) {
            report.notes.push_back(res.name + ": empty sweep, no " + suffix + " file");
            return;
        }
        const std::string path = out_dir + "/" + csv_escape_name(res.name) + suffix;
        write_file_atomic(path, csv);
        if (std::find(res.artifacts.begin(), res.artifacts.end(), path) ==
            res.artifacts.end())
            res.artifacts.push_back(path);
        written.push_back(path);
    };

    for (ExperimentResult& res : report.results) {
        if ((res.kind == "pnorm" || res.kind == "twb") && res.data.contains("shells")) {
            std::string csv = "shell,value,partial_sum\n";
            double partial = 0.0;
            const auto shells = res.data.at("shells").get<std::vector<double>>();
            for (std::size_t j = 0; j < shells.size(); ++j) {
                partial += shells[j];
                csv += std::to_string(j) + "," + fmt(shells[j]) + "," + fmt(partial) + "\n";
            }
            emit(res, "_shells.csv", csv, shells.size());
        } else if (res.kind == "claim2" && res.data.contains("rows")) {
            std::string csv = "rho1,rho2,gap,bound,tolerance\n";
            for (const Json& r : res.data.at("rows"))
                csv += fmt(r.at("rho1").get<double>()) + "," + fmt(r.at("rho2").get<double>()) +
                       "," + fmt(r.at("gap").get<double>()) + "," +
                       fmt(r.at("bound").get<double>()) + "," +
                       fmt(r.at("tolerance").get<double>()) + "\n";
            emit(res, "_claim2.csv", csv, res.data.at("rows").size());
        } else if (res.kind == "claim3" && res.data.contains("rows")) {
            std::string csv = "theta,fd,modules,rel_diff\n";
            for (const Json& r : res.data.at("rows"))
                csv += fmt(r.at("theta").get<double>()) + "," + fmt(r.at("fd").get<double>()) +
                       "," + fmt(r.at("modules").get<double>()) + "," +
                       fmt(r.at("rel_diff").get<double>()) + "\n";
            emit(res, "_claim3.csv", csv, res.data.at("rows").size());
        } else if (res.kind == "derivative" && res.data.contains("rows")) {
            std::string csv = "theta,magnitude,tolerance\n";
            for (const Json& r : res.data.at("rows"))
                csv += fmt(r.at("theta").get<double>()) + "," +
                       fmt(r.at("magnitude").get<double>()) + "," +
                       fmt(r.at("tolerance").get<double>()) + "\n";
            emit(res, "_derivative.csv", csv, res.data.at("rows").size());
        } else if (res.kind == "continuity" && res.data.contains("fine")) {
            for (const char* part : {"coarse", "fine"}) {
                const Json& sweep = res.data.at(part);
                const auto theta = sweep.at("theta").get<std::vector<double>>();
                const auto ld = sweep.at("log_deriv").get<std::vector<double>>();
                const auto tol = sweep.at("tolerance").get<std::vector<double>>();
                const std::string method = sweep.at("method").get<std::string>();
                std::string csv = "theta,log_deriv,method,tolerance\n";
                for (std::size_t j = 0; j < theta.size(); ++j)
                    csv += fmt(theta[j]) + "," + fmt(ld[j]) + "," + method + "," +
                           fmt(tol[j]) + "\n";
                emit(res, std::string("_continuity_") + part + ".csv", csv, theta.size());
            }
        } else if (res.kind == "symmetry" && res.data.contains("rows")) {
            const bool corner = !res.data.at("rows").empty() &&
                                res.data.at("rows").front().contains("corner_ratio");
            std::string csv = corner ? "t,sup_deviation,corner_ratio\n" : "t,sup_deviation\n";
            for (const Json& r : res.data.at("rows")) {
                csv += fmt(r.at("t").get<double>()) + "," +
                       fmt(r.at("sup_deviation").get<double>());
                if (corner) csv += "," + fmt(r.at("corner_ratio").get<double>());
                csv += "\n";
            }
            emit(res, "_symmetry.csv", csv, res.data.at("rows").size());
        }
    }
    return written;
}

}  // namespace qcmod
