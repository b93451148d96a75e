// Command-line front end: config ingestion, surface/gain synthesis,
// closed-loop simulation, residual verification, and a self-contained demo
// pipeline on the built-in three-mode benchmark.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mjsmc/controller.hpp"
#include "mjsmc/fixtures.hpp"
#include "mjsmc/model.hpp"
#include "mjsmc/regular_form.hpp"
#include "mjsmc/simulator.hpp"
#include "mjsmc/solver.hpp"
#include "mjsmc/surface.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mjsmc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fnv1a64_hex(const std::string& data) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SolverOptions solver_options_from_env() {
    SolverOptions opts;
    opts.max_iterations = 200000;
    const char* log = std::getenv("MJS_SMC_LOG");
    if (log && std::string(log) == "debug") opts.iteration_log = &std::cerr;
    return opts;
}

json solver_options_json(const SolverOptions& o) {
    return {{"max_iterations", o.max_iterations},
            {"tolerance", o.tolerance},
            {"variable_bound", o.variable_bound},
            {"seed", o.seed}};
}

// Load + validate; prints violations and returns nullopt on failure.
std::optional<MjlsSystem> load_system(const std::string& config_path) {
    json cfg;
    try {
        cfg = json::parse(read_file(config_path));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return std::nullopt;
    }
    MjlsSystem sys;
    try {
        sys = system_from_json(cfg);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return std::nullopt;
    }
    const ValidationReport rep = validate_system(sys);
    bool fatal = false;
    for (const std::string& v : rep.violations) {
        const bool note = v.find(": note:") != std::string::npos;
        (note ? std::cout : std::cerr) << (note ? "note: " : "config error: ") << v << "\n";
        fatal = fatal || !note;
    }
    if (fatal) return std::nullopt;
    return sys;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::string& config_path, const json& options) {
    fs::create_directories(out_dir);
    json m;
    m["command"] = command;
    m["config"] = config_path;
    m["output_dir"] = out_dir.string();
    m["options"] = options;
    m["config_hash"] = fnv1a64_hex(read_file(config_path));
    std::ofstream(out_dir / "manifest.json") << m.dump(2) << "\n";
}

void write_residuals_csv(const fs::path& path, const std::map<std::string, double>& residuals) {
    std::ofstream os(path);
    os << "constraint,residual\n";
    os.precision(12);
    for (const auto& [label, r] : residuals) os << label << ',' << r << '\n';
}

std::vector<RegularForm> forms_of(const MjlsSystem& sys) {
    std::vector<RegularForm> forms;
    for (const ModeData& md : sys.modes) forms.push_back(compute_regular_form(md));
    return forms;
}

int cmd_synthesize(const std::string& config_path, const std::string& variant_name,
                   const fs::path& out_dir) {
    auto sys = load_system(config_path);
    if (!sys) return kExitUsage;
    const ControllerVariant variant =
        variant_name == "adaptive" ? ControllerVariant::Adaptive : ControllerVariant::KnownDelay;

    SolverOptions opts = solver_options_from_env();
    write_manifest(out_dir, "synthesize", config_path,
                   {{"variant", variant_name}, {"solver", solver_options_json(opts)}});

    std::vector<RegularForm> forms;
    SurfaceDesign design;
    try {
        forms = forms_of(*sys);
        design = synthesize_surface(*sys, forms, opts);
    } catch (const std::exception& e) {
        std::cerr << "synthesis error: " << e.what() << "\n";
        return kExitUsage;
    }
    std::map<std::string, double> residuals = design.residual_report;
    if (design.status != FeasibilityStatus::StrictlyFeasible) {
        write_residuals_csv(out_dir / "residuals.csv", residuals);
        std::cerr << "surface synthesis: not strictly feasible\n";
        return kExitInfeasible;
    }

    ControllerGains gains;
    try {
        gains = synthesize_gains(*sys, variant, opts);
    } catch (const std::exception& e) {
        write_residuals_csv(out_dir / "residuals.csv", residuals);
        std::cerr << "gain synthesis: " << e.what() << "\n";
        return kExitInfeasible;
    }
    for (const auto& [label, r] : gains.residual_report) residuals[label] = r;

    std::ofstream(out_dir / "surface.json") << surface_to_json(design).dump(2) << "\n";
    std::ofstream(out_dir / "gains.json") << gains_to_json(gains).dump(2) << "\n";
    write_residuals_csv(out_dir / "residuals.csv", residuals);
    for (size_t i = 0; i < design.C.size(); ++i)
        std::cout << "C_" << (i + 1) << " = [" << design.C[i] << "]\n";
    return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& variant_name, int runs,
                 int seed, double tfinal, std::optional<double> dt_flag, const std::string& margin,
                 const fs::path& out_dir) {
    auto sys = load_system(config_path);
    if (!sys) return kExitUsage;
    const double h1 = sys->delays.h1();
    const double h2 = sys->delays.h2();
    if (tfinal <= h2) {
        std::cerr << "config error: tfinal must exceed the largest delay bound h2=" << h2 << "\n";
        return kExitUsage;
    }
    const double dt_max = h1 > 0.0 ? h1 / 10.0 : h2 / 50.0;
    const double dt = dt_flag.value_or(std::min(dt_max, 1e-3));
    if (dt <= 0.0 || dt > dt_max) {
        std::cerr << "config error: dt must lie in (0, " << dt_max << "]\n";
        return kExitUsage;
    }
    if (runs < 1) {
        std::cerr << "config error: runs must be >= 1\n";
        return kExitUsage;
    }

    SurfaceDesign design;
    ControllerGains gains;
    try {
        design = surface_from_json(json::parse(read_file(out_dir / "surface.json")));
        gains = gains_from_json(json::parse(read_file(out_dir / "gains.json")));
    } catch (const std::exception& e) {
        std::cerr << "missing or invalid synthesis artifacts in " << out_dir << ": " << e.what()
                  << "\n";
        return kExitUsage;
    }
    const ControllerVariant variant =
        variant_name == "adaptive" ? ControllerVariant::Adaptive : ControllerVariant::KnownDelay;
    if (variant != gains.variant) {
        std::cerr << "config error: gains.json was synthesized for the other variant\n";
        return kExitUsage;
    }

    write_manifest(out_dir, "simulate", config_path,
                   {{"variant", variant_name},
                    {"runs", runs},
                    {"seed", seed},
                    {"tfinal", tfinal},
                    {"dt", dt},
                    {"margin", margin}});

    const SurfaceRealization realization = make_realization(design);
    SimConfig base;
    base.t_final = tfinal;
    base.dt = dt;
    base.z0 = Vector::Ones(sys->n);
    base.mode0 = 0;
    base.variant = variant;
    base.margin = margin == "as-printed" ? MarginMode::AsPrinted : MarginMode::Additive;

    json summary;
    summary["runs"] = json::array();
    std::vector<Trajectory> trajectories;
    for (int k = 0; k < runs; ++k) {
        SimConfig cfg = base;
        cfg.seed = seed + k;
        Trajectory traj;
        try {
            traj = simulate(*sys, gains, realization, cfg);
        } catch (const std::exception& e) {
            std::cerr << "simulation error (seed " << cfg.seed << "): " << e.what() << "\n";
            return kExitUsage;
        }
        std::ofstream csv(out_dir / ("trajectory_seed" + std::to_string(cfg.seed) + ".csv"));
        write_trajectory_csv(csv, traj);

        const auto reach = reaching_time_empirical(traj, base.surface_tolerance);
        json entry;
        entry["seed"] = cfg.seed;
        entry["reaching_time"] = reach ? json(*reach) : json(nullptr);
        entry["ss_metric"] = empirical_ss_metric({traj});
        entry["final_norm"] = traj.z.back().norm();
        summary["runs"].push_back(entry);
        trajectories.push_back(std::move(traj));
    }
    summary["ss_metric"] = empirical_ss_metric(trajectories);
    std::ofstream(out_dir / "summary.json") << summary.dump(2) << "\n";
    std::cout << runs << " run(s) written to " << out_dir << "\n";
    return kExitOk;
}

// Rebuild the synthesis LMIs with X_i, Y_i pinned to the artifact values and
// every auxiliary variable re-solved; returns the residual report.
std::map<std::string, double> verify_surface(const MjlsSystem& sys,
                                             const std::vector<RegularForm>& forms,
                                             const SurfaceDesign& design,
                                             const SolverOptions& opts) {
    SurfaceLmis lmis = build_surface_lmis(sys, forms);
    Assignment fixed;
    for (size_t i = 0; i < lmis.mode_vars.size(); ++i) {
        fixed[lmis.mode_vars[i].X.id] = design.X[i];
        fixed[lmis.mode_vars[i].Y.id] = design.Y[i];
    }

    // Substitute the pinned values and re-index the remaining variables.
    LmiSystem reduced;
    reduced.strictness_margin = lmis.system.strictness_margin;
    std::map<int, VarHandle> remap;
    auto mapped = [&](const VarHandle& v) {
        auto it = remap.find(v.id);
        if (it != remap.end()) return it->second;
        VarHandle fresh = v.kind == VarKind::Symmetric
                              ? reduced.declare_symmetric(v.name, v.rows, v.sign_hint)
                              : reduced.declare_rectangular(v.name, v.rows, v.cols);
        remap.emplace(v.id, fresh);
        return fresh;
    };
    for (const Constraint& c : lmis.system.constraints) {
        MatrixExpr e = partial_substitute(c.expr, fixed);
        for (Term& t : e.terms) t.var = mapped(t.var);
        reduced.add(std::move(e), c.sense, c.label);
    }
    const FeasibilityResult result = solve_feasibility(reduced, opts);
    return result.per_constraint_residuals;
}

int cmd_verify(const std::string& config_path, const fs::path& out_dir) {
    auto sys = load_system(config_path);
    if (!sys) return kExitUsage;
    const SolverOptions opts = solver_options_from_env();

    std::map<std::string, double> residuals;
    bool any_artifact = false;
    if (fs::exists(out_dir / "surface.json")) {
        any_artifact = true;
        SurfaceDesign design;
        try {
            design = surface_from_json(json::parse(read_file(out_dir / "surface.json")));
            if (static_cast<int>(design.X.size()) != sys->mode_count() ||
                design.X[0].rows() != sys->n - sys->m)
                throw std::runtime_error("surface.json dimensions do not match config");
            residuals = verify_surface(*sys, forms_of(*sys), design, opts);
        } catch (const std::exception& e) {
            std::cerr << "verify error: " << e.what() << "\n";
            return kExitUsage;
        }
    }
    if (fs::exists(out_dir / "gains.json")) {
        any_artifact = true;
        try {
            const ControllerGains gains =
                gains_from_json(json::parse(read_file(out_dir / "gains.json")));
            if (static_cast<int>(gains.Omega.size()) != sys->mode_count() ||
                gains.Omega[0].rows() != sys->m)
                throw std::runtime_error("gains.json dimensions do not match config");
            ReachabilityLmis lmis = build_reachability_lmis(*sys, gains.variant);
            Assignment a;
            for (int i = 0; i < sys->mode_count(); ++i) {
                a[lmis.Omega[i].id] = gains.Omega[i];
                a[lmis.coupling[i].id] = gains.coupling[i];
            }
            for (const Constraint& c : lmis.system.constraints)
                residuals[c.label] = residual(c, a);
        } catch (const std::exception& e) {
            std::cerr << "verify error: " << e.what() << "\n";
            return kExitUsage;
        }
    }
    if (!any_artifact) {
        std::cerr << "verify error: no surface.json or gains.json in " << out_dir << "\n";
        return kExitUsage;
    }

    // Strict constraints must clear the margin; non-strict ones the tolerance.
    const double margin = 1e-7;
    const double tol = 1e-8;
    bool all_pass = true;
    std::cout << "constraint,residual,verdict\n";
    for (const auto& [label, r] : residuals) {
        const bool strict = label.rfind("PD[", 0) == 0 || label.rfind("LMI1[", 0) == 0 ||
                            label.rfind("LMI2[", 0) == 0 || label.rfind("LMI5[", 0) == 0 ||
                            label.rfind("LMI8[", 0) == 0 || label.rfind("LMI11[", 0) == 0;
        const bool ok = strict ? r <= -margin + tol : r <= tol;
        all_pass = all_pass && ok;
        std::cout << label << ',' << r << ',' << (ok ? "PASS" : "FAIL") << '\n';
    }
    std::cout << (all_pass ? "PASS" : "FAIL") << "\n";
    return all_pass ? kExitOk : kExitInfeasible;
}

int cmd_demo(const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const fs::path config_path = out_dir / "config.json";
    std::ofstream(config_path) << system_to_json(three_mode_benchmark()).dump(2) << "\n";
    int rc = cmd_synthesize(config_path.string(), "known", out_dir);
    if (rc != kExitOk) return rc;
    rc = cmd_simulate(config_path.string(), "known", 3, 1, 20.0, std::nullopt, "additive", out_dir);
    if (rc != kExitOk) return rc;
    const fs::path adaptive_dir = out_dir / "adaptive";
    rc = cmd_synthesize(config_path.string(), "adaptive", adaptive_dir);
    if (rc != kExitOk) return rc;
    return cmd_simulate(config_path.string(), "adaptive", 3, 1, 20.0, std::nullopt, "additive",
                        adaptive_dir);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sliding mode synthesis and simulation for jump systems with delays"};
    app.require_subcommand(1);

    std::string config_path;
    std::string variant = "known";
    std::string margin = "additive";
    std::string out = "out";
    int runs = 1;
    int seed = 0;
    double tfinal = 20.0;
    std::optional<double> dt;

    auto* synth = app.add_subcommand("synthesize", "Solve the synthesis LMIs, emit artifacts");
    synth->add_option("--config", config_path, "System configuration JSON")->required();
    synth->add_option("--variant", variant)->check(CLI::IsMember({"known", "adaptive"}));
    synth->add_option("--out", out, "Output directory");

    auto* sim = app.add_subcommand("simulate", "Closed-loop Monte-Carlo runs");
    sim->add_option("--config", config_path)->required();
    sim->add_option("--variant", variant)->check(CLI::IsMember({"known", "adaptive"}));
    sim->add_option("--runs", runs);
    sim->add_option("--seed", seed);
    sim->add_option("--tfinal", tfinal);
    sim->add_option("--dt", dt);
    sim->add_option("--margin", margin)->check(CLI::IsMember({"additive", "as-printed"}));
    sim->add_option("--out", out, "Directory holding the synthesis artifacts");

    auto* ver = app.add_subcommand("verify", "Residual audit of synthesis artifacts");
    ver->add_option("--config", config_path)->required();
    ver->add_option("--out", out, "Directory holding the artifacts");

    auto* demo = app.add_subcommand("demo", "Full pipeline on the built-in benchmark");
    demo->add_option("--out", out, "Output directory")->default_val("demo-out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (synth->parsed()) return cmd_synthesize(config_path, variant, out);
        if (sim->parsed())
            return cmd_simulate(config_path, variant, runs, seed, tfinal, dt, margin, out);
        if (ver->parsed()) return cmd_verify(config_path, out);
        if (demo->parsed()) return cmd_demo(out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
