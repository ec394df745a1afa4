#include "curvlab/acceptance.hpp"
#include "curvlab/asymptotics.hpp"
#include "curvlab/config.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/flow.hpp"
#include "curvlab/io.hpp"
#include "curvlab/soliton.hpp"
#include "curvlab/spectral.hpp"
#include "curvlab/speed.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <list>
#include <string>
#include <vector>

using namespace curvlab;
using json = nlohmann::json;

namespace {

// A command-line option that overrides one config key.
struct KeyFlag {
    std::string key;
    std::string value;
    CLI::Option* opt = nullptr;
};

struct Command {
    CLI::App* app = nullptr;
    std::string config_path;
    std::vector<std::string> sets;
    std::list<KeyFlag> flags;
    bool check_bounds = false;
    CLI::Option* check_bounds_opt = nullptr;

    void flag(const std::string& name, const std::string& key, const std::string& help) {
        flags.push_back({key, {}, nullptr});
        flags.back().opt = app->add_option(name, flags.back().value, help + " [" + key + "]");
    }
};

Command make_command(CLI::App& root, const std::string& name, const std::string& help) {
    Command c;
    c.app = root.add_subcommand(name, help);
    return c;
}

void add_common(Command& c) {
    c.app->add_option("--config", c.config_path, "key = value config file");
    c.app->add_option("--set", c.sets, "override any config key: section.key=value")->take_all();
    c.flag("--speed", "speed.kind", "speed kind: sum, bh, sigma_ratio");
    c.flag("--n", "speed.n", "dimension");
    c.flag("--k", "speed.k", "sigma_ratio order");
    c.flag("--out", "output.dir", "output directory");
    c.flag("--seed", "run.seed", "seed for random test directions");
}

std::string normalize_seed_mode(const std::string& v) {
    if (v == "bowl") return "-1";
    if (v.rfind("k=", 0) == 0) return v.substr(2);
    return v;
}

// Applies the command's flags on top of `cfg`.
void apply_flags(const Command& c, ExperimentConfig& cfg) {
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + s + "'");
        set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& f : c.flags) {
        if (f.opt->count() == 0) continue;
        set_config_value(cfg, f.key, f.key == "spectral.seed_mode" ? normalize_seed_mode(f.value) : f.value);
    }
    if (c.check_bounds_opt && c.check_bounds_opt->count() > 0) cfg.solver.check_bounds = true;
}

// Recommended values for a command/preset pair; file, environment and flags apply on top.
void apply_preset(ExperimentConfig& cfg, const std::string& command) {
    auto& f = cfg.flow;
    if (command == "flow") {
        if (f.preset == "bowl") {
            f.dx = 0.05;
            f.t_end = 1.0;
            f.z_lo = 5.0;
            f.z_hi = 25.0;
        } else if (f.preset == "bowl_vertical") {
            f.dx = 0.05;
            f.t_end = 1.0;
            f.half = 5.0;
        }
    } else if (command == "rescaled" || command == "spectral") {
        f.dx = 0.05;
        if (f.preset == "rescaled_bowl" || cfg.spectral.seed_mode < 0) {
            f.half = 8.0;
            f.tau0 = -15.0;
            f.tau1 = -6.0;
        } else {
            f.half = 10.0;
            f.t_end = 1.0;
        }
    }
}

ExperimentConfig resolve_config(const Command& c, const std::string& command) {
    const auto layered = [&](ExperimentConfig base) {
        if (!c.config_path.empty())
            for (const auto& [k, v] : parse_assignments(read_config_text(c.config_path)))
                set_config_value(base, k, k == "spectral.seed_mode" ? normalize_seed_mode(v) : v);
        if (const char* env = std::getenv("CURVLAB_OUT"); env && *env) base.out_dir = env;
        apply_flags(c, base);
        return base;
    };
    // First pass learns the preset; second pass layers everything over it.
    ExperimentConfig probe = layered(ExperimentConfig{});
    ExperimentConfig base;
    base.flow.preset = probe.flow.preset;
    base.spectral.seed_mode = probe.spectral.seed_mode;
    apply_preset(base, command);
    return layered(base);
}

FlowOptions flow_options(const ExperimentConfig& cfg) {
    FlowOptions fo;
    fo.scheme = time_scheme_from_string(cfg.flow.scheme);
    fo.boundary = boundary_mode_from_string(cfg.flow.boundary);
    fo.cfl_safety = cfg.flow.cfl_safety;
    fo.r_min = cfg.flow.r_min;
    fo.dt = cfg.flow.dt;
    return fo;
}

struct Output {
    std::string dir;
    std::string command;
    std::vector<std::string> files;

    std::string path(const std::string& name) const { return (std::filesystem::path(dir) / name).string(); }
    void csv(const std::string& name, const CsvTable& t) {
        t.write(path(name));
        files.push_back(name);
    }
    void text(const std::string& name, const std::string& body) {
        write_text(path(name), body);
        files.push_back(name);
    }
};

void add_speed_meta(CsvTable& t, const ExperimentConfig& cfg) {
    t.meta("speed", to_string(cfg.speed.kind));
    t.meta("n", std::to_string(cfg.speed.n));
    if (cfg.speed.kind == SpeedKind::SigmaRatio) t.meta("k", std::to_string(cfg.speed.k));
}

void history_csv(Output& out, const std::string& name, const FlowHistory& h, const ExperimentConfig& cfg,
                 const char* tcol, const char* xcol, const char* ucol) {
    CsvTable t({tcol, xcol, ucol});
    add_speed_meta(t, cfg);
    t.meta("representation", to_string(h.rep));
    t.meta("dx", h.dx);
    for (std::size_t s = 0; s < h.t.size(); ++s)
        for (std::size_t i = 0; i < h.u[s].size(); ++i)
            t.row({h.t[s], h.x0 + h.dx * static_cast<double>(i), h.u[s][i]});
    out.csv(name, t);
}

json cmd_bowl(const ExperimentConfig& cfg, Output& out, bool& pass) {
    const SpeedFunction speed(cfg.speed);
    BowlOptions bo;
    bo.rho_start = cfg.solver.rho_start;
    bo.tol = cfg.solver.tol;
    bo.atol = cfg.solver.atol;
    bo.residual_tol = cfg.solver.residual_tol;
    const BowlProfile b = solve_bowl(speed, cfg.solver.rho_max, bo);

    CsvTable t({"rho", "zeta", "zeta_rho", "zeta_rhorho"});
    add_speed_meta(t, cfg);
    t.meta("tol", cfg.solver.tol);
    for (std::size_t i = 0; i < b.rho.size(); ++i) t.row({b.rho[i], b.zeta[i], b.zeta_rho[i], b.zeta_rhorho[i]});
    out.csv("bowl_profile.csv", t);
    out.text("bowl.gp", gnuplot_script("bowl profile", {"bowl_profile.csv"}, 1, 2, "rho", "zeta"));

    json r{{"tip_curvature", b.tip_curvature},
           {"tip_target", 1.0 / (2.0 * speed.F11())},
           {"max_residual", b.max_residual},
           {"residual_ok", b.residual_ok},
           {"error_estimate", b.error_estimate},
           {"C_bound", b.C_bound}};
    if (b.rho_max >= 10.0) r["zeta_at_10"] = b.zeta_at(10.0);
    pass = b.residual_ok;
    if (cfg.solver.fit_hi <= b.rho_max) {
        const BowlExpansionFit f = fit_bowl_expansion(b, cfg.solver.fit_lo, cfg.solver.fit_hi);
        r["fit"] = {{"model", f.fit.model},
                    {"window", {f.fit.window_lo, f.fit.window_hi}},
                    {"c2", f.c2},
                    {"target", f.fit.target},
                    {"relative_error", f.fit.relative_error},
                    {"residual", f.fit.residual},
                    {"residual_ok", f.fit.residual_ok},
                    {"vartheta", f.vartheta},
                    {"vartheta_target", f.vartheta_target},
                    {"xi", f.xi},
                    {"lambda", f.lambda},
                    {"lambda_target", f.lambda_target}};
        pass = pass && f.fit.residual_ok && f.fit.relative_error <= 0.05;
    } else {
        r["fit"] = "skipped: rho_max below the fit window";
    }
    return r;
}

json cmd_shrinker(const ExperimentConfig& cfg, Output& out, bool& pass) {
    const SpeedFunction speed(cfg.speed);
    ShrinkerOptions so;
    so.theta = cfg.solver.theta;
    so.Theta = cfg.solver.Theta;
    so.k_first = cfg.solver.k_first;
    so.k_last = cfg.solver.k_last;
    so.tol = cfg.solver.tol;
    so.atol = cfg.solver.atol;
    so.cauchy_tol = cfg.solver.cauchy_tol;
    so.residual_tol = cfg.solver.residual_tol;
    so.M = cfg.solver.M;
    so.z_spacing = cfg.solver.z_spacing;

    std::vector<ShrinkerProfile> profiles;
    CsvTable summary({"a", "tip_curvature", "max_residual", "lower_bound_violations", "min_w_minus_2", "w_tip_limit",
                      "C_fit", "binding_z"});
    add_speed_meta(summary, cfg);
    json rows = json::array();
    pass = true;
    for (double a : cfg.solver.a_list) {
        ShrinkerProfile p = solve_shrinker(speed, a, so);
        const WDiagnostic w = shrinker_w_diagnostic(p);
        const std::size_t viol = lower_bound_violations(p);
        double C_fit = 0.0, bz = 0.0;
        if (cfg.solver.check_bounds) {
            const auto ub = shrinker_upper_bound_check(p, std::min(cfg.solver.L, std::nextafter(a, 0.0)));
            C_fit = ub.C_fit;
            bz = ub.binding_z;
        }
        summary.row({a, p.tip_curvature, p.max_residual, static_cast<double>(viol), w.min_w_minus_2, w.tip_limit,
                     C_fit, bz});
        CsvTable prof({"z", "v", "v_z", "v_zz", "w"});
        add_speed_meta(prof, cfg);
        prof.meta("a", a);
        for (std::size_t i = 0; i < p.z.size(); ++i) prof.row({p.z[i], p.v[i], p.v_z[i], p.v_zz[i], p.w[i]});
        const std::string name = "shrinker_a" + format_double(a) + ".csv";
        out.csv(name, prof);
        rows.push_back({{"a", a},
                        {"profile", name},
                        {"residual_ok", p.residual_ok},
                        {"lower_bound_violations", viol},
                        {"w_gt_2", w.w_gt_2},
                        {"w_tip_limit", w.tip_limit},
                        {"w_tip_target", w.tip_target},
                        {"cauchy_differences", p.cauchy_diffs}});
        if (cfg.solver.check_bounds) rows.back()["C_fit"] = C_fit;
        pass = pass && p.residual_ok && viol == 0 && w.w_gt_2;
        profiles.push_back(std::move(p));
    }
    out.csv("shrinker_summary.csv", summary);
    std::vector<std::string> names;
    for (double a : cfg.solver.a_list) names.push_back("shrinker_a" + format_double(a) + ".csv");
    out.text("shrinker.gp", gnuplot_script("shrinker profiles v(z)", names, 1, 2, "z", "v"));

    json r{{"profiles", rows}};
    if (cfg.solver.check_bounds) {
        try {
            const ShrinkerNeckFit f = fit_shrinker_neck(profiles, cfg.solver.L);
            r["neck_fit"] = {{"lower_bound_ok", f.lower_bound_ok}, {"bounded", f.bounded}, {"spread_top3", f.spread_top3}};
            pass = pass && f.lower_bound_ok && f.bounded;
        } catch (const WindowTooNarrow& e) {
            r["neck_fit"] = std::string("skipped: ") + e.what();
        }
    }
    return r;
}

json cmd_flow(const ExperimentConfig& cfg, Output& out, bool& pass) {
    const SpeedFunction speed(cfg.speed);
    const FlowOptions fo = flow_options(cfg);
    const auto& f = cfg.flow;
    if (f.preset == "cylinder") {
        const CylinderRegression c = cylinder_regression(speed, f.r0, f.half, f.t_end, f.dx, f.levels, fo);
        CsvTable t({"dx", "dt", "max_error", "ratio"});
        add_speed_meta(t, cfg);
        t.meta("r_exact", c.r_exact);
        for (std::size_t i = 0; i < c.dx.size(); ++i)
            t.row({c.dx[i], c.dt[i], c.max_error[i], i == 0 ? 0.0 : c.ratios[i - 1]});
        out.csv("flow_cylinder.csv", t);
        out.text("flow_cylinder.gp", gnuplot_script("cylinder regression", {"flow_cylinder.csv"}, 1, 3, "dx",
                                                    "max error", true));
        bool second_order = true;
        for (double r : c.ratios) second_order = second_order && r >= 3.5;
        pass = second_order && c.max_error.back() <= 1e-6;
        return {{"max_error", c.max_error}, {"ratios", c.ratios}, {"second_order", second_order}};
    }
    if (f.preset == "bowl" || f.preset == "bowl_vertical") {
        const bool vertical = f.preset == "bowl_vertical";
        const TranslationRun r = vertical ? bowl_translation_vertical(speed, f.half, f.dx, f.t_end, fo)
                                          : bowl_translation(speed, f.z_lo, f.z_hi, f.dx, f.t_end, fo);
        history_csv(out, "flow_" + f.preset + ".csv", r.history, cfg, "t", vertical ? "r" : "z",
                    vertical ? "height" : "r");
        pass = std::abs(r.speed_measured - 0.5) <= 1e-3;
        return {{"speed_measured", r.speed_measured},
                {"level", r.r_star},
                {"z_start", r.z_star_start},
                {"z_end", r.z_star_end},
                {"max_profile_error", r.max_profile_error}};
    }
    throw ConfigError("flow: unknown preset '" + f.preset + "' (cylinder, bowl, bowl_vertical)");
}

json cmd_rescaled(const ExperimentConfig& cfg, Output& out, bool& pass) {
    const SpeedFunction speed(cfg.speed);
    const FlowOptions fo = flow_options(cfg);
    const auto& f = cfg.flow;
    const auto stride = static_cast<std::size_t>(std::max(1, f.stride));
    if (f.preset == "rescaled_bowl" || cfg.spectral.seed_mode < 0) {
        const double top = 0.5 * std::exp(-f.tau0) + std::exp(-0.5 * f.tau0) * f.half;
        const BowlProfile bowl = solve_bowl_to_height(speed, top);
        const FlowHistory h = rescaled_bowl_run(bowl, f.tau0, f.tau1, f.half, f.dx, stride, fo);
        history_csv(out, "rescaled_bowl.csv", h, cfg, "tau", "z", "v");
        const DecayFit d = measure_rescaled_decay(h, cylinder_radius(speed), cfg.spectral.L);
        pass = d.fixed_point || (d.slope >= 0.4 && d.slope <= 0.6);
        return {{"decay_slope", d.slope}, {"residual", d.residual}, {"fixed_point", d.fixed_point}, {"target", 0.5}};
    }
    const int k = cfg.spectral.seed_mode;
    const ModeRun r = run_mode_seed(speed, k, cfg.spectral.eps, f.t_end, f.half, f.dx, stride, fo);
    history_csv(out, "rescaled_mode.csv", r.history, cfg, "tau", "z", "v");
    const double growth = r.amplitude_end / r.amplitude_start;
    const double rel = std::abs(growth / std::exp(r.expected_rate * f.t_end) - 1.0);
    pass = rel <= 0.05;
    return {{"k", k},
            {"expected_rate", r.expected_rate},
            {"measured_rate", r.measured_rate},
            {"drift", r.drift},
            {"relative_growth_error", rel}};
}

json cmd_spectral(const ExperimentConfig& cfg, Output& out, bool& pass) {
    const SpeedFunction speed(cfg.speed);
    const FlowOptions fo = flow_options(cfg);
    const auto& f = cfg.flow;
    const auto& sp = cfg.spectral;
    const double a = speed.a_lin();

    CsvTable eig({"k", "l", "mu", "sign"});
    add_speed_meta(eig, cfg);
    for (const auto& e : eigenvalue_table(6, 6, speed.n()))
        eig.row({static_cast<double>(e.k), static_cast<double>(e.l), e.mu, static_cast<double>(e.sign)});
    out.csv("spectral_eigenvalues.csv", eig);

    const auto stride = static_cast<std::size_t>(std::max(1, f.stride));
    FlowHistory h;
    if (sp.seed_mode < 0) {
        const double top = 0.5 * std::exp(-f.tau0) + std::exp(-0.5 * f.tau0) * f.half;
        const BowlProfile bowl = solve_bowl_to_height(speed, top);
        h = rescaled_bowl_run(bowl, f.tau0, f.tau1, f.half, f.dx, stride, fo);
    } else {
        h = run_mode_seed(speed, sp.seed_mode, sp.eps, static_cast<double>(sp.windows), f.half, f.dx, stride, fo)
                .history;
    }
    const HermiteBasis basis = build_basis(a, sp.K, sp.quad_order);
    GammaTraceOptions go;
    go.r = sp.r;
    go.L = sp.L;
    go.cutoff_radius = sp.cutoff_radius;
    const GammaTrace tr = gamma_trace_from_run(h, basis, cylinder_radius(speed), speed.n(), go);
    const DominanceVerdict v = merle_zaag_classifier(tr);

    CsvTable t({"window", "Gamma", "Gamma_plus", "Gamma_zero", "Gamma_minus", "delta"});
    add_speed_meta(t, cfg);
    t.meta("seed_mode", std::to_string(sp.seed_mode));
    t.meta("cutoff_radius", tr.cutoff_radius);
    for (std::size_t j = 0; j < tr.windows(); ++j)
        t.row({static_cast<double>(j), tr.Gamma[j], tr.Gamma_plus[j], tr.Gamma_zero[j], tr.Gamma_minus[j],
               tr.delta[j]});
    out.csv("spectral_trace.csv", t);
    out.text("spectral.gp", gnuplot_script("Gamma traces", {"spectral_trace.csv"}, 1, 2, "window", "Gamma", true));

    pass = basis.orthogonality_error <= 1e-10;
    return {{"verdict", to_string(v.verdict)},
            {"slope_positive", v.slope_positive},
            {"slope_neutral", v.slope_neutral},
            {"ratio_positive", v.ratio_positive},
            {"ratio_neutral", v.ratio_neutral},
            {"windows_used", v.windows_used},
            {"plus_window_factor", tr.plus_window_factor},
            {"equivalence_C", tr.equivalence_C},
            {"orthogonality_error", basis.orthogonality_error}};
}

json error_json(const std::string& kind, const std::string& message) {
    return {{"status", "error"}, {"error", kind}, {"message", message}};
}

int run_command(const std::string& name, const Command& c, json (*fn)(const ExperimentConfig&, Output&, bool&)) {
    const ExperimentConfig cfg = resolve_config(c, name);
    // Constructing the speed validates the kind/dimension pair before any output is written.
    const SpeedFunction speed(cfg.speed);
    Output out{cfg.out_dir, name, {}};
    ensure_directory(cfg.out_dir);
    out.text(name + "_config.txt", serialize_config(cfg));
    bool pass = false;
    json results = fn(cfg, out, pass);
    json config = json::object();
    for (const auto& [k, v] : config_entries(cfg)) config[k] = v;
    out.files.push_back(name + "_manifest.json");
    const json manifest{{"command", name},
                        {"status", pass ? "pass" : "fail"},
                        {"speed", speed.name()},
                        {"config", config},
                        {"outputs", out.files},
                        {"results", results},
                        {"format", "curvlab-csv v1"}};
    write_text(out.path(name + "_manifest.json"), manifest.dump(2) + "\n");
    std::cout << json{{"command", name}, {"status", manifest["status"]}, {"results", results}, {"out_dir", cfg.out_dir}}
                     .dump(2)
              << std::endl;
    return pass ? 0 : 1;
}

int run_verify(bool as_json, const std::vector<int>& only) {
    const auto results = run_acceptance(only, as_json ? nullptr : &std::cerr);
    bool all = true;
    for (const auto& r : results) all = all && r.pass;
    if (as_json) {
        json arr = json::array();
        for (const auto& r : results)
            arr.push_back({{"id", r.id},
                           {"name", r.name},
                           {"pass", r.pass},
                           {"numeric_pass", r.numeric_pass},
                           {"runtime_pass", r.runtime_pass},
                           {"measured", r.measured},
                           {"target", r.target},
                           {"tolerance", r.tolerance},
                           {"seconds", r.seconds},
                           {"time_limit", r.time_limit},
                           {"detail", r.detail},
                           {"error", r.error}});
        std::cout << json{{"status", all ? "pass" : "fail"}, {"criteria", arr}}.dump(2) << std::endl;
    } else {
        for (const auto& r : results) std::cout << format_result_line(r) << "\n";
        std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"curvlab: rotationally symmetric solitons and curvature flows"};
    app.require_subcommand(1);

    Command bowl = make_command(app, "bowl", "solve the translating bowl and fit its far-field expansion");
    add_common(bowl);
    bowl.flag("--rho-max", "solver.rho_max", "end of the radial interval");
    bowl.flag("--rho-start", "solver.rho_start", "first integration radius");
    bowl.flag("--tol", "solver.tol", "relative local error");
    bowl.flag("--atol", "solver.atol", "absolute local error");
    bowl.flag("--fit-lo", "solver.fit_lo", "fit window start");
    bowl.flag("--fit-hi", "solver.fit_hi", "fit window end");

    Command shrinker = make_command(app, "shrinker", "solve shrinker caps for a sweep of tip heights a");
    add_common(shrinker);
    shrinker.flag("--a", "solver.a_list", "comma-separated tip heights");
    shrinker.flag("--theta", "solver.theta", "lower barrier constant");
    shrinker.flag("--Theta", "solver.Theta", "upper barrier constant (0: 2F(1,1)/F(0,1))");
    shrinker.flag("--M", "solver.M", "radius of the w-bar comparison window");
    shrinker.flag("--L", "solver.L", "upper end of the neck window");
    shrinker.flag("--tol", "solver.tol", "relative local error");
    shrinker.flag("--cauchy-tol", "solver.cauchy_tol", "rho_k Cauchy threshold");
    shrinker.check_bounds_opt = shrinker.app->add_flag("--check-bounds", shrinker.check_bounds,
                                                       "fit the neck correction constant");

    Command flow = make_command(app, "flow", "run a flow preset: cylinder, bowl, bowl_vertical");
    add_common(flow);
    flow.flag("--preset", "flow.preset", "cylinder, bowl or bowl_vertical");
    flow.flag("--scheme", "flow.scheme", "rk2 or semi_implicit");
    flow.flag("--boundary", "flow.boundary", "dirichlet or extrapolate");
    flow.flag("--dx", "flow.dx", "grid spacing");
    flow.flag("--dt", "flow.dt", "fixed time step (0: CFL limit)");
    flow.flag("--t", "flow.t_end", "final time");
    flow.flag("--cfl", "flow.cfl_safety", "CFL safety factor");
    flow.flag("--r0", "flow.r0", "initial cylinder radius");
    flow.flag("--half", "flow.half", "half-width of the window (r_hi for bowl_vertical)");
    flow.flag("--z-lo", "flow.z_lo", "bowl window start");
    flow.flag("--z-hi", "flow.z_hi", "bowl window end");
    flow.flag("--levels", "flow.levels", "refinement levels");

    Command rescaled = make_command(app, "rescaled", "run the rescaled flow from a Hermite mode or the rescaled bowl");
    add_common(rescaled);
    rescaled.flag("--preset", "flow.preset", "rescaled_bowl selects the bowl seed");
    rescaled.flag("--seed-mode", "spectral.seed_mode", "Hermite mode k (k=2 or 2), or bowl");
    rescaled.flag("--eps", "spectral.eps", "mode amplitude");
    rescaled.flag("--dx", "flow.dx", "grid spacing");
    rescaled.flag("--dt", "flow.dt", "fixed time step (0: CFL limit)");
    rescaled.flag("--half", "flow.half", "window half-width");
    rescaled.flag("--t", "flow.t_end", "final tau for mode seeds");
    rescaled.flag("--tau0", "flow.tau0", "bowl seed start");
    rescaled.flag("--tau1", "flow.tau1", "bowl seed end");
    rescaled.flag("--L", "spectral.L", "sup window for the decay fit");
    rescaled.flag("--stride", "flow.stride", "snapshot stride in steps");

    Command spectral = make_command(app, "spectral", "Gamma traces and the mode-dominance verdict of a seeded run");
    add_common(spectral);
    spectral.flag("--seed-mode", "spectral.seed_mode", "Hermite mode k (k=2 or 2), or bowl");
    spectral.flag("--windows", "spectral.windows", "number of unit tau windows for mode seeds");
    spectral.flag("--eps", "spectral.eps", "mode amplitude");
    spectral.flag("--K", "spectral.K", "Hermite modes kept");
    spectral.flag("--quad-order", "spectral.quad_order", "Gauss-Hermite order");
    spectral.flag("--r", "spectral.r", "cutoff exponent");
    spectral.flag("--L", "spectral.L", "sup window for delta");
    spectral.flag("--cutoff-radius", "spectral.cutoff_radius", "cutoff radius (0: grid half-width)");
    spectral.flag("--dx", "flow.dx", "grid spacing");
    spectral.flag("--half", "flow.half", "window half-width");
    spectral.flag("--stride", "flow.stride", "snapshot stride in steps");

    CLI::App* verify = app.add_subcommand("verify", "run the acceptance suite");
    bool as_json = false;
    std::vector<int> only;
    verify->add_flag("--json", as_json, "machine-readable summary");
    verify->add_option("--only", only, "criterion ids to run")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*verify) return run_verify(as_json, only);
        if (*bowl.app) return run_command("bowl", bowl, cmd_bowl);
        if (*shrinker.app) return run_command("shrinker", shrinker, cmd_shrinker);
        if (*flow.app) return run_command("flow", flow, cmd_flow);
        if (*rescaled.app) return run_command("rescaled", rescaled, cmd_rescaled);
        if (*spectral.app) return run_command("spectral", spectral, cmd_spectral);
    } catch (const Error& e) {
        std::cout << error_json(e.kind(), e.what()).dump(2) << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cout << error_json("Exception", e.what()).dump(2) << std::endl;
        return 2;
    }
    return 2;
}
