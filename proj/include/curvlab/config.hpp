#pragma once

#include "curvlab/speed.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace curvlab {

/// Every tunable of an experiment. Text form: one `section.key = value` per
/// line, `#` starts a comment.
struct ExperimentConfig {
    SpeedSpec speed;

    struct Solver {
        double tol = 1e-10;
        double atol = 1e-13;
        double rho_start = 1e-4;
        double rho_max = 1000.0;
        double theta = 0.9;
        double Theta = 0.0;            // 0: 2 F(1,1) / F(0,1)
        int k_first = 4;
        int k_last = 16;
        double cauchy_tol = 1e-9;
        double residual_tol = 1e-6;
        double M = 50.0;
        double z_spacing = 0.0;        // 0: min(0.01 a, 0.05)
        std::vector<double> a_list{25.0, 50.0, 100.0};
        double L = 10.0;               // upper end of the neck window
        double fit_lo = 100.0, fit_hi = 1000.0;
        bool check_bounds = false;
        bool operator==(const Solver&) const = default;
    } solver;

    struct Flow {
        std::string preset = "cylinder";   // cylinder, bowl, bowl_vertical, mode, rescaled_bowl
        std::string scheme = "rk2";
        std::string boundary = "dirichlet";
        double dx = 0.1;
        double dt = 0.0;                   // fixed step, 0: CFL limit; the cylinder regression picks its own
        double t_end = 0.25;
        double cfl_safety = 0.4;
        double r_min = 1e-6;
        double r0 = 2.0;
        double half = 5.0;
        double z_lo = 5.0, z_hi = 25.0;
        int levels = 4;
        double tau0 = -15.0, tau1 = -6.0;
        int stride = 50;
        bool operator==(const Flow&) const = default;
    } flow;

    struct Spectral {
        int K = 12;
        int quad_order = 40;
        double r = 1e-4;
        double L = 10.0;
        double cutoff_radius = 0.0;
        int windows = 10;
        int seed_mode = 2;
        double eps = 1e-4;
        bool operator==(const Spectral&) const = default;
    } spectral;

    std::string out_dir = "curvlab_out";
    std::uint64_t seed = 7;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Shortest round-trip decimal form, independent of the locale.
std::string format_double(double v);
double parse_double(const std::string& s);
std::vector<double> parse_double_list(const std::string& s);

/// The `key = value` pairs of a config text in file order, without applying them.
std::vector<std::pair<std::string, std::string>> parse_assignments(const std::string& text);
ExperimentConfig parse_config(const std::string& text);
std::string read_config_text(const std::string& path);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& c);
/// Applies one `section.key`, value pair; throws ConfigError for unknown keys.
void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value);
/// Flat key -> value view, in serialization order.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c);

}  // namespace curvlab
