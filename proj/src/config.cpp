#include "curvlab/config.hpp"

#include "curvlab/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <system_error>

namespace curvlab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& s) {
    int v = 0;
    const auto t = trim(s);
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) throw ConfigError("not an integer: '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    const auto t = trim(s);
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) throw ConfigError("not an unsigned integer: '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s) {
    const auto t = trim(s);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError("not a boolean: '" + s + "'");
}

std::string list_to_string(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_double(v[i]);
    }
    return out;
}

struct Field {
    const char* key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define DOUBLE_FIELD(name, member)                                                     \
    Field{name, [](const ExperimentConfig& c) { return format_double(c.member); },   \
          [](ExperimentConfig& c, const std::string& v) { c.member = parse_double(v); }}
#define INT_FIELD(name, member)                                                       \
    Field{name, [](const ExperimentConfig& c) { return std::to_string(c.member); },  \
          [](ExperimentConfig& c, const std::string& v) { c.member = parse_int(v); }}
#define STRING_FIELD(name, member)                                                    \
    Field{name, [](const ExperimentConfig& c) { return c.member; },                  \
          [](ExperimentConfig& c, const std::string& v) { c.member = trim(v); }}
#define BOOL_FIELD(name, member)                                                                 \
    Field{name, [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); }, \
          [](ExperimentConfig& c, const std::string& v) { c.member = parse_bool(v); }}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        Field{"speed.kind", [](const ExperimentConfig& c) { return to_string(c.speed.kind); },
              [](ExperimentConfig& c, const std::string& v) { c.speed.kind = speed_kind_from_string(trim(v)); }},
        INT_FIELD("speed.n", speed.n),
        INT_FIELD("speed.k", speed.k),
        DOUBLE_FIELD("speed.q_growth", speed.q_growth),
        DOUBLE_FIELD("solver.tol", solver.tol),
        DOUBLE_FIELD("solver.atol", solver.atol),
        DOUBLE_FIELD("solver.rho_start", solver.rho_start),
        DOUBLE_FIELD("solver.rho_max", solver.rho_max),
        DOUBLE_FIELD("solver.theta", solver.theta),
        DOUBLE_FIELD("solver.Theta", solver.Theta),
        INT_FIELD("solver.k_first", solver.k_first),
        INT_FIELD("solver.k_last", solver.k_last),
        DOUBLE_FIELD("solver.cauchy_tol", solver.cauchy_tol),
        DOUBLE_FIELD("solver.residual_tol", solver.residual_tol),
        DOUBLE_FIELD("solver.M", solver.M),
        DOUBLE_FIELD("solver.z_spacing", solver.z_spacing),
        Field{"solver.a_list", [](const ExperimentConfig& c) { return list_to_string(c.solver.a_list); },
              [](ExperimentConfig& c, const std::string& v) { c.solver.a_list = parse_double_list(v); }},
        DOUBLE_FIELD("solver.L", solver.L),
        DOUBLE_FIELD("solver.fit_lo", solver.fit_lo),
        DOUBLE_FIELD("solver.fit_hi", solver.fit_hi),
        BOOL_FIELD("solver.check_bounds", solver.check_bounds),
        STRING_FIELD("flow.preset", flow.preset),
        STRING_FIELD("flow.scheme", flow.scheme),
        STRING_FIELD("flow.boundary", flow.boundary),
        DOUBLE_FIELD("flow.dx", flow.dx),
        DOUBLE_FIELD("flow.dt", flow.dt),
        DOUBLE_FIELD("flow.t_end", flow.t_end),
        DOUBLE_FIELD("flow.cfl_safety", flow.cfl_safety),
        DOUBLE_FIELD("flow.r_min", flow.r_min),
        DOUBLE_FIELD("flow.r0", flow.r0),
        DOUBLE_FIELD("flow.half", flow.half),
        DOUBLE_FIELD("flow.z_lo", flow.z_lo),
        DOUBLE_FIELD("flow.z_hi", flow.z_hi),
        INT_FIELD("flow.levels", flow.levels),
        DOUBLE_FIELD("flow.tau0", flow.tau0),
        DOUBLE_FIELD("flow.tau1", flow.tau1),
        INT_FIELD("flow.stride", flow.stride),
        INT_FIELD("spectral.K", spectral.K),
        INT_FIELD("spectral.quad_order", spectral.quad_order),
        DOUBLE_FIELD("spectral.r", spectral.r),
        DOUBLE_FIELD("spectral.L", spectral.L),
        DOUBLE_FIELD("spectral.cutoff_radius", spectral.cutoff_radius),
        INT_FIELD("spectral.windows", spectral.windows),
        INT_FIELD("spectral.seed_mode", spectral.seed_mode),
        DOUBLE_FIELD("spectral.eps", spectral.eps),
        STRING_FIELD("output.dir", out_dir),
        Field{"run.seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
              [](ExperimentConfig& c, const std::string& v) { c.seed = parse_u64(v); }},
    };
    return table;
}

#undef DOUBLE_FIELD
#undef INT_FIELD
#undef STRING_FIELD
#undef BOOL_FIELD

}  // namespace

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double parse_double(const std::string& s) {
    const auto t = trim(s);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty()) throw ConfigError("not a number: '" + s + "'");
    return v;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_double(item));
    }
    return out;
}

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
    const std::string k = trim(key);
    for (const auto& f : fields())
        if (k == f.key) {
            f.set(c, value);
            return;
        }
    throw ConfigError("unknown config key '" + k + "'");
}

std::vector<std::pair<std::string, std::string>> parse_assignments(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'section.key = value'");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    for (const auto& [k, v] : parse_assignments(text)) set_config_value(c, k, v);
    return c;
}

std::string read_config_text(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_config_text(path)); }

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : fields()) out.emplace_back(f.key, f.get(c));
    return out;
}

std::string serialize_config(const ExperimentConfig& c) {
    std::string out;
    for (const auto& [k, v] : config_entries(c)) out += k + " = " + v + "\n";
    return out;
}

}  // namespace curvlab
