#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvlab/config.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

using namespace curvlab;

TEST_CASE("default config round trips") {
    const ExperimentConfig c;
    const std::string text = serialize_config(c);
    CHECK(parse_config(text) == c);
    CHECK(serialize_config(parse_config(text)) == text);
}

TEST_CASE("randomized configs round trip exactly") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::uniform_int_distribution<int> k(1, 40);
    for (int it = 0; it < 50; ++it) {
        ExperimentConfig c;
        c.speed.kind = it % 3 == 0 ? SpeedKind::Sum : it % 3 == 1 ? SpeedKind::BrendleHuisken : SpeedKind::SigmaRatio;
        c.speed.n = k(rng);
        c.solver.tol = std::abs(u(rng)) * 1e-13;
        c.solver.rho_max = u(rng);
        c.solver.a_list = {u(rng), u(rng), std::nextafter(1.0, 2.0)};
        c.solver.check_bounds = it % 2 == 0;
        c.flow.preset = it % 2 ? "bowl" : "cylinder";
        c.flow.dx = 1.0 / 3.0;
        c.flow.tau0 = u(rng);
        c.spectral.seed_mode = k(rng) - 20;
        c.spectral.eps = 1e-300;
        c.seed = rng();
        c.out_dir = "runs/x" + std::to_string(it);
        CHECK(parse_config(serialize_config(c)) == c);
    }
}

TEST_CASE("config parsing details") {
    const ExperimentConfig c = parse_config("# comment\n\nspeed.kind = bh   # trailing\n  flow.dx=0.05\n");
    CHECK(c.speed.kind == SpeedKind::BrendleHuisken);
    CHECK(c.flow.dx == 0.05);
    const auto pairs = parse_assignments("b.x = 1\na.y = 2\n");
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].first == "b.x");
    CHECK(pairs[1].second == "2");

    CHECK_THROWS_AS(parse_config("speed.colour = red\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("flow.dx = fast\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("flow.levels = 2.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("solver.check_bounds = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/curvlab.cfg"), ConfigError);

    ExperimentConfig d;
    set_config_value(d, "solver.a_list", "10, 20,40");
    CHECK(d.solver.a_list == std::vector<double>{10.0, 20.0, 40.0});
    CHECK(config_entries(d).size() == parse_assignments(serialize_config(d)).size());
}

TEST_CASE("number formatting") {
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(format_double(inf) == "inf");
    CHECK(format_double(-inf) == "-inf");
    CHECK(format_double(0.1) == "0.1");
    CHECK(parse_double("inf") == inf);
    CHECK(parse_double("-inf") == -inf);
    CHECK(parse_double(" 2.5e-3 ") == 2.5e-3);
    CHECK_THROWS_AS(parse_double(""), ConfigError);
    CHECK_THROWS_AS(parse_double("1.0x"), ConfigError);
    for (double v : {1.0 / 3.0, 6.02214076e23, 5e-324, -0.0})
        CHECK(std::bit_cast<std::uint64_t>(parse_double(format_double(v))) == std::bit_cast<std::uint64_t>(v));
}

TEST_CASE("CSV round trip") {
    CsvTable t({"z", "v"});
    t.meta("speed", "bh(3)");
    t.meta("dx", 0.05);
    t.row({0.0, 1.0 / 3.0});
    t.row({-2.5, std::numeric_limits<double>::infinity()});
    CHECK_THROWS_AS(t.row({1.0}), ConfigError);
    const std::string text = t.str();
    CHECK(text.rfind("# curvlab-csv v1\n", 0) == 0);
    const ParsedCsv p = parse_csv(text);
    CHECK(p.columns == std::vector<std::string>{"z", "v"});
    REQUIRE(p.meta.size() == 2);
    CHECK(p.meta[0].second == "bh(3)");
    CHECK(parse_double(p.meta[1].second) == 0.05);
    REQUIRE(p.rows.size() == 2);
    CHECK(p.rows[0][1] == 1.0 / 3.0);
    CHECK(std::isinf(p.rows[1][1]));
    CHECK_THROWS_AS(parse_csv("z,v\n1,2\n"), ConfigError);

    const auto dir = std::filesystem::temp_directory_path() / "curvlab_test_io" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    t.write((dir / "t.csv").string());
    std::ifstream f(dir / "t.csv");
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str() == text);
    std::filesystem::remove_all(dir.parent_path());
}

TEST_CASE("gnuplot script") {
    const std::string gp = gnuplot_script("trace", {"a.csv", "b.csv"}, 1, 3, "tau", "Gamma", true);
    CHECK(gp.find("set datafile separator ','") != std::string::npos);
    CHECK(gp.find("set logscale y") != std::string::npos);
    CHECK(gp.find("'a.csv' using 1:3") != std::string::npos);
    CHECK(gp.find("'b.csv' using 1:3") != std::string::npos);
    CHECK(gp.find("set xlabel 'tau'") != std::string::npos);
    CHECK(gnuplot_script("x", {"a.csv"}, 1, 2, "z", "v").find("logscale") == std::string::npos);
}
