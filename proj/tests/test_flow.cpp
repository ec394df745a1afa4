#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvlab/errors.hpp"
#include "curvlab/flow.hpp"
#include "curvlab/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace curvlab;

namespace {

ReferenceFn shrinking_cylinder(const SpeedFunction& s, double r0) {
    const double F01 = s.F01();
    return [=](double, double t) { return std::sqrt(r0 * r0 - 2.0 * F01 * t); };
}

}  // namespace

TEST_CASE("string conversions") {
    CHECK(representation_from_string(to_string(Representation::Vertical)) == Representation::Vertical);
    CHECK(time_scheme_from_string(to_string(TimeScheme::SemiImplicit)) == TimeScheme::SemiImplicit);
    CHECK(boundary_mode_from_string(to_string(BoundaryMode::Extrapolate)) == BoundaryMode::Extrapolate);
    CHECK_THROWS_AS(time_scheme_from_string("leapfrog"), ConfigError);
}

TEST_CASE("shrinking cylinder converges at second order") {
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3)}) {
        CAPTURE(s.name());
        const CylinderRegression c = cylinder_regression(s, 2.0, 5.0, 0.25, 0.2, 3);
        REQUIRE(c.max_error.size() == 3);
        REQUIRE(c.ratios.size() == 2);
        CHECK(c.r_exact == doctest::Approx(std::sqrt(4.0 - 0.5 * s.F01())));
        for (double q : c.ratios) CHECK(q > 3.0);
        CHECK(c.max_error.back() < 1e-6);
    }
    CHECK_THROWS_AS(cylinder_regression(SpeedFunction::sum(3), 1.0, 5.0, 1.0, 0.2, 2), DomainViolation);
}

TEST_CASE("comparison principle for ordered radial data") {
    const auto s = SpeedFunction::bh(3);
    FlowOptions fo;
    fo.scheme = TimeScheme::SemiImplicit;
    fo.reference = shrinking_cylinder(s, 2.0);
    const FlowSolver solver(s, fo);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> amp(-0.05, 0.05), gap(0.01, 0.1);
    const double half = 5.0;
    std::size_t violations = 0;
    for (int pair = 0; pair < 50; ++pair) {
        double c[4];
        for (double& v : c) v = amp(rng);
        const double d = gap(rng);
        const auto mode = [&](int k, double z) { return std::sin(k * std::numbers::pi * (z + half) / (2.0 * half)); };
        const auto lower = [&](double z) {
            double u = 2.0;
            for (int k = 0; k < 4; ++k) u += c[k] * mode(k + 1, z);
            return u;
        };
        const auto upper = [&](double z) { return lower(z) + d * mode(1, z); };
        FlowState lo = make_state(Representation::Radial, -half, half, 100, lower);
        FlowState hi = make_state(Representation::Radial, -half, half, 100, upper);
        REQUIRE(lo.u.front() == doctest::Approx(hi.u.front()));
        REQUIRE(lo.u.back() == doctest::Approx(hi.u.back()));
        lo = solver.advance(lo, 0.2, 0.01);
        hi = solver.advance(hi, 0.2, 0.01);
        CHECK(lo.u.front() == doctest::Approx(hi.u.front()));
        for (std::size_t i = 1; i + 1 < lo.size(); ++i)
            if (!(hi.u[i] > lo.u[i])) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("heat barrier solves the heat equation") {
    // psi_t = psi_zz by differences on a grid in [0.1, 10]^2.
    const double h = 1e-4;
    double worst = 0.0;
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) {
            const double z = 0.1 * std::pow(100.0, i / 11.0), t = 0.1 * std::pow(100.0, j / 11.0);
            const double pt = (heat_barrier_psi(z, t + h) - heat_barrier_psi(z, t - h)) / (2.0 * h);
            const double pzz =
                (heat_barrier_psi(z + h, t) - 2.0 * heat_barrier_psi(z, t) + heat_barrier_psi(z - h, t)) / (h * h);
            worst = std::max(worst, std::abs(pt - pzz));
            // Concave in z; both vanish to rounding once erf saturates.
            CHECK(pzz <= 0.0);
            if (z < 2.0 * std::sqrt(t)) CHECK(pzz < 0.0);
            const double psi = heat_barrier_psi(z, t);
            CHECK(psi > 0.0);
            CHECK(psi <= 1.0);
        }
    CHECK(worst <= 1e-6);
    CHECK_THROWS_AS(heat_barrier_psi(0.0, 1.0), DomainViolation);
    CHECK_THROWS_AS(heat_barrier_psi(1.0, -1.0), DomainViolation);
}

TEST_CASE("the shrinker is stationary for the rescaled flow at second order") {
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3)}) {
        CAPTURE(s.name());
        const ShrinkerProfile p = solve_shrinker(s, 50.0);
        const double lo = p.L0 + 1.0, hi = 0.5 * p.a;
        std::vector<double> res;
        for (double dx : {0.2, 0.1, 0.05}) {
            const auto n = static_cast<std::size_t>(std::llround((hi - lo) / dx));
            const FlowState st =
                make_state(Representation::Rescaled, lo, hi, n, [&](double z) { return p.rho_of_z(z) / p.a; });
            res.push_back(stationarity_residual(s, st));
        }
        CHECK(res[0] / res[1] >= 3.0);
        CHECK(res[1] / res[2] >= 3.0);
        CHECK(res[2] < 1e-6);
    }
}

TEST_CASE("explicit steps above the stability limit are rejected") {
    const auto s = SpeedFunction::sum(3);
    FlowOptions fo;
    fo.reference = shrinking_cylinder(s, 2.0);
    const FlowSolver solver(s, fo);
    const FlowState st = make_state(Representation::Radial, -5.0, 5.0, 100, [](double) { return 2.0; });
    const double lim = solver.max_stable_dt(st);
    CHECK(lim > 0.0);
    CHECK_NOTHROW(solver.step(st, lim));
    CHECK_THROWS_AS(solver.step(st, 2.0 * lim), StabilityViolation);
    CHECK_THROWS_AS(solver.step(st, 0.0), DomainViolation);

    FlowOptions semi = fo;
    semi.scheme = TimeScheme::SemiImplicit;
    CHECK_NOTHROW(FlowSolver(s, semi).step(st, 10.0 * lim));
}

TEST_CASE("a vanishing radius raises Pinch") {
    const auto s = SpeedFunction::sum(3);
    FlowOptions fo;
    fo.boundary = BoundaryMode::Extrapolate;
    fo.r_min = 0.05;
    const FlowSolver solver(s, fo);
    const FlowState st = make_state(Representation::Radial, -1.0, 1.0, 40, [](double) { return 0.5; });
    CHECK_THROWS_AS(solver.advance(st, 1.0), Pinch);
}

TEST_CASE("construction and representation errors") {
    const auto s = SpeedFunction::sum(3);
    CHECK_THROWS_AS(FlowSolver(s, FlowOptions{}), ConfigError);
    FlowOptions bad;
    bad.boundary = BoundaryMode::Extrapolate;
    bad.cfl_safety = 1.5;
    CHECK_THROWS_AS(FlowSolver(s, bad), ConfigError);
    CHECK_THROWS_AS(make_state(Representation::Radial, 0.0, 1.0, 2, [](double) { return 1.0; }), DomainViolation);
    CHECK_THROWS_AS(make_state(Representation::Vertical, 1.0, 2.0, 10, [](double) { return 1.0; }), DomainViolation);
    FlowOptions ex;
    ex.boundary = BoundaryMode::Extrapolate;
    const FlowSolver solver(s, ex);
    const FlowState st = make_state(Representation::Radial, -1.0, 1.0, 10, [](double) { return 1.0; });
    CHECK_THROWS_AS(step_rescaled(solver, st, 1e-4), DomainViolation);
}

TEST_CASE("cylinder extinction times are consistent") {
    const auto s = SpeedFunction::bh(3);
    FlowOptions fo;
    fo.reference = shrinking_cylinder(s, 2.0);
    const FlowSolver solver(s, fo);
    FlowState st = make_state(Representation::Radial, -5.0, 5.0, 50, [](double) { return 2.0; });
    FlowHistory h;
    st = solver.advance(st, 1.0, 0.0, &h, 10);
    REQUIRE(h.t.size() >= 3);
    const ExtinctionReport r = extinction_check(h, s, 1e-3);
    CAPTURE(r.min_margin);
    CHECK(r.ok);
    // Discrete radii carry the O(dt^2 + dx^2) error of the scheme.
    const double T = 4.0 / (2.0 * s.F01());
    for (double Ti : r.T) CHECK(Ti == doctest::Approx(T).epsilon(1e-3));
}

TEST_CASE("k = 1 mode grows at rate 1/2") {
    const auto s = SpeedFunction::sum(3);
    const double sa = std::sqrt(s.a_lin());
    const ModeRun r = run_mode_seed(s, 1, 1e-4, 1.0, 10.0 * sa, 0.1 * sa);
    CHECK(r.expected_rate == doctest::Approx(0.5));
    CHECK(r.measured_rate == doctest::Approx(0.5).epsilon(0.05));
    CHECK_THROWS_AS(run_mode_seed(s, -1, 1e-4, 1.0, 10.0, 0.1), DomainViolation);
}

TEST_CASE("linearization at the cylinder") {
    const LinearizationReport r = linearize_rescaled_at_cylinder(SpeedFunction::bh(3), 0.1, 8.0, 5, 3);
    CHECK(r.pass);
    CHECK(r.max_rel_deviation <= r.tolerance);
    CHECK(cylinder_radius(SpeedFunction::sum(3)) == doctest::Approx(2.0));
}

TEST_CASE("short bowl translation moves at speed 1/2") {
    const TranslationRun r = bowl_translation(SpeedFunction::sum(3), 5.0, 15.0, 0.1, 0.2);
    CHECK(r.speed_measured == doctest::Approx(0.5).epsilon(0.01));
    CHECK(r.max_profile_error < 1e-3);
}
