#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvlab/errors.hpp"
#include "curvlab/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace curvlab;

TEST_CASE("bowl tip curvature is 1 / (2 gamma(1, ..., 1))") {
    for (const auto& s : {SpeedFunction::sum(2), SpeedFunction::bh(4), SpeedFunction::sigma_ratio(5, 3)}) {
        CAPTURE(s.name());
        const BowlProfile b = solve_bowl(s, 1.0);
        const double target = 1.0 / (2.0 * s.F11());
        CHECK(std::abs(b.tip_curvature - target) <= 1e-6 * target);
    }
}

TEST_CASE("bowl profile: residual, convexity, bounds and inversion") {
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3)}) {
        CAPTURE(s.name());
        const BowlProfile b = solve_bowl(s, 50.0);
        CHECK(b.residual_ok);
        CHECK(b.max_residual <= b.options.residual_tol);
        CHECK(b.min_margin_U > 0.0);
        REQUIRE(b.rho.size() > 10);
        CHECK(b.rho.front() == 0.0);
        CHECK(b.zeta.front() == 0.0);
        for (std::size_t i = 1; i < b.rho.size(); ++i) {
            CHECK(b.zeta_rho[i] > 0.0);
            CHECK(b.zeta_rhorho[i] > 0.0);
            CHECK(b.zeta_rho[i] >= b.rho[i] / b.C_bound * (1.0 - 1e-12));
            CHECK(b.zeta_rho[i] <= b.C_bound * b.rho[i] * (1.0 + 1e-12));
        }
        for (double r : {0.5, 3.0, 17.0, 42.0}) {
            CHECK(b.radius_at_height(b.zeta_at(r)) == doctest::Approx(r).epsilon(1e-9));
            const double h = 1e-4;
            CHECK(b.zeta_rho_at(r) ==
                  doctest::Approx((b.zeta_at(r + h) - b.zeta_at(r - h)) / (2.0 * h)).epsilon(1e-6));
            CHECK(b.zeta_rhorho[0] > 0.0);
        }
        // Far out the slope approaches rho / (2 F(0,1)).
        CHECK(b.zeta_rho.back() / b.rho.back() == doctest::Approx(1.0 / (2.0 * s.F01())).epsilon(0.02));
    }
}

TEST_CASE("bowl translator equation at the nodes") {
    const auto s = SpeedFunction::bh(3);
    const BowlProfile b = solve_bowl(s, 20.0);
    for (std::size_t i = 1; i < b.rho.size(); i += 7) {
        const double rhs = bowl_rhs(s, b.rho[i], b.zeta_rho[i]);
        CHECK(std::abs(b.zeta_rhorho[i] - rhs) <= 1e-6 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("solve_bowl_to_height reaches the height") {
    const BowlProfile b = solve_bowl_to_height(SpeedFunction::sum(3), 300.0);
    CHECK(b.zeta.back() > 300.0);
    CHECK(b.residual_ok);
}

TEST_CASE("shrinker invariants") {
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3)}) {
        CAPTURE(s.name());
        const ShrinkerProfile p = solve_shrinker(s, 40.0);
        CHECK(p.residual_ok);
        CHECK(p.monitor_identity_error <= 1e-8);
        CHECK(p.max_inversion_error <= 1e-10);
        CHECK(p.lambda_bound_ok);

        REQUIRE(p.cauchy_diffs.size() >= 2);
        CHECK(p.cauchy_diffs.back() <= p.options.cauchy_tol);
        CHECK(p.cauchy_diffs.back() < p.cauchy_diffs.front());
        for (std::size_t i = 1; i < p.cauchy_diffs.size(); ++i) CHECK(p.cauchy_diffs[i] < p.cauchy_diffs[i - 1]);

        const double F01 = s.F01();
        REQUIRE(p.z.size() == p.v.size());
        for (std::size_t i = 0; i < p.z.size(); ++i) {
            CHECK(p.w[i] > 2.0);
            const double lower = 2.0 * F01 * (1.0 - p.z[i] * p.z[i] / (p.a * p.a));
            CHECK(p.v[i] * p.v[i] >= lower * (1.0 - 1e-12));
        }
        for (std::size_t i = 0; i < p.z.size(); i += 50) {
            CHECK(p.a - p.psi_at(p.z_rho[i]) / p.a == doctest::Approx(p.z[i]).epsilon(1e-10));
            CHECK(p.rho_of_z(p.z[i]) == doctest::Approx(p.z_rho[i]).epsilon(1e-9));
        }
        CHECK(p.tip_curvature > 0.0);
    }
}

TEST_CASE("w diagnostic: w > 2 and the tip limit") {
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3)}) {
        CAPTURE(s.name());
        const ShrinkerProfile p = solve_shrinker(s, 50.0);
        const WDiagnostic d = shrinker_w_diagnostic(p);
        CHECK(d.w_gt_2);
        CHECK(d.min_w_minus_2 > 0.0);
        CHECK(d.tip_target == doctest::Approx(2.0 * s.F11() / s.F01()));
        CHECK(std::abs(d.tip_limit - d.tip_target) <= 1e-6 * d.tip_target);
    }
}

TEST_CASE("shrinker domain errors") {
    CHECK_THROWS_AS(solve_shrinker(SpeedFunction::sum(3), -1.0), DomainViolation);
    ShrinkerOptions o;
    o.k_first = 10;
    o.k_last = 5;
    CHECK_THROWS_AS(solve_shrinker(SpeedFunction::sum(3), 20.0, o), DomainViolation);
    CHECK_THROWS_AS(solve_bowl(SpeedFunction::sum(3), -2.0), DomainViolation);
    ShrinkerOptions low;
    low.theta = 0.2;   // below F(1,1)/Q = 1/3
    CHECK_THROWS_AS(solve_shrinker(SpeedFunction::bh(3), 20.0, low), DomainViolation);
}

TEST_CASE("shrinker approaches the bowl as a grows") {
    const auto rows = shrinker_to_bowl_convergence(SpeedFunction::sum(3), {20.0, 40.0, 80.0}, 10.0);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].gap < rows[0].gap);
    CHECK(rows[2].gap < rows[1].gap);
    CHECK(rows[2].gap / rows[0].gap < 0.1);
}

TEST_CASE("neck constants") {
    const auto s = SpeedFunction::sum(3);
    const double c = measure_c(s);
    CHECK(c == doctest::Approx(1.0));
    CHECK(neck_K(s, c) == doctest::Approx(17.0));
}
