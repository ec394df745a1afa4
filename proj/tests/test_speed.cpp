#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvlab/errors.hpp"
#include "curvlab/speed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace curvlab;

namespace {

std::vector<SpeedFunction> all_speeds() {
    return {SpeedFunction::sum(2),          SpeedFunction::sum(3),          SpeedFunction::sum(5),
            SpeedFunction::bh(3),           SpeedFunction::bh(4),           SpeedFunction::sigma_ratio(3, 1),
            SpeedFunction::sigma_ratio(3, 2), SpeedFunction::sigma_ratio(4, 2), SpeedFunction::sigma_ratio(5, 3)};
}

// Interior point: the shifted vector lambda - 0.05 |lambda| (1, ..., 1) is still in the cone.
std::vector<double> interior_sample(const SpeedFunction& s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 3.0);
    for (;;) {
        std::vector<double> l(static_cast<std::size_t>(s.n()));
        for (auto& v : l) v = d(rng);
        const double norm = std::sqrt(std::inner_product(l.begin(), l.end(), l.begin(), 0.0));
        auto shifted = l;
        for (auto& v : shifted) v -= 0.05 * norm;
        if (s.in_cone(shifted)) return l;
    }
}

}  // namespace

TEST_CASE("restriction constants of the built-in speeds") {
    const auto sum3 = SpeedFunction::sum(3);
    CHECK(sum3.F01() == doctest::Approx(2.0));
    CHECK(sum3.F11() == doctest::Approx(3.0));
    CHECK(sum3.a_lin() == doctest::Approx(1.0));
    CHECK(std::isinf(sum3.Q()));

    // gamma = 1 / sum_{i<j} 1/(l_i + l_j).
    const auto bh3 = SpeedFunction::bh(3);
    CHECK(bh3.F01() == doctest::Approx(0.4));
    CHECK(bh3.F11() == doctest::Approx(2.0 / 3.0));
    CHECK(bh3.a_lin() == doctest::Approx(0.32));
    CHECK(bh3.Q() == doctest::Approx(2.0).epsilon(1e-9));

    // sigma_2 / sigma_1 restricted: (1 + 2x) / (2 + x).
    const auto s32 = SpeedFunction::sigma_ratio(3, 2);
    CHECK(s32.F01() == doctest::Approx(0.5));
    CHECK(s32.F11() == doctest::Approx(1.0));
    CHECK(s32.Q() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(s32.cone_slope() == doctest::Approx(0.5));
}

TEST_CASE("invalid kind and dimension pairs are rejected") {
    CHECK_THROWS_AS(SpeedFunction::bh(2), DomainViolation);
    CHECK_THROWS_AS(SpeedFunction::sum(1), DomainViolation);
    CHECK_THROWS_AS(SpeedFunction::sigma_ratio(3, 3), DomainViolation);
    CHECK_THROWS_AS(SpeedFunction::sigma_ratio(3, 0), DomainViolation);
    CHECK_THROWS_AS(speed_kind_from_string("harmonic"), ConfigError);
    CHECK(speed_kind_from_string("brendle_huisken") == SpeedKind::BrendleHuisken);
}

TEST_CASE("cone membership") {
    const auto bh = SpeedFunction::bh(3);
    const std::vector<double> inside{-0.5, 1.0, 1.0}, outside{-1.5, 1.0, 1.0}, wrong_size{1.0, 1.0};
    CHECK(bh.in_cone(inside));
    CHECK_FALSE(bh.in_cone(outside));
    CHECK_FALSE(bh.in_cone(wrong_size));
    CHECK_THROWS_AS(bh(outside), ConeViolation);
    CHECK_THROWS_AS(bh.gradient(outside), ConeViolation);
    CHECK_THROWS_AS(bh.F(-2.0, 1.0), ConeViolation);

    const auto s = SpeedFunction::sigma_ratio(3, 2);
    const std::vector<double> in2{-0.3, 1.0, 1.0}, out2{-0.6, 1.0, 1.0};
    CHECK(s.in_cone(in2));
    CHECK_FALSE(s.in_cone(out2));
}

TEST_CASE("homogeneity, symmetry and agreement with the restriction") {
    std::mt19937_64 rng(11);
    for (const auto& s : all_speeds()) {
        CAPTURE(s.name());
        for (int it = 0; it < 100; ++it) {
            const auto l = interior_sample(s, rng);
            const double g = s(l);
            for (double t : {0.5, 2.0, 10.0}) {
                auto tl = l;
                for (auto& v : tl) v *= t;
                CHECK(std::abs(s(tl) - t * g) <= 1e-12 * s(tl));
            }
            auto p = l;
            std::sort(p.begin(), p.end());
            do {
                CHECK(std::abs(s(p) - g) <= 1e-12 * g);
            } while (s.n() <= 4 && std::next_permutation(p.begin(), p.end()));
        }
        const std::vector<double> diag = [&] {
            std::vector<double> v(static_cast<std::size_t>(s.n()), 0.7);
            v[0] = 0.2;
            return v;
        }();
        CHECK(s(diag) == doctest::Approx(s.F(0.2, 0.7)).epsilon(1e-14));
    }
}

TEST_CASE("monotonicity and the gradient against central differences") {
    std::mt19937_64 rng(12);
    for (const auto& s : all_speeds()) {
        CAPTURE(s.name());
        for (int it = 0; it < 100; ++it) {
            const auto l = interior_sample(s, rng);
            const auto g = s.gradient(l);
            const double gmax = *std::max_element(g.begin(), g.end());
            for (std::size_t i = 0; i < l.size(); ++i) {
                CHECK(g[i] > 0.0);
                const double h = 1e-6 * (1.0 + std::abs(l[i]));
                auto p = l, m = l;
                p[i] += h;
                m[i] -= h;
                CHECK(std::abs((s(p) - s(m)) / (2.0 * h) - g[i]) <= 1e-6 * gmax);
            }
        }
        // Restriction partials against the full gradient.
        std::vector<double> v(static_cast<std::size_t>(s.n()), 1.3);
        v[0] = 0.4;
        const auto g = s.gradient(v);
        CHECK(s.F_x(0.4, 1.3) == doctest::Approx(g[0]).epsilon(1e-12));
        CHECK(s.F_y(0.4, 1.3) == doctest::Approx(std::accumulate(g.begin() + 1, g.end(), 0.0)).epsilon(1e-12));
    }
}

TEST_CASE("inverse consistency on U") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& s : all_speeds()) {
        CAPTURE(s.name());
        const double top = std::isfinite(s.Q()) ? s.Q() : 50.0 * s.F01();
        for (int it = 0; it < 100; ++it) {
            const double y = 0.1 + 9.9 * u(rng);
            const double z = y * (s.F01() + (top - s.F01()) * (0.01 + 0.98 * u(rng)));
            const double x = s.invert_f(y, z);
            CHECK(x >= 0.0);
            CHECK(std::abs(s.F(x, y) - z) <= 1e-12 * z);
            const double t = 0.1 + 9.9 * u(rng);
            CHECK(std::abs(s.invert_f(t * y, t * z) - t * x) <= 1e-10 * std::max(1.0, t * x));
            // Partials of f from implicit differentiation against differences.
            const double h = 1e-6 * z;
            const double fz = (s.invert_f(y, z + h) - s.invert_f(y, z - h)) / (2.0 * h);
            CHECK(s.f_z(y, z) == doctest::Approx(fz).epsilon(1e-5));
        }
    }
}

TEST_CASE("the inverse rejects points outside U") {
    const auto bh = SpeedFunction::bh(3);
    CHECK_THROWS_AS(bh.invert_f(1.0, 0.3), DomainViolation);   // below F(0,1)
    CHECK_THROWS_AS(bh.invert_f(1.0, 2.5), DomainViolation);   // above Q
    CHECK_THROWS_AS(bh.invert_f(-1.0, 1.0), DomainViolation);
    // The extended inverse allows negative x inside the cone.
    const double x = bh.solve_restriction(1.0, 0.2);
    CHECK(x < 0.0);
    CHECK(bh.F(x, 1.0) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("concavity on random pairs, equality for the linear speed") {
    std::mt19937_64 rng(14);
    for (const auto& s : all_speeds()) {
        CAPTURE(s.name());
        for (int it = 0; it < 100; ++it) {
            const auto l = interior_sample(s, rng), m = interior_sample(s, rng);
            std::vector<double> mid(l.size());
            for (std::size_t i = 0; i < l.size(); ++i) mid[i] = 0.5 * (l[i] + m[i]);
            const double lhs = s(mid), rhs = 0.5 * (s(l) + s(m));
            const double slack = 1e-12 * (std::abs(lhs) + std::abs(rhs));
            CHECK(lhs >= rhs - slack);
            if (s.linear()) CHECK(std::abs(lhs - rhs) <= slack);
        }
    }
}

TEST_CASE("elementary symmetric polynomials") {
    const std::vector<double> l{1.0, 2.0, 3.0};
    CHECK(elementary_symmetric(l, 0) == 1.0);
    CHECK(elementary_symmetric(l, 1) == 6.0);
    CHECK(elementary_symmetric(l, 2) == 11.0);
    CHECK(elementary_symmetric(l, 3) == 6.0);
}
