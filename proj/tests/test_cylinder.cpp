#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvlab/cylinder.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace curvlab;

namespace {

Jet bump(double z) {
    const double e = 0.01 * std::exp(-z * z);
    return {e, -2.0 * z * e, (4.0 * z * z - 2.0) * e};
}

}  // namespace

TEST_CASE("constant graphs: exact errors of the curvature expansion") {
    for (double c : {0.01, 0.1, -0.2}) {
        const double r = 2.0;
        const CylinderGraph g = make_cylinder_graph(r, 3, -1.0, 1.0, 10, [&](double) { return Jet{c, 0.0, 0.0}; });
        const ExpansionReport e = expansion_error_A(g);
        CHECK(e.sup_error == doctest::Approx(c * c / (r * r * (r + c))).epsilon(1e-12));
        CHECK(e.sup_error_covariant <= 1e-15);
        CHECK(g.kappa_axial(3) == 0.0);
        CHECK(g.kappa_rot(3) == doctest::Approx(1.0 / (r + c)));
    }
}

TEST_CASE("expansion errors are quadratic in the graph") {
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3), SpeedFunction::sigma_ratio(4, 2)}) {
        CAPTURE(s.name());
        const ScalingStudy st = expansion_scaling(s, 2.0, bump, -4.0, 4.0, 800, 5);
        REQUIRE(st.rows_A.size() == 6);
        CHECK(st.max_change_A < 0.2);
        CHECK(st.max_change_G < 0.2);
        for (std::size_t h = 1; h < st.rows_G.size(); ++h)
            CHECK(st.rows_G[h].sup_error / st.rows_G[h - 1].sup_error == doctest::Approx(0.25).epsilon(0.2));
    }
}

TEST_CASE("trace of gamma-dot against a graph Hessian") {
    const double r = 2.0;
    const auto f = [](double z) { return Jet{std::sin(z), std::cos(z), -std::sin(z)}; };

    const auto s_lin = SpeedFunction::sum(3);
    const CylinderGraph g = make_cylinder_graph(r, 3, -3.0, 3.0, 120, bump);
    const auto S = graph_hessian(g, f);
    const TraceReport lin = trace_gamma(g, s_lin, S);
    CHECK(lin.sup_error <= 1e-15);
    CHECK(lin.ratio <= 1e-12);

    // Nonlinear speed: the error is bounded by the smallness of the graph.
    const auto bh = SpeedFunction::bh(3);
    const TraceReport t1 = trace_gamma(g, bh, S);
    const CylinderGraph g2 = scaled(g, bump, 0.5);
    const TraceReport t2 = trace_gamma(g2, bh, graph_hessian(g2, f));
    CHECK(t1.sup_error > 0.0);
    CHECK(t2.sup_error < 0.6 * t1.sup_error);
    CHECK(t1.ratio < 10.0);

    // On the exact cylinder the Hessian of z is zero.
    const CylinderGraph flat = make_cylinder_graph(r, 3, -1.0, 1.0, 10, [](double) { return Jet{}; });
    for (const auto& h : graph_hessian(flat, [](double z) { return Jet{z, 1.0, 0.0}; })) {
        CHECK(h.axial == 0.0);
        CHECK(h.rot == 0.0);
    }
}

TEST_CASE("graph construction errors") {
    CHECK_THROWS_AS(make_cylinder_graph(-1.0, 3, 0.0, 1.0, 4, bump), DomainViolation);
    CHECK_THROWS_AS(make_cylinder_graph(1.0, 1, 0.0, 1.0, 4, bump), DomainViolation);
    CHECK_THROWS_AS(make_cylinder_graph(1.0, 3, 1.0, 0.0, 4, bump), DomainViolation);
    CHECK_THROWS_AS(make_cylinder_graph(1.0, 3, 0.0, 1.0, 4, [](double) { return Jet{-2.0, 0.0, 0.0}; }),
                    DomainViolation);
    const CylinderGraph g = make_cylinder_graph(1.0, 3, 0.0, 1.0, 4, bump);
    CHECK_THROWS_AS(expansion_error_G(g, SpeedFunction::sum(4)), DomainViolation);
    CHECK_THROWS_AS(trace_gamma(g, SpeedFunction::sum(3), {}), DomainViolation);
    const CylinderGraph bent =
        make_cylinder_graph(1.0, 3, 0.0, 1.0, 4, [](double) { return Jet{0.0, 0.0, 50.0}; });
    CHECK_THROWS_AS(expansion_error_G(bent, SpeedFunction::bh(3)), ConeViolation);
}

TEST_CASE("exact curvatures reproduce the shrinker equation") {
    // F(kappa) sqrt(1 + v_z^2) = (v - z v_z) / 2 on the z-representation.
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3)}) {
        CAPTURE(s.name());
        const ShrinkerProfile p = solve_shrinker(s, 40.0);
        CylinderGraph g;
        g.r = 1.0;
        g.n = 3;
        for (std::size_t i = 0; i < p.z.size(); i += 5) {
            g.z.push_back(p.z[i]);
            g.jet.push_back({p.v[i] - 1.0, p.v_z[i], p.v_zz[i]});
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < g.z.size(); ++i) {
            const Jet& j = g.jet[i];
            const double lhs = s.F(g.kappa_axial(i), g.kappa_rot(i)) * std::sqrt(1.0 + j.u_z * j.u_z);
            const double rhs = 0.5 * (j.u + 1.0 - g.z[i] * j.u_z);
            worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
        }
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("exact curvatures reproduce the translator equation") {
    // The bowl as a graph rho(zeta) over the axis translates at speed 1/2.
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3)}) {
        CAPTURE(s.name());
        const BowlProfile b = solve_bowl(s, 30.0);
        CylinderGraph g;
        g.r = 1.0;
        g.n = 3;
        std::vector<double> slope;
        for (std::size_t i = 1; i < b.rho.size(); i += 3) {
            const double zr = b.zeta_rho[i];
            g.z.push_back(b.zeta[i]);
            g.jet.push_back({b.rho[i] - 1.0, 1.0 / zr, -b.zeta_rhorho[i] / (zr * zr * zr)});
            slope.push_back(zr);
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < g.z.size(); ++i) {
            const double target = 0.5 / std::sqrt(1.0 + slope[i] * slope[i]);
            worst = std::max(worst, std::abs(s.F(g.kappa_axial(i), g.kappa_rot(i)) - target) / target);
        }
        CHECK(worst <= 1e-8);
    }
}
