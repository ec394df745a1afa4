#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvlab/errors.hpp"
#include "curvlab/flow.hpp"
#include "curvlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace curvlab;

TEST_CASE("Hermite basis is orthonormal") {
    for (double a : {0.32, 1.0, 2.5}) {
        const HermiteBasis b = build_basis(a, 20, 60);
        CHECK(b.orthogonality_error <= 1e-10);
        CHECK(b.eigen_identity_error <= 1e-8);
        double w = 0.0;
        for (double x : b.weights) w += x;
        CHECK(w == doctest::Approx(2.0 * std::sqrt(std::numbers::pi * a)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(build_basis(-1.0, 4, 20), DomainViolation);
    CHECK_THROWS_AS(build_basis(1.0, 10, 15), DomainViolation);
}

TEST_CASE("eigenvalue signs from exact arithmetic") {
    for (int n = 2; n <= 6; ++n)
        for (int k = 0; k <= 8; ++k)
            for (int l = 0; l <= 6; ++l) {
                // mu (2(n-1)) = 2(n-1) - k(n-1) - l(l+n-2), all integers.
                const int num = 2 * (n - 1) - k * (n - 1) - l * (l + n - 2);
                const int expected = (num > 0) - (num < 0);
                CHECK(mode_sign(k, l, n) == expected);
                CHECK(mode_eigenvalue(k, l, n) == doctest::Approx(num / (2.0 * (n - 1))));
            }
    // l = 0: k = 0, 1 unstable, k = 2 neutral, the rest stable.
    CHECK(mode_sign(1, 0, 3) == 1);
    CHECK(mode_sign(2, 0, 3) == 0);
    CHECK(mode_sign(3, 0, 3) == -1);
    CHECK(eigenvalue_table(3, 2, 4).size() == 12);
}

TEST_CASE("projection round trip on polynomials") {
    const double a = 0.32;
    const int K = 12;
    const HermiteBasis b = build_basis(a, K, 40);
    for (int deg = 0; deg <= K - 2; ++deg) {
        const auto u = [&](double z) { return std::pow(z / 3.0, deg) - 0.5 * z; };
        const SpectralDecomposition d = decompose(b, u, 3);
        for (double z : {-2.0, -0.3, 0.0, 1.1, 2.7}) CHECK(std::abs(d.reconstruct(b, z) - u(z)) <= 1e-10);
        CHECK(d.tail_sq <= 1e-10 * std::max(1.0, d.norm_sq));
        CHECK_FALSE(d.truncation_warning);
    }
}

TEST_CASE("z^2/a - 2 lies entirely in the neutral space") {
    for (int n : {3, 5}) {
        const double a = 0.7;
        const HermiteBasis b = build_basis(a, 12, 40);
        const SpectralDecomposition d = decompose(b, [&](double z) { return z * z / a - 2.0; }, n);
        CHECK(d.zero_sq == doctest::Approx(d.norm_sq).epsilon(1e-12));
        CHECK(d.plus_sq <= 1e-20 * d.norm_sq);
        CHECK(d.minus_sq <= 1e-12 * d.norm_sq);
    }
}

TEST_CASE("coefficients are stable under a doubled quadrature order") {
    const double a = 1.0;
    const auto u = [](double z) { return std::exp(-0.1 * z * z) * std::cos(z); };
    const SpectralDecomposition d1 = decompose(build_basis(a, 10, 40), u, 3);
    const SpectralDecomposition d2 = decompose(build_basis(a, 10, 80), u, 3);
    for (std::size_t k = 0; k < d1.coeffs.size(); ++k) CHECK(std::abs(d1.coeffs[k] - d2.coeffs[k]) <= 1e-12);
}

TEST_CASE("the drift Laplacian is diagonal in the basis") {
    const double a = 0.32;
    const HermiteBasis b = build_basis(a, 12, 60);
    for (int k = 0; k <= 12; ++k) {
        const double mu = mode_eigenvalue(k, 0, 3);
        for (int j = 0; j <= 12; ++j) {
            double ip = 0.0;
            for (std::size_t i = 0; i < b.nodes.size(); ++i) {
                double f, fz, fzz;
                b.phi_derivatives(k, b.nodes[i], f, fz, fzz);
                const double Lf = a * fzz - 0.5 * b.nodes[i] * fz + f;
                ip += b.weights[i] * Lf * b.values[static_cast<std::size_t>(j)][i];
            }
            const double expected = j == k ? mu : 0.0;
            CHECK(std::abs(ip - expected) <= 1e-8 * std::max(std::abs(mu), 1.0));
        }
    }
}

TEST_CASE("cutoff function") {
    CHECK(cutoff_chi(0.0) == 1.0);
    CHECK(cutoff_chi(0.5) == 1.0);
    CHECK(cutoff_chi(-0.4) == 1.0);
    CHECK(cutoff_chi(1.0) == 0.0);
    CHECK(cutoff_chi(-3.0) == 0.0);
    for (int i = 0; i <= 200; ++i) {
        const double s = -1.2 + 2.4 * i / 200.0;
        CHECK(cutoff_chi(s) == doctest::Approx(cutoff_chi(-s)));
        const double d = (cutoff_chi(s + 1e-7) - cutoff_chi(s - 1e-7)) / 2e-7;
        CHECK(s * d <= 1e-9);
    }
    // C^3 joins at 1/2 and 1: the jump of the third difference across a join
    // shrinks linearly with the step.
    for (double s0 : {0.5, 1.0}) {
        const auto jump = [&](double h) {
            const auto d3 = [&](double s) {
                return (cutoff_chi(s + 2 * h) - 3 * cutoff_chi(s + h) + 3 * cutoff_chi(s) - cutoff_chi(s - h)) /
                       (h * h * h);
            };
            return std::abs(d3(s0 + 2 * h) - d3(s0 - 2 * h));
        };
        CHECK(jump(5e-4) < 0.6 * jump(1e-3));
        CHECK(jump(2.5e-4) < 0.6 * jump(5e-4));
    }
}

TEST_CASE("classifier on constructed sequences") {
    const std::size_t J = 12;
    std::vector<double> e1(J), e2(J), inv(J);
    for (std::size_t j = 0; j < J; ++j) {
        e1[j] = std::exp(-static_cast<double>(j));
        e2[j] = std::exp(-2.0 * static_cast<double>(j));
        inv[j] = 1.0 / std::pow(1.0 + static_cast<double>(j), 2);
    }
    const auto pos = merle_zaag_classifier(gamma_trace_from_sequences(e1, e2, e2));
    CHECK(pos.verdict == Dominance::PositiveDominated);
    CHECK(pos.slope_positive == doctest::Approx(-1.0).epsilon(0.01));
    CHECK(pos.windows_used == J / 2);

    const auto neu = merle_zaag_classifier(gamma_trace_from_sequences(e1, inv, e1));
    CHECK(neu.verdict == Dominance::NeutralDominated);

    const std::vector<double> ones(J, 1.0);
    CHECK(merle_zaag_classifier(gamma_trace_from_sequences(ones, ones, ones)).verdict == Dominance::Inconclusive);

    const std::vector<double> short_seq(7, 1.0), zeros(7, 0.0);
    const auto few = merle_zaag_classifier(gamma_trace_from_sequences(short_seq, zeros, zeros));
    CHECK(few.verdict == Dominance::Inconclusive);
    CHECK(few.windows_used == 0);

    const auto tr = gamma_trace_from_sequences(e1, e2, e2);
    CHECK(tr.plus_window_factor == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(tr.equivalence_C == doctest::Approx(1.0));
    CHECK_THROWS_AS(gamma_trace_from_sequences(e1, e2, short_seq), DomainViolation);
    CHECK(to_string(Dominance::NeutralDominated) == "neutral-dominated");
}

TEST_CASE("a k = 1 seed gives the plus factor e^-1 per window") {
    const auto s = SpeedFunction::sum(3);
    const double a = s.a_lin();
    const ModeRun r = run_mode_seed(s, 1, 1e-6, 10.0, 10.0, 0.1, 20);
    const GammaTrace tr = gamma_trace_from_run(r.history, build_basis(a, 12, 40), cylinder_radius(s), 3);
    CHECK(tr.windows() == 10);
    CHECK(tr.plus_window_factor == doctest::Approx(std::exp(-1.0)).epsilon(0.02));
    const DominanceVerdict v = merle_zaag_classifier(tr);
    CHECK(v.verdict == Dominance::PositiveDominated);

    FlowHistory tiny;
    CHECK_THROWS_AS(gamma_trace_from_run(tiny, build_basis(a, 4, 10), 2.0, 3), WindowTooShort);
}
