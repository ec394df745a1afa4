#include "curvlab/acceptance.hpp"

#include "curvlab/asymptotics.hpp"
#include "curvlab/cylinder.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/flow.hpp"
#include "curvlab/soliton.hpp"
#include "curvlab/spectral.hpp"
#include "curvlab/speed.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace curvlab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Independent closed forms of gamma for the built-in speeds; used as oracles.
double gamma_direct(SpeedKind kind, int k, const std::vector<double>& l) {
    const std::size_t n = l.size();
    switch (kind) {
        case SpeedKind::Sum:
            return std::accumulate(l.begin(), l.end(), 0.0);
        case SpeedKind::BrendleHuisken: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) s += 1.0 / (l[i] + l[j]);
            return 1.0 / s;
        }
        case SpeedKind::SigmaRatio: {
            // Brute-force subset sums.
            double num = 0.0, den = 0.0;
            for (unsigned mask = 0; mask < (1u << n); ++mask) {
                const int bits = std::popcount(mask);
                if (bits != k && bits != k - 1) continue;
                double p = 1.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (mask & (1u << i)) p *= l[i];
                (bits == k ? num : den) += p;
            }
            return num / den;
        }
    }
    return 0.0;
}

double gamma_ones(const SpeedFunction& s) {
    return gamma_direct(s.kind(), s.spec().k, std::vector<double>(static_cast<std::size_t>(s.n()), 1.0));
}

// Central difference of gamma in the first entry at (0, 1, ..., 1).
double gamma_dot1_fd(const SpeedFunction& s, double h) {
    std::vector<double> p(static_cast<std::size_t>(s.n()), 1.0), m = p;
    p[0] = h;
    m[0] = -h;
    return (gamma_direct(s.kind(), s.spec().k, p) - gamma_direct(s.kind(), s.spec().k, m)) / (2.0 * h);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

struct Outcome {
    bool pass = false;
    double measured = 0.0, target = 0.0, tolerance = 0.0;
    std::string detail;
    double timed = -1.0;   // seconds of the timed portion when not the whole call
};

class Context {
public:
    std::shared_ptr<const ShrinkerProfile> shrinker(const SpeedFunction& s, double a) {
        const auto key = std::make_pair(s.name(), a);
        auto it = cache_.find(key);
        if (it == cache_.end())
            it = cache_.emplace(key, std::make_shared<const ShrinkerProfile>(solve_shrinker(s, a))).first;
        return it->second;
    }
    std::vector<std::shared_ptr<const ShrinkerProfile>> all_shrinkers() const {
        std::vector<std::shared_ptr<const ShrinkerProfile>> out;
        for (const auto& [k, v] : cache_) out.push_back(v);
        return out;
    }

private:
    std::map<std::pair<std::string, double>, std::shared_ptr<const ShrinkerProfile>> cache_;
};

const std::vector<SpeedFunction>& shrinker_speeds() {
    static const std::vector<SpeedFunction> v{SpeedFunction::sum(3), SpeedFunction::bh(3)};
    return v;
}

Outcome c1_tip_curvature(Context&) {
    Outcome o;
    o.tolerance = 1e-6;
    double worst = 0.0;
    for (int n : {3, 4}) {
        for (const auto& s : {SpeedFunction::sum(n), SpeedFunction::bh(n), SpeedFunction::sigma_ratio(n, 2)}) {
            const BowlProfile b = solve_bowl(s, 1.0);
            const double target = 1.0 / (2.0 * gamma_ones(s));
            const double rel = std::abs(b.tip_curvature - target) / target;
            worst = std::max(worst, rel);
            o.detail += s.name() + " " + fmt(b.tip_curvature) + " vs " + fmt(target) + "; ";
        }
    }
    o.measured = worst;
    o.pass = worst <= o.tolerance;
    return o;
}

Outcome c2_bowl_expansion(Context&) {
    Outcome o;
    o.tolerance = 0.05;
    double worst = 0.0;
    bool residuals = true;
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::sum(2), SpeedFunction::bh(3)}) {
        const BowlProfile b = solve_bowl(s, 1000.0);
        const BowlExpansionFit f = fit_bowl_expansion(b, 100.0, 1000.0);
        const double target = -2.0 * gamma_dot1_fd(s, 1e-6);
        const double rel = std::abs(f.c2 - target) / std::abs(target);
        worst = std::max(worst, rel);
        residuals = residuals && f.fit.residual_ok;
        o.detail += s.name() + " c2=" + fmt(f.c2) + " target=" + fmt(target) + " residual=" + fmt(f.fit.residual) + "; ";
    }
    o.measured = worst;
    o.pass = worst <= o.tolerance && residuals;
    return o;
}

Outcome c3_lower_bound(Context& ctx) {
    Outcome o;
    o.tolerance = 0.0;
    double slowest = 0.0;
    std::size_t total = 0;
    for (const auto& s : shrinker_speeds()) {
        for (double a : {25.0, 50.0, 100.0}) {
            const auto t0 = Clock::now();
            const auto p = ctx.shrinker(s, a);
            const std::size_t v = lower_bound_violations(*p);
            slowest = std::max(slowest, seconds_since(t0));
            total += v;
            o.detail += s.name() + " a=" + fmt(a) + " violations=" + std::to_string(v) + " nodes=" +
                        std::to_string(p->z.size()) + "; ";
        }
    }
    o.measured = static_cast<double>(total);
    o.pass = total == 0;
    o.timed = slowest;
    return o;
}

Outcome c4_neck_quantity(Context& ctx) {
    // Solves are shared with the other shrinker checks and are not timed here.
    for (const auto& s : shrinker_speeds())
        for (double a : {20.0, 25.0, 40.0, 50.0, 80.0, 100.0}) ctx.shrinker(s, a);
    const auto t0 = Clock::now();
    Outcome o;
    o.tolerance = 0.02;
    bool all_gt_2 = true;
    double worst = 0.0, min_gap = std::numeric_limits<double>::infinity();
    for (const auto& p : ctx.all_shrinkers()) {
        const WDiagnostic d = shrinker_w_diagnostic(*p);
        std::vector<double> l01(static_cast<std::size_t>(p->speed.n()), 1.0);
        l01[0] = 0.0;
        const double target = 2.0 * gamma_ones(p->speed) / gamma_direct(p->speed.kind(), p->speed.spec().k, l01);
        all_gt_2 = all_gt_2 && d.w_gt_2;
        min_gap = std::min(min_gap, d.min_w_minus_2);
        worst = std::max(worst, std::abs(d.tip_limit - target) / target);
        o.target = target;
    }
    o.measured = worst;
    o.detail = "min(w - 2)=" + fmt(min_gap) + " over " + std::to_string(ctx.all_shrinkers().size()) + " profiles";
    o.pass = all_gt_2 && worst <= o.tolerance;
    o.timed = seconds_since(t0);
    return o;
}

Outcome c5_shrinker_to_bowl(Context&) {
    Outcome o;
    o.target = 0.25;
    double worst = 0.0;
    bool ok = true;
    for (const auto& s : shrinker_speeds()) {
        const auto rows = shrinker_to_bowl_convergence(s, {20.0, 40.0, 80.0}, 10.0);
        const bool monotone = rows[1].gap < rows[0].gap && rows[2].gap < rows[1].gap;
        const double ratio = rows[2].gap / rows[0].gap;
        ok = ok && monotone && ratio < 0.25;
        worst = std::max(worst, ratio);
        o.detail += s.name() + " gaps " + fmt(rows[0].gap) + ", " + fmt(rows[1].gap) + ", " + fmt(rows[2].gap) + "; ";
    }
    o.measured = worst;
    o.pass = ok;
    return o;
}

Outcome c6_cylinder(Context&) {
    Outcome o;
    o.target = 0.0;
    o.tolerance = 1e-6;
    bool ok = true;
    double worst = 0.0;
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3)}) {
        const CylinderRegression c = cylinder_regression(s, 2.0, 5.0, 0.25, 0.1, 4);
        const double finest = c.max_error.back();
        const double min_ratio = *std::min_element(c.ratios.begin(), c.ratios.end());
        ok = ok && finest <= 1e-6 && min_ratio >= 3.5;
        worst = std::max(worst, finest);
        o.detail += s.name() + " finest=" + fmt(finest) + " min ratio=" + fmt(min_ratio) + "; ";
    }
    o.measured = worst;
    o.pass = ok;
    return o;
}

Outcome c7_translation(Context&) {
    Outcome o;
    o.target = 0.5;
    o.tolerance = 1e-3;
    double worst = 0.0;
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3)}) {
        const TranslationRun r = bowl_translation(s, 5.0, 25.0, 0.05, 1.0);
        worst = std::max(worst, std::abs(r.speed_measured - 0.5));
        o.detail += s.name() + " speed=" + fmt(r.speed_measured) + "; ";
    }
    o.measured = 0.5 + worst;
    o.pass = worst <= o.tolerance;
    return o;
}

Outcome c8_spectral(Context&) {
    Outcome o;
    bool table_ok = true;
    for (int n = 2; n <= 6; ++n)
        for (int k = 0; k <= 6; ++k)
            for (int l = 0; l <= 6; ++l) {
                // Exact rational sign: mu = (2(n-1) - k(n-1) - l(l+n-2)) / (2(n-1)).
                const long num = 2L * (n - 1) - static_cast<long>(k) * (n - 1) - static_cast<long>(l) * (l + n - 2);
                const int expect = (num > 0) - (num < 0);
                const bool in_plus = (k == 0 && l == 0) || (k == 1 && l == 0) || (k == 0 && l == 1);
                const bool in_zero = (k == 2 && l == 0) || (k == 1 && l == 1);
                const int set_sign = in_plus ? 1 : in_zero ? 0 : -1;
                if (mode_sign(k, l, n) != expect || expect != set_sign) table_ok = false;
                const double mu = mode_eigenvalue(k, l, n);
                if (std::abs(mu - static_cast<double>(num) / (2.0 * (n - 1))) > 1e-14) table_ok = false;
            }

    double action = 0.0, ortho = 0.0;
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3), SpeedFunction::sigma_ratio(4, 2)}) {
        const double a = s.a_lin();
        const double half = 10.0 * std::sqrt(a), dx = 0.05 * std::sqrt(a);
        const auto u = [a](double z) { return z * z / a - 2.0; };
        const int N = static_cast<int>(std::lround(2.0 * half / dx));
        for (int i = 1; i < N; ++i) {
            const double z = -half + dx * i;
            const double um = u(z - dx), u0 = u(z), up = u(z + dx);
            const double Lu = a * (up - 2.0 * u0 + um) / (dx * dx) - 0.5 * z * (up - um) / (2.0 * dx) + u0;
            action = std::max(action, std::abs(Lu));
        }
        const HermiteBasis b = build_basis(a, 20, 60);
        ortho = std::max(ortho, b.orthogonality_error);
    }
    o.measured = std::max(action / 1e-8, ortho / 1e-10);
    o.target = 0.0;
    o.tolerance = 1.0;
    o.detail = std::string("sign table ") + (table_ok ? "exact" : "MISMATCH") + "; L action " + fmt(action) +
               " (tol 1e-8); orthogonality " + fmt(ortho) + " (tol 1e-10); measured is the worst tol fraction";
    o.pass = table_ok && action <= 1e-8 && ortho <= 1e-10;
    return o;
}

Outcome c9_linearization(Context&) {
    Outcome o;
    const double dx = 0.05;
    o.tolerance = std::max(1e-4, 10.0 * dx * dx);
    double worst = 0.0;
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3), SpeedFunction::sigma_ratio(4, 2)}) {
        const LinearizationReport r = linearize_rescaled_at_cylinder(s, dx, 10.0, 20, 7);
        worst = std::max(worst, r.max_rel_deviation);
        o.detail += s.name() + " " + fmt(r.max_rel_deviation) + "; ";
    }
    o.measured = worst;
    o.pass = worst <= o.tolerance;
    return o;
}

Outcome c10_mode_rates(Context&) {
    Outcome o;
    o.tolerance = 0.05;
    double worst = 0.0;
    bool drift_ok = true;
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3)}) {
        const double sa = std::sqrt(s.a_lin());
        for (int k = 0; k <= 3; ++k) {
            const ModeRun r = run_mode_seed(s, k, 1e-4, 1.0, 10.0 * sa, 0.05 * sa);
            const double growth = r.amplitude_end / r.amplitude_start;
            const double rel = std::abs(growth / std::exp(1.0 - 0.5 * k) - 1.0);
            worst = std::max(worst, rel);
            if (k == 2 && !(r.drift < 1e-5)) drift_ok = false;
            o.detail += s.name() + " k=" + std::to_string(k) + " rate=" + fmt(r.measured_rate) +
                        (k == 2 ? " drift=" + fmt(r.drift) : std::string()) + "; ";
        }
    }
    o.measured = worst;
    o.pass = worst <= o.tolerance && drift_ok;
    return o;
}

Outcome c11_heat_barrier(Context&) {
    Outcome o;
    o.tolerance = 1e-6;
    struct Probe {
        double z, t, limit;
        const char* name;
    };
    const Probe probes[] = {{1e-8, 1.0, 0.0, "z->0"},
                            {100.0, 1.0, 1.0, "z->inf"},
                            {1.0, 1e-6, 1.0, "t->0"},
                            {1.0, 1e14, 0.0, "t->inf"}};
    double worst = 0.0;
    for (const auto& p : probes) {
        const double d = std::abs(heat_barrier_psi(p.z, p.t) - p.limit);
        worst = std::max(worst, d);
        o.detail += std::string(p.name) + " " + fmt(d) + "; ";
    }
    const double z = 2.0, t = 1.0;
    const auto integrand = [&](double y) {
        return (std::exp(-(z - y) * (z - y) / (4.0 * t)) - std::exp(-(z + y) * (z + y) / (4.0 * t))) /
               std::sqrt(4.0 * std::numbers::pi * t);
    };
    const double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-14);
    const double qd = std::abs(heat_barrier_psi(z, t) - oracle);
    o.detail += "psi(2,1)=" + fmt(heat_barrier_psi(z, t)) + " quadrature diff " + fmt(qd) + " (tol 1e-8)";
    o.measured = worst;
    o.pass = worst <= o.tolerance && qd <= 1e-8;
    return o;
}

struct SuiteStats {
    std::size_t failures = 0;
    double worst_homogeneity = 0.0, worst_gradient = 0.0, worst_inverse = 0.0, worst_scaling = 0.0;
};

void speed_suite(const SpeedFunction& s, std::mt19937_64& rng, SuiteStats& st) {
    const auto n = static_cast<std::size_t>(s.n());
    std::uniform_real_distribution<double> ent(-1.0, 3.0), unit(0.0, 1.0);
    // Interior sample: lambda - delta |lambda| (1, ..., 1) stays in the cone.
    const auto sample = [&] {
        for (;;) {
            std::vector<double> l(n);
            for (auto& v : l) v = ent(rng);
            double norm = 0.0;
            for (double v : l) norm += v * v;
            std::vector<double> shifted = l;
            for (auto& v : shifted) v -= 0.05 * std::sqrt(norm);
            if (s.in_cone(shifted)) return l;
        }
    };
    for (int it = 0; it < 100; ++it) {
        const std::vector<double> l = sample();
        const double g = s(l);
        // Homogeneity.
        for (double t : {0.5, 2.0, 10.0}) {
            std::vector<double> tl = l;
            for (auto& v : tl) v *= t;
            const double gt = s(tl);
            const double e = std::abs(gt - t * g) / gt;
            st.worst_homogeneity = std::max(st.worst_homogeneity, e);
            if (e > 1e-12) ++st.failures;
        }
        // Agreement with the independent closed form.
        if (std::abs(gamma_direct(s.kind(), s.spec().k, l) - g) > 1e-12 * g) ++st.failures;
        // Symmetry, exhaustive over permutations.
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        do {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i) p[i] = l[idx[i]];
            if (std::abs(s(p) - g) > 1e-12 * g) ++st.failures;
        } while (std::next_permutation(idx.begin(), idx.end()));
        // Monotonicity and the gradient against central differences.
        const auto grad = s.gradient(l);
        const double gmax = *std::max_element(grad.begin(), grad.end());
        for (std::size_t i = 0; i < n; ++i) {
            if (!(grad[i] > 0.0)) ++st.failures;
            const double h = 1e-6 * (1.0 + std::abs(l[i]));
            std::vector<double> p = l, m = l;
            p[i] += h;
            m[i] -= h;
            const double fd = (s(p) - s(m)) / (2.0 * h);
            const double e = std::abs(fd - grad[i]) / gmax;
            st.worst_gradient = std::max(st.worst_gradient, e);
            if (e > 1e-6) ++st.failures;
        }
        // Concavity on pairs (equality for the linear speed).
        const std::vector<double> m2 = sample();
        std::vector<double> mid(n);
        for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (l[i] + m2[i]);
        const double lhs = s(mid), rhs = 0.5 * (g + s(m2));
        const double slack = 1e-12 * (std::abs(lhs) + std::abs(rhs));
        if (lhs < rhs - slack) ++st.failures;
        if (s.linear() && std::abs(lhs - rhs) > slack) ++st.failures;
    }
    // Inverse consistency on U.
    const double F01 = s.F01();
    const double top = std::isfinite(s.Q()) ? s.Q() : 50.0 * F01;
    for (int it = 0; it < 100; ++it) {
        const double y = 0.1 + 9.9 * unit(rng);
        const double ratio = F01 + (top - F01) * (0.02 + 0.96 * unit(rng));
        const double z = ratio * y;
        const double x = s.invert_f(y, z);
        const double e1 = std::abs(s.F(x, y) - z) / z;
        const double t = 0.1 + 9.9 * unit(rng);
        const double xt = s.invert_f(t * y, t * z);
        const double e2 = std::abs(xt - t * x) / std::max(1.0, std::abs(t * x));
        st.worst_inverse = std::max({st.worst_inverse, e1, e2});
        if (e1 > 1e-12 || e2 > 1e-10) ++st.failures;
    }
}

Outcome c12_properties(Context&) {
    Outcome o;
    SuiteStats st;
    std::mt19937_64 rng(7);
    for (const auto& s : {SpeedFunction::sum(2), SpeedFunction::sum(3), SpeedFunction::sum(4), SpeedFunction::bh(3),
                          SpeedFunction::bh(4), SpeedFunction::sigma_ratio(3, 2), SpeedFunction::sigma_ratio(4, 2),
                          SpeedFunction::sigma_ratio(5, 3)})
        speed_suite(s, rng, st);

    const auto bump = [](double z) {
        const double e = std::exp(-z * z);
        return Jet{0.01 * e, -0.02 * z * e, 0.01 * (4.0 * z * z - 2.0) * e};
    };
    for (const auto& s : {SpeedFunction::sum(3), SpeedFunction::bh(3), SpeedFunction::sigma_ratio(4, 2)}) {
        const ScalingStudy sc = expansion_scaling(s, 2.0, bump, -4.0, 4.0, 800, 5);
        st.worst_scaling = std::max({st.worst_scaling, sc.max_change_A, sc.max_change_G});
    }
    o.tolerance = 0.2;
    o.measured = st.worst_scaling;
    o.detail = "speed property failures=" + std::to_string(st.failures) + " homogeneity " +
               fmt(st.worst_homogeneity) + " gradient " + fmt(st.worst_gradient) + " inverse " +
               fmt(st.worst_inverse) + "; scaling change " +
               fmt(st.worst_scaling) + " (tol 0.2)";
    o.pass = st.failures == 0 && st.worst_scaling < 0.2;
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double time_limit;
    std::function<Outcome(Context&)> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list{
        {1, "bowl tip curvature", 1.0, c1_tip_curvature},
        {2, "bowl far-field expansion", 10.0, c2_bowl_expansion},
        {3, "shrinker lower bound", 30.0, c3_lower_bound},
        {4, "neck quantity w", 5.0, c4_neck_quantity},
        {5, "shrinker to bowl", 60.0, c5_shrinker_to_bowl},
        {6, "cylinder regression", 30.0, c6_cylinder},
        {7, "bowl translation", 60.0, c7_translation},
        {8, "spectral identities", 5.0, c8_spectral},
        {9, "linearization at the cylinder", 10.0, c9_linearization},
        {10, "mode rates", 60.0, c10_mode_rates},
        {11, "heat barrier", 1.0, c11_heat_barrier},
        {12, "property suites", 30.0, c12_properties},
    };
    return list;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const std::vector<int>& only, std::ostream* log) {
    Context ctx;
    std::vector<CriterionResult> out;
    for (const auto& c : criteria()) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        if (log) *log << "running criterion " << c.id << " (" << c.name << ")" << std::endl;
        CriterionResult r;
        r.id = c.id;
        r.name = c.name;
        r.time_limit = c.time_limit;
        const auto t0 = Clock::now();
        try {
            const Outcome o = c.run(ctx);
            r.seconds = o.timed >= 0.0 ? o.timed : seconds_since(t0);
            r.numeric_pass = o.pass;
            r.measured = o.measured;
            r.target = o.target;
            r.tolerance = o.tolerance;
            r.detail = o.detail;
        } catch (const Error& e) {
            r.seconds = seconds_since(t0);
            r.error = std::string(e.kind()) + ": " + e.what();
        } catch (const std::exception& e) {
            r.seconds = seconds_since(t0);
            r.error = e.what();
        }
        r.runtime_pass = r.seconds <= r.time_limit;
        r.pass = r.numeric_pass && r.runtime_pass && r.error.empty();
        out.push_back(std::move(r));
    }
    return out;
}

std::string format_result_line(const CriterionResult& r) {
    std::ostringstream os;
    os.precision(6);
    os << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << ": measured=" << r.measured
       << " target=" << r.target << " tol=" << r.tolerance << " (" << r.seconds << " s / " << r.time_limit << " s)";
    if (!r.runtime_pass) os << " runtime exceeded";
    if (!r.error.empty()) os << " error: " << r.error;
    if (!r.detail.empty()) os << " | " << r.detail;
    return os.str();
}

}  // namespace curvlab
