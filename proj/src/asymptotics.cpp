#include "curvlab/asymptotics.hpp"

#include "curvlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace curvlab {

BowlExpansionFit fit_bowl_expansion(const BowlProfile& bowl, double lo, double hi) {
    if (!(hi >= 10.0 * lo && 10.0 * lo >= 100.0)) {
        std::ostringstream os;
        os << "window [" << lo << ", " << hi << "] needs hi >= 10 lo >= 100";
        throw WindowTooNarrow(os.str());
    }
    if (hi > bowl.rho_max * (1.0 + 1e-12)) throw WindowTooNarrow("window extends past the solved bowl");
    const SpeedFunction& s = bowl.speed;
    const double k = 1.0 / (2.0 * s.F01());
    BowlExpansionFit out;
    const int N = 40;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < N; ++i) {
        const double r = lo * std::pow(hi / lo, static_cast<double>(i) / (N - 1));
        const double xi = bowl.zeta_rho_at(r) - k * r;
        out.rho.push_back(r);
        out.rho_xi.push_back(r * xi);
        num += r * r * r * xi;
        den += r * r;
    }
    out.c2 = num / den;
    double res = 0.0;
    for (double v : out.rho_xi) res = std::max(res, std::abs(v - out.c2));

    auto& f = out.fit;
    f.model = "zeta_rho - rho/(2F(0,1)) = c2/rho";
    f.window_lo = lo;
    f.window_hi = hi;
    f.coefficients = {k, out.c2};
    f.residual = res / std::abs(out.c2);
    f.residual_ok = f.residual <= 0.01;
    f.target = -2.0 * s.a_lin();
    f.relative_error = std::abs(out.c2 - f.target) / std::abs(f.target);

    const double p = bowl.zeta_rho_at(hi);
    out.vartheta = p / hi;
    out.vartheta_target = k;
    out.xi = p - k * hi;
    out.lambda = hi * out.xi;
    out.lambda_target = f.target;
    return out;
}

std::size_t lower_bound_violations(const ShrinkerProfile& p) {
    // Every node, the tip included: both sides vanish there and the comparison
    // needs no division.
    std::size_t viol = 0;
    const double F01 = p.speed.F01();
    for (std::size_t i = 0; i < p.z.size(); ++i) {
        const double lhs = p.v[i] * p.v[i];
        const double rhs = 2.0 * F01 * (1.0 - p.z[i] * p.z[i] / (p.a * p.a));
        if (lhs < rhs) ++viol;
    }
    return viol;
}

ShrinkerNeckFit fit_shrinker_neck(const std::vector<ShrinkerProfile>& profiles, double L) {
    if (profiles.size() < 4) throw WindowTooNarrow("fit_shrinker_neck: need at least four values of a");
    std::vector<const ShrinkerProfile*> ps;
    for (const auto& p : profiles) ps.push_back(&p);
    std::sort(ps.begin(), ps.end(), [](const ShrinkerProfile* x, const ShrinkerProfile* y) { return x->a < y->a; });
    if (ps.back()->a < 8.0 * ps.front()->a) throw WindowTooNarrow("fit_shrinker_neck: a-sweep must span a factor 8");

    ShrinkerNeckFit out;
    out.lower_bound_ok = true;
    for (const auto* p : ps) {
        const std::size_t viol = lower_bound_violations(*p);
        const auto ub = shrinker_upper_bound_check(*p, std::min(L, std::nextafter(p->a, 0.0)));
        out.rows.push_back({p->a, viol, ub.C_fit, ub.binding_z});
        if (viol != 0) out.lower_bound_ok = false;
    }
    const std::size_t m = out.rows.size();
    double cmin = out.rows[m - 1].C_fit, cmax = cmin;
    for (std::size_t i = m - 3; i < m; ++i) {
        cmin = std::min(cmin, out.rows[i].C_fit);
        cmax = std::max(cmax, out.rows[i].C_fit);
    }
    out.spread_top3 = cmin > 0.0 ? cmax / cmin : 0.0;
    out.bounded = cmin > 0.0 && out.spread_top3 <= 2.0;

    auto& f = out.fit;
    f.model = "v^2 <= 2F(0,1)(1 - (1 - C log a / a^2)(z^2 - C) / a^2)";
    f.window_lo = ps.front()->L0;
    f.window_hi = L;
    for (const auto& r : out.rows) f.coefficients.push_back(r.C_fit);
    f.residual = out.spread_top3;
    f.residual_ok = out.bounded;
    return out;
}

DecayFit measure_rescaled_decay(const FlowHistory& run, double sigma, double L, double min_range) {
    if (run.t.size() < 2 || run.t.back() - run.t.front() < min_range) {
        std::ostringstream os;
        os << "tau range " << (run.t.empty() ? 0.0 : run.t.back() - run.t.front()) << " shorter than " << min_range;
        throw WindowTooShort(os.str());
    }
    DecayFit out;
    bool all_zero = true;
    for (std::size_t k = 0; k < run.t.size(); ++k) {
        double m = 0.0;
        for (std::size_t i = 0; i < run.u[k].size(); ++i) {
            const double z = run.x0 + run.dx * static_cast<double>(i);
            if (std::abs(z) <= L) m = std::max(m, std::abs(run.u[k][i] - sigma));
        }
        if (m > 0.0) {
            all_zero = false;
            out.tau.push_back(run.t[k]);
            out.log_sup.push_back(std::log(m));
        }
    }
    if (all_zero) {
        out.fixed_point = true;
        return out;
    }
    if (out.tau.size() < 2) throw WindowTooShort("too few nonzero snapshots");
    const double n = static_cast<double>(out.tau.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < out.tau.size(); ++i) {
        sx += out.tau[i];
        sy += out.log_sup[i];
        sxx += out.tau[i] * out.tau[i];
        sxy += out.tau[i] * out.log_sup[i];
    }
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - out.slope * sx) / n;
    double rss = 0.0;
    for (std::size_t i = 0; i < out.tau.size(); ++i) {
        const double d = out.log_sup[i] - (icpt + out.slope * out.tau[i]);
        rss += d * d;
    }
    out.residual = std::sqrt(rss / n);
    return out;
}

}  // namespace curvlab
