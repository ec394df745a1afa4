#include "curvlab/soliton.hpp"

#include "curvlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace curvlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// theta(rho) = p/rho is even in rho; one Richardson step removes the rho^2 term.
template <class Slope>
double extrapolate_tip(Slope&& slope_over_rho, double r1) {
    const double t1 = slope_over_rho(r1);
    const double t2 = slope_over_rho(2.0 * r1);
    return (4.0 * t1 - t2) / 3.0;
}

double shrinker_rhs(const SpeedFunction& s, double a, double rho, double psi, double p) {
    const double y = p / rho;
    const double z = 0.5 + (rho * p - psi) / (2.0 * a * a);
    return (1.0 + p * p) * s.solve_restriction(y, z);
}

}  // namespace

double bowl_rhs(const SpeedFunction& speed, double rho, double p) {
    return (1.0 + p * p) * speed.solve_restriction(p / rho, 0.5);
}

BowlProfile solve_bowl(const SpeedFunction& speed, double rho_max, const BowlOptions& opt) {
    if (!(rho_max > 0.0)) throw DomainViolation("solve_bowl: rho_max must be positive");
    if (!(opt.rho_start > 0.0) || opt.rho_start >= rho_max)
        throw DomainViolation("solve_bowl: rho_start must lie in (0, rho_max)");
    const double F11 = speed.F11();
    const double rs = opt.rho_start;

    OdeOptions oo;
    oo.rtol = opt.tol;
    oo.atol = opt.atol;
    oo.h_initial = rs * 1e-2;
    const auto rhs = [&](double r, const OdeState<2>& s) -> OdeState<2> {
        return {s[1], bowl_rhs(speed, r, s[1])};
    };
    const OdeState<2> y0{rs * rs / (4.0 * F11), rs / (2.0 * F11)};

    BowlProfile b(speed);
    b.options = opt;
    b.rho_max = rho_max;
    b.trajectory = integrate_dopri<2>(rhs, rs, y0, rho_max, oo);
    const auto& tr = b.trajectory;

    const double r1 = std::min(1e-2, rho_max / 4.0);
    b.tip_curvature = r1 > 4.0 * rs
        ? extrapolate_tip([&](double r) { return tr(r)[1] / r; }, r1)
        : 1.0 / (2.0 * F11);

    b.rho.reserve(tr.size() + 1);
    b.rho.push_back(0.0);
    b.zeta.push_back(0.0);
    b.zeta_rho.push_back(0.0);
    b.zeta_rhorho.push_back(b.tip_curvature);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        b.rho.push_back(tr.t[i]);
        b.zeta.push_back(tr.y[i][0]);
        b.zeta_rho.push_back(tr.y[i][1]);
        b.zeta_rhorho.push_back(tr.dy[i][1]);
    }
    b.error_estimate = tr.error_sum;

    double C = 1.0, res = 0.0, margin = kInf;
    for (std::size_t i = 1; i < b.rho.size(); ++i) {
        const double r = b.rho[i], p = b.zeta_rho[i];
        C = std::max({C, p / r, r / p});
        margin = std::min(margin, (0.5 * r / p) / speed.F01() - 1.0);
    }
    for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
        const double rm = 0.5 * (tr.t[i] + tr.t[i + 1]);
        const double f = bowl_rhs(speed, rm, tr(rm)[1]);
        res = std::max(res, std::abs(tr.derivative(rm)[1] - f) / (1.0 + std::abs(f)));
    }
    b.C_bound = C;
    b.max_residual = res;
    b.residual_ok = res <= opt.residual_tol;
    b.min_margin_U = margin;
    return b;
}

BowlProfile solve_bowl_to_height(const SpeedFunction& speed, double height, const BowlOptions& opt) {
    // zeta grows like rho^2 / (4 F(0,1)); start from that guess and double.
    double rho_max = std::max(4.0, 1.1 * std::sqrt(4.0 * speed.F01() * std::max(height, 0.0)));
    BowlProfile bowl = solve_bowl(speed, rho_max, opt);
    while (bowl.trajectory.y.back()[0] <= height) {
        rho_max *= 2.0;
        bowl = solve_bowl(speed, rho_max, opt);
    }
    return bowl;
}

double BowlProfile::zeta_at(double r) const {
    if (r < 0.0 || r > rho_max * (1.0 + 1e-12)) throw DomainViolation("bowl profile evaluated outside its range");
    if (r <= trajectory.t_front()) return 0.5 * tip_curvature * r * r;
    return trajectory(std::min(r, rho_max))[0];
}

double BowlProfile::zeta_rho_at(double r) const {
    if (r < 0.0 || r > rho_max * (1.0 + 1e-12)) throw DomainViolation("bowl profile evaluated outside its range");
    if (r <= trajectory.t_front()) return tip_curvature * r;
    return trajectory(std::min(r, rho_max))[1];
}

double BowlProfile::radius_at_height(double h) const {
    if (h < 0.0) throw DomainViolation("bowl height must be nonnegative");
    const auto& tr = trajectory;
    if (h <= tr.y.front()[0]) return std::sqrt(2.0 * h / tip_curvature);
    if (h > tr.y.back()[0]) throw DomainViolation("bowl height beyond the solved range");
    auto it = std::lower_bound(tr.y.begin(), tr.y.end(), h,
                               [](const OdeState<2>& s, double v) { return s[0] < v; });
    const std::size_t j = static_cast<std::size_t>(it - tr.y.begin());
    double lo = tr.t[j - 1], hi = tr.t[j];
    double r = 0.5 * (lo + hi);
    for (int k = 0; k < 100; ++k) {
        const auto s = tr(r);
        const double g = s[0] - h;
        if (g > 0) hi = r; else lo = r;
        if (std::abs(g) <= 1e-15 * (1.0 + h)) break;
        double rn = r - g / s[1];
        if (!(rn > lo && rn < hi)) rn = 0.5 * (lo + hi);
        if (std::abs(rn - r) < 1e-16 * (1.0 + r)) break;
        r = rn;
    }
    return r;
}

double measure_c(const SpeedFunction& speed) {
    double m = speed.F_x(0.0, 1.0);
    for (int i = 0; i <= 560; ++i) {
        const double t = std::pow(10.0, -6.0 + i * 0.025);
        m = std::max(m, speed.F_x(t, 1.0));
    }
    return 1.0 / m;
}

double neck_K(const SpeedFunction& speed, double c) {
    return std::max({1.0, 6.0 * speed.F01(), 17.0 / c});
}

double ShrinkerProfile::psi_at(double r) const {
    if (r <= trajectory.t_front()) return 0.5 * tip_curvature * r * r;
    if (r > rho_end) throw DomainViolation("shrinker profile evaluated beyond its range");
    return trajectory(r)[0];
}

double ShrinkerProfile::psi_rho_at(double r) const {
    if (r <= trajectory.t_front()) return tip_curvature * r;
    if (r > rho_end) throw DomainViolation("shrinker profile evaluated beyond its range");
    return trajectory(r)[1];
}

double ShrinkerProfile::rho_of_z(double zq) const {
    const double target = a * (a - zq);
    if (target < 0.0) throw DomainViolation("z above the shrinker tip");
    const auto& tr = trajectory;
    if (target <= tr.y.front()[0]) return std::sqrt(2.0 * target / tip_curvature);
    if (target > tr.y.back()[0] * (1.0 + 1e-14))
        throw DomainViolation("z below the solved range of the shrinker");
    auto it = std::lower_bound(tr.y.begin(), tr.y.end(), target,
                               [](const OdeState<2>& s, double v) { return s[0] < v; });
    std::size_t j = static_cast<std::size_t>(it - tr.y.begin());
    if (j == 0) j = 1;
    if (j >= tr.size()) j = tr.size() - 1;
    double lo = tr.t[j - 1], hi = tr.t[j];
    double r = 0.5 * (lo + hi);
    for (int k = 0; k < 200; ++k) {
        const auto s = tr(r);
        const double g = s[0] - target;
        if (g > 0) hi = r; else lo = r;
        if (std::abs(g) <= 2e-16 * (1.0 + target)) break;
        double rn = r - g / s[1];
        if (!(rn > lo && rn < hi)) rn = 0.5 * (lo + hi);
        if (std::abs(rn - r) < 1e-16 * (1.0 + r)) break;
        r = rn;
    }
    return r;
}

double ShrinkerProfile::w_at_rho(double r) const {
    const double F01 = speed.F01();
    double psi, ratio;
    if (r <= trajectory.t_front()) {
        psi = 0.5 * tip_curvature * r * r;
        ratio = 1.0 / tip_curvature;
    } else {
        const auto s = trajectory(r);
        psi = s[0];
        ratio = r / s[1];
    }
    return (1.0 - psi / (a * a)) / (F01 - r * r / (2.0 * a * a)) * ratio;
}

ShrinkerProfile solve_shrinker(const SpeedFunction& speed, double a, const ShrinkerOptions& opt) {
    const double F01 = speed.F01(), F11 = speed.F11(), Q = speed.Q();
    const double theta = opt.theta;
    if (!(theta > F11 / Q && theta < 1.0)) {
        std::ostringstream os;
        os << "solve_shrinker: theta = " << theta << " outside (F(1,1)/Q, 1) = (" << F11 / Q << ", 1)";
        throw DomainViolation(os.str());
    }
    const double Theta = opt.Theta > 0.0 ? opt.Theta : 2.0 * F11 / F01;
    if (!(Theta > F11 / F01)) throw DomainViolation("solve_shrinker: Theta must exceed F(1,1)/F(0,1)");
    if (opt.k_last < opt.k_first) throw DomainViolation("solve_shrinker: empty rho_k schedule");

    ShrinkerProfile p(speed);
    p.options = opt;
    p.a = a;
    p.theta = theta;
    p.Theta = Theta;
    p.c = measure_c(speed);
    p.K = neck_K(speed, p.c);
    p.L0 = std::sqrt(p.K) + 1.0;
    if (!(a > p.L0 + 1.0)) {
        std::ostringstream os;
        os << "solve_shrinker: a = " << a << " leaves no room above L0 = " << p.L0;
        throw DomainViolation(os.str());
    }
    p.z_stop = 0.5 * std::sqrt(p.K);
    const double psi_stop = a * (a - p.z_stop);
    const double rho_cap = std::sqrt(2.0 * F01) * a;
    const double upper_window2 = 2.0 * a * a * (F01 - F11 / Theta);

    OdeOptions oo;
    oo.rtol = opt.tol;
    oo.atol = opt.atol;
    const auto rhs = [&](double r, const OdeState<2>& s) -> OdeState<2> {
        return {s[1], shrinker_rhs(speed, a, r, s[0], s[1])};
    };
    const std::function<double(double, const OdeState<2>&)> event = [&](double, const OdeState<2>& s) {
        return s[0] - psi_stop;
    };

    DenseTrajectory<2> prev;
    double prev_start = 0.0;
    bool have_prev = false, converged = false;
    for (int k = opt.k_first; k <= opt.k_last; ++k) {
        const double rk = std::ldexp(1.0, -k);
        const OdeState<2> y0{theta * rk * rk / (4.0 * F11), theta * rk / (2.0 * F11)};
        oo.h_initial = rk * 1e-2;
        auto tr = integrate_dopri<2>(rhs, rk, y0, rho_cap, oo, event);
        if (!tr.event_hit) {
            std::ostringstream os;
            os << "solve_shrinker: a = " << a << " integration from rho_k = " << rk
               << " did not reach z = " << p.z_stop;
            throw NonConvergence(os.str());
        }
        // Barrier sandwich w <= psi^k <= W.
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const double r = tr.t[i], psi = tr.y[i][0];
            const double wl = theta * r * r / (4.0 * F11);
            if (psi < wl * (1.0 - 1e-9) - 1e-300) {
                std::ostringstream os;
                os << "lower barrier crossed at rho = " << r << " (psi = " << psi << ", w = " << wl << ")";
                throw BarrierViolation(os.str());
            }
            if (r * r < upper_window2) {
                const double wu = Theta * r * r / (4.0 * F11);
                if (psi > wu * (1.0 + 1e-9)) {
                    std::ostringstream os;
                    os << "upper barrier crossed at rho = " << r << " (psi = " << psi << ", W = " << wu << ")";
                    throw BarrierViolation(os.str());
                }
            }
        }
        p.rho_k_used.push_back(rk);
        if (have_prev) {
            const double lo = prev_start;
            const double hi = 0.999 * std::min(prev.t_back(), tr.t_back());
            double diff = 0.0;
            for (std::size_t i = 0; i < tr.size(); ++i) {
                const double r = tr.t[i];
                if (r < lo || r > hi) continue;
                const double d = std::abs(tr.y[i][0] - prev(r)[0]) / (1.0 + std::abs(tr.y[i][0]));
                diff = std::max(diff, d);
            }
            p.cauchy_diffs.push_back(diff);
            if (diff < opt.cauchy_tol) {
                prev = std::move(tr);
                prev_start = rk;
                converged = true;
                break;
            }
        }
        prev = std::move(tr);
        prev_start = rk;
        have_prev = true;
    }
    if (!converged) {
        std::ostringstream os;
        os << "solve_shrinker: a = " << a << " rho_k sequence failed the Cauchy test (differences";
        for (double d : p.cauchy_diffs) os << ' ' << d;
        os << ")";
        throw NonConvergence(os.str());
    }

    p.trajectory = std::move(prev);
    p.rho_start = prev_start;
    const auto& tr = p.trajectory;
    p.rho_end = tr.t_back();
    p.error_estimate = tr.error_sum;
    const double r1 = 1e-2;
    p.tip_curvature = extrapolate_tip([&](double r) { return tr(r)[1] / r; }, r1);

    // psi nodes and monitor quantities.
    p.rho.push_back(0.0);
    p.psi.push_back(0.0);
    p.psi_rho.push_back(0.0);
    p.psi_rhorho.push_back(p.tip_curvature);
    p.Lambda.push_back(1.0);
    p.B.push_back(F11);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double r = tr.t[i], psi = tr.y[i][0], pr = tr.y[i][1], prr = tr.dy[i][1];
        p.rho.push_back(r);
        p.psi.push_back(psi);
        p.psi_rho.push_back(pr);
        p.psi_rhorho.push_back(prr);
        p.Lambda.push_back(r * prr / (pr * (1.0 + pr * pr)));
        p.B.push_back(r / pr * (0.5 + (r * pr - psi) / (2.0 * a * a)));
    }

    // Barrier constants: eps0 from Q, C from the two thresholds.
    const double eps0 = std::isfinite(Q) ? 0.5 * (1.0 - F01 / Q) : 0.5;
    p.C_f = std::max(speed.solve_restriction(1.0, F01 / (1.0 - eps0)), 1.0 / eps0);
    p.Lambda0 = p.Lambda[1];
    double lmax = -kInf, lmin = kInf, ident = 0.0, res = 0.0, minq = kInf;
    for (std::size_t i = 1; i < p.rho.size(); ++i) {
        lmax = std::max(lmax, p.Lambda[i]);
        lmin = std::min(lmin, p.Lambda[i]);
        ident = std::max(ident, std::abs(p.Lambda[i] - speed.solve_restriction(1.0, p.B[i])) /
                                    std::max(1.0, std::abs(p.Lambda[i])));
        minq = std::min(minq, p.rho[i] * p.psi_rho[i] - p.psi[i]);
    }
    for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
        const double rm = 0.5 * (tr.t[i] + tr.t[i + 1]);
        const auto s = tr(rm);
        const double f = shrinker_rhs(speed, a, rm, s[0], s[1]);
        res = std::max(res, std::abs(tr.derivative(rm)[1] - f) / (1.0 + std::abs(f)));
    }
    p.Lambda_max = lmax;
    p.Lambda_min = lmin;
    p.monitor_identity_error = ident;
    p.lambda_bound_ok = lmax <= std::max(p.C_f, p.Lambda0) * (1.0 + 1e-9);
    p.min_rho_psi_rho_minus_psi = minq;
    p.max_residual = res;
    p.residual_ok = res <= opt.residual_tol;

    // z-representation on [L0, a].
    const double dz_max = opt.z_spacing > 0.0 ? opt.z_spacing : std::min(0.01 * a, 0.05);
    const auto nz = static_cast<std::size_t>(std::ceil((a - p.L0) / dz_max));
    double inv_err = 0.0;
    for (std::size_t j = 0; j <= nz; ++j) {
        const double zj = j == nz ? a : p.L0 + (a - p.L0) * static_cast<double>(j) / static_cast<double>(nz);
        p.z.push_back(zj);
        if (j == nz) {
            p.z_rho.push_back(0.0);
            p.v.push_back(0.0);
            p.v_z.push_back(-kInf);
            p.v_zz.push_back(-kInf);
            p.w.push_back(p.w_at_rho(0.0));
            continue;
        }
        const double r = p.rho_of_z(zj);
        const double psi = p.psi_at(r);
        const double pr = p.psi_rho_at(r);
        const double prr = r <= tr.t_front() ? p.tip_curvature : shrinker_rhs(speed, a, r, psi, pr);
        inv_err = std::max(inv_err, std::abs(a - psi / a - zj));
        p.z_rho.push_back(r);
        p.v.push_back(r / a);
        p.v_z.push_back(-1.0 / pr);
        p.v_zz.push_back(-a * prr / (pr * pr * pr));
        p.w.push_back(p.w_at_rho(r));
    }
    p.max_inversion_error = inv_err;
    return p;
}

WDiagnostic shrinker_w_diagnostic(const ShrinkerProfile& p) {
    const SpeedFunction& s = p.speed;
    WDiagnostic d;
    d.K = p.K;
    d.c = p.c;
    d.L0 = p.L0;
    d.z = p.z;
    d.w = p.w;
    d.tip_target = 2.0 * s.F11() / s.F01();
    d.min_w_minus_2 = kInf;
    for (double wv : p.w) d.min_w_minus_2 = std::min(d.min_w_minus_2, wv - 2.0);
    d.w_gt_2 = d.min_w_minus_2 > 0.0;
    const double a = p.a;
    const auto wbar = [&](double zq) { return 2.0 + p.K * (1.0 / (zq * zq) + 1.0 / (a * a - zq * zq)); };
    for (double zq : p.z) d.wbar.push_back(zq < a ? wbar(zq) : kInf);

    // Tip limit. The approach to z = a has a layer of width O(1/a) in z, so
    // the limit is extrapolated in rho (w is even in rho there).
    d.tip_limit = extrapolate_tip([&](double r) { return p.w_at_rho(r); }, 0.02);

    const double sqK = std::sqrt(p.K);
    if (p.options.M < p.rho_end) {
        d.z_M = a - p.psi_at(p.options.M) / a;
        d.M_applicable = d.z_M > sqK;
    }
    if (d.M_applicable) {
        const int N = 2000;
        d.wbar_violations = 0;
        for (int i = 0; i < N; ++i) {
            const double zq = sqK + (d.z_M - sqK) * (i + 0.5) / N;
            if (zq <= p.z_stop) continue;
            if (p.w_at_rho(p.rho_of_z(zq)) > wbar(zq)) ++d.wbar_violations;
        }
        d.w_le_wbar = d.wbar_violations == 0;
        d.boundary_ok = p.w_at_rho(p.options.M) < wbar(d.z_M);
    }
    return d;
}

UpperBoundReport shrinker_upper_bound_check(const ShrinkerProfile& p, double L) {
    if (!(L >= p.L0 && L < p.a)) throw DomainViolation("shrinker_upper_bound_check: need L0 <= L < a");
    const double a = p.a, F01 = p.speed.F01();
    const double ell = std::log(a) / (a * a);
    UpperBoundReport rep;
    rep.L = L;
    double c_at_L0 = 0.0;
    for (std::size_t i = 0; i < p.z.size(); ++i) {
        const double zq = p.z[i];
        if (zq > L) break;
        const double D = a * a * (1.0 - p.v[i] * p.v[i] / (2.0 * F01));
        const double A = zq * zq - D;
        if (A < 0.0) ++rep.lower_bound_violations;
        double c = 0.0;
        if (A > 0.0) {
            const double b = 1.0 + ell * zq * zq;
            const double disc = b * b - 4.0 * ell * A;
            c = disc >= 0.0 ? 2.0 * A / (b + std::sqrt(disc)) : kInf;
        }
        if (i == 0) c_at_L0 = c;
        if (c > rep.C_fit) {
            rep.C_fit = c;
            rep.binding_z = zq;
        }
    }
    rep.strict_at_L0 = c_at_L0 < rep.C_fit;
    return rep;
}

std::vector<GapRow> shrinker_to_bowl_convergence(const SpeedFunction& speed, const std::vector<double>& a_list,
                                                 double M, const ShrinkerOptions& opt, const BowlOptions& bopt) {
    if (a_list.empty()) return {};
    const double amin = *std::min_element(a_list.begin(), a_list.end());
    if (!(M > 0.0 && M < amin * std::sqrt(2.0 * speed.F01())))
        throw DomainViolation("shrinker_to_bowl_convergence: M must lie below min a * sqrt(2F(0,1))");
    const BowlProfile bowl = solve_bowl(speed, M * 1.01, bopt);
    std::vector<GapRow> rows;
    for (double a : a_list) {
        const ShrinkerProfile sp = solve_shrinker(speed, a, opt);
        if (sp.rho_end < M) throw DomainViolation("shrinker profile does not reach rho = M");
        GapRow row{a, 0.0, 0.0};
        const int N = 2000;
        for (int i = 0; i <= N; ++i) {
            const double r = M * i / N;
            row.gap = std::max(row.gap, std::abs(sp.psi_at(r) - bowl.zeta_at(r)));
            row.gap_rho = std::max(row.gap_rho, std::abs(sp.psi_rho_at(r) - bowl.zeta_rho_at(r)));
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace curvlab
