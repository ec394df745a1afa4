#include "curvlab/flow.hpp"

#include "curvlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace curvlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Thomas algorithm; sub/diag/sup/rhs are overwritten.
void solve_tridiagonal(std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup,
                       std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

// Physicists' Hermite polynomial by the three-term recurrence.
double hermite(int k, double x) {
    double h0 = 1.0, h1 = 2.0 * x;
    if (k == 0) return h0;
    for (int j = 1; j < k; ++j) {
        const double h2 = 2.0 * x * h1 - 2.0 * j * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

// Position where a snapshot crosses `level`, from a local cubic interpolant.
double crossing(const std::vector<double>& u, double x0, double dx, double level) {
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double a = u[i] - level, b = u[i + 1] - level;
        if (a == 0.0) return x0 + dx * static_cast<double>(i);
        if ((a < 0.0) != (b < 0.0)) {
            // Cubic through four neighbours, refined by bisection.
            const std::size_t j = std::clamp<std::size_t>(i, 1, u.size() >= 3 ? u.size() - 3 : 0);
            const auto cubic = [&](double s) {
                double acc = 0.0;
                for (std::size_t m = 0; m < 4 && j - 1 + m < u.size(); ++m) {
                    double l = 1.0;
                    const double sm = static_cast<double>(j - 1 + m);
                    for (std::size_t q = 0; q < 4 && j - 1 + q < u.size(); ++q)
                        if (q != m) l *= (s - static_cast<double>(j - 1 + q)) / (sm - static_cast<double>(j - 1 + q));
                    acc += l * u[j - 1 + m];
                }
                return acc - level;
            };
            double lo = static_cast<double>(i), hi = lo + 1.0;
            const bool inc = b > a;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((cubic(mid) < 0.0) == inc) lo = mid; else hi = mid;
            }
            return x0 + dx * 0.5 * (lo + hi);
        }
    }
    throw InsufficientTail("level set not found in the window");
}

}  // namespace

std::string to_string(Representation r) {
    switch (r) {
        case Representation::Radial: return "radial";
        case Representation::Vertical: return "vertical";
        case Representation::Rescaled: return "rescaled";
    }
    return "radial";
}

std::string to_string(TimeScheme s) { return s == TimeScheme::ExplicitRK2 ? "rk2" : "semi_implicit"; }

std::string to_string(BoundaryMode b) { return b == BoundaryMode::Dirichlet ? "dirichlet" : "extrapolate"; }

Representation representation_from_string(const std::string& s) {
    const std::string l = lower(s);
    if (l == "radial") return Representation::Radial;
    if (l == "vertical") return Representation::Vertical;
    if (l == "rescaled") return Representation::Rescaled;
    throw ConfigError("unknown representation '" + s + "'");
}

TimeScheme time_scheme_from_string(const std::string& s) {
    const std::string l = lower(s);
    if (l == "rk2" || l == "explicit") return TimeScheme::ExplicitRK2;
    if (l == "semi_implicit" || l == "semi-implicit" || l == "implicit") return TimeScheme::SemiImplicit;
    throw ConfigError("unknown time scheme '" + s + "'");
}

BoundaryMode boundary_mode_from_string(const std::string& s) {
    const std::string l = lower(s);
    if (l == "dirichlet") return BoundaryMode::Dirichlet;
    if (l == "extrapolate" || l == "extrapolation") return BoundaryMode::Extrapolate;
    throw ConfigError("unknown boundary mode '" + s + "'");
}

FlowState make_state(Representation rep, double x_lo, double x_hi, std::size_t intervals,
                     const std::function<double(double)>& init, double t0) {
    if (intervals < 4 || !(x_hi > x_lo)) throw DomainViolation("make_state: need x_hi > x_lo and >= 4 intervals");
    if (rep == Representation::Vertical && x_lo != 0.0)
        throw DomainViolation("make_state: the vertical representation starts at the axis");
    FlowState s;
    s.rep = rep;
    s.x0 = x_lo;
    s.dx = (x_hi - x_lo) / static_cast<double>(intervals);
    s.t = t0;
    s.u.resize(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) s.u[i] = init(s.x(i));
    return s;
}

void FlowHistory::record(const FlowState& s) {
    if (u.empty()) {
        rep = s.rep;
        x0 = s.x0;
        dx = s.dx;
    }
    t.push_back(s.t);
    u.push_back(s.u);
}

FlowState FlowHistory::snapshot(std::size_t i) const {
    FlowState s;
    s.rep = rep;
    s.x0 = x0;
    s.dx = dx;
    s.u = u.at(i);
    s.t = t.at(i);
    return s;
}

FlowSolver::FlowSolver(SpeedFunction speed, FlowOptions opt) : speed_(std::move(speed)), opt_(std::move(opt)) {
    if (opt_.boundary == BoundaryMode::Dirichlet && !opt_.reference)
        throw ConfigError("Dirichlet boundaries need a reference solution");
    if (!(opt_.cfl_safety > 0.0 && opt_.cfl_safety <= 1.0)) throw ConfigError("cfl_safety must lie in (0, 1]");
}

double FlowSolver::node_rhs(const FlowState& s, std::size_t i, double* coeff) const {
    const auto& u = s.u;
    const double h = s.dx;
    if (s.rep == Representation::Vertical && i == 0) {
        // Even reflection: f_r / r -> f_rr at the axis.
        const double q = 2.0 * (u[1] - u[0]) / (h * h);
        if (!speed_.in_cone_xy(q, q)) {
            std::ostringstream os;
            os << "ellipticity lost at the axis (f_rr = " << q << ")";
            throw ConeExit(os.str());
        }
        if (coeff) *coeff = speed_.F_x(q, q) + speed_.F_y(q, q);
        return speed_.F(q, q);
    }
    const double p = (u[i + 1] - u[i - 1]) / (2.0 * h);
    const double q = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
    const double g = 1.0 + p * p;
    double X, Y;
    if (s.rep == Representation::Vertical) {
        X = q / g;
        Y = p / s.x(i);
    } else {
        if (u[i] <= opt_.r_min) {
            std::ostringstream os;
            os << "radius " << u[i] << " at x = " << s.x(i) << " below the floor";
            throw Pinch(os.str());
        }
        X = -q / g;
        Y = 1.0 / u[i];
    }
    if (!speed_.in_cone_xy(X, Y)) {
        std::ostringstream os;
        os << "ellipticity lost at x = " << s.x(i) << " (" << X << ", " << Y << ")";
        throw ConeExit(os.str());
    }
    if (coeff) *coeff = speed_.F_x(X, Y) / g;
    switch (s.rep) {
        case Representation::Radial: return -speed_.F(X, Y);
        case Representation::Vertical: return speed_.F(X, Y);
        case Representation::Rescaled: return -speed_.F(X, Y) + 0.5 * (u[i] - s.x(i) * p);
    }
    return 0.0;
}

std::vector<double> FlowSolver::rhs(const FlowState& s) const {
    const std::size_t n = s.size();
    std::vector<double> d(n, 0.0);
    const std::size_t first = s.rep == Representation::Vertical ? 0 : 1;
    for (std::size_t i = first; i + 1 < n; ++i) d[i] = node_rhs(s, i, nullptr);
    return d;
}

std::vector<double> FlowSolver::diffusion(const FlowState& s) const {
    const std::size_t n = s.size();
    std::vector<double> c(n, 0.0);
    const std::size_t first = s.rep == Representation::Vertical ? 0 : 1;
    for (std::size_t i = first; i + 1 < n; ++i) node_rhs(s, i, &c[i]);
    return c;
}

double FlowSolver::max_stable_dt(const FlowState& s) const {
    const auto c = diffusion(s);
    const double m = *std::max_element(c.begin(), c.end());
    return m > 0.0 ? opt_.cfl_safety * s.dx * s.dx / (2.0 * m) : kInf;
}

void FlowSolver::apply_boundary(FlowState& s) const {
    auto& u = s.u;
    const std::size_t n = u.size();
    const bool left = s.rep != Representation::Vertical;
    if (opt_.boundary == BoundaryMode::Dirichlet) {
        if (left) u[0] = opt_.reference(s.x(0), s.t);
        u[n - 1] = opt_.reference(s.x(n - 1), s.t);
    } else {
        if (left) u[0] = 3.0 * u[1] - 3.0 * u[2] + u[3];
        u[n - 1] = 3.0 * u[n - 2] - 3.0 * u[n - 3] + u[n - 4];
    }
}

FlowState FlowSolver::step_rk2(const FlowState& s, double dt) const {
    FlowState s1 = s;
    const auto k1 = rhs(s);
    for (std::size_t i = 0; i < s.size(); ++i) s1.u[i] += dt * k1[i];
    s1.t = s.t + dt;
    apply_boundary(s1);
    const auto k2 = rhs(s1);
    FlowState out = s1;
    for (std::size_t i = 0; i < s.size(); ++i) out.u[i] = 0.5 * (s.u[i] + s1.u[i] + dt * k2[i]);
    apply_boundary(out);
    return out;
}

FlowState FlowSolver::step_semi_implicit(const FlowState& s, double dt) const {
    // Frozen coefficient c = d(rhs)/d(u_xx): (I - dt c D2) u^{n+1} = u^n + dt (N(u^n) - c D2 u^n).
    const std::size_t n = s.size();
    const double h2 = s.dx * s.dx;
    std::vector<double> c(n, 0.0), N(n, 0.0);
    const bool vertical = s.rep == Representation::Vertical;
    const std::size_t first = vertical ? 0 : 1;
    for (std::size_t i = first; i + 1 < n; ++i) N[i] = node_rhs(s, i, &c[i]);

    FlowState out = s;
    out.t = s.t + dt;
    // Boundary values at the new time (lagged extrapolation).
    apply_boundary(out);

    std::vector<double> sub(n, 0.0), diag(n, 1.0), sup(n, 0.0), r(n, 0.0);
    for (std::size_t i = first; i + 1 < n; ++i) {
        const double lam = dt * c[i] / h2;
        double d2;
        if (vertical && i == 0) {
            d2 = 2.0 * (s.u[1] - s.u[0]) / h2;
            diag[i] = 1.0 + 2.0 * lam;
            sup[i] = -2.0 * lam;
        } else {
            d2 = (s.u[i + 1] - 2.0 * s.u[i] + s.u[i - 1]) / h2;
            sub[i] = -lam;
            diag[i] = 1.0 + 2.0 * lam;
            sup[i] = -lam;
        }
        r[i] = s.u[i] + dt * (N[i] - c[i] * d2);
    }
    if (!vertical) r[0] = out.u[0];
    r[n - 1] = out.u[n - 1];
    solve_tridiagonal(sub, diag, sup, r);
    out.u = std::move(r);
    if (opt_.boundary == BoundaryMode::Extrapolate) apply_boundary(out);
    return out;
}

FlowState FlowSolver::step(const FlowState& s, double dt) const {
    if (!(dt > 0.0)) throw DomainViolation("step: dt must be positive");
    if (s.size() < 5) throw DomainViolation("step: grid needs at least 5 nodes");
    if (opt_.scheme == TimeScheme::ExplicitRK2) {
        const double lim = max_stable_dt(s);
        if (dt > lim * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "dt = " << dt << " exceeds the stability limit " << lim;
            throw StabilityViolation(os.str());
        }
        return step_rk2(s, dt);
    }
    return step_semi_implicit(s, dt);
}

FlowState FlowSolver::advance(FlowState s, double t_end, double dt_max, FlowHistory* history,
                              std::size_t stride) const {
    if (history && history->u.empty()) history->record(s);
    std::size_t count = 0;
    if (dt_max > 0.0) {
        const double span = t_end - s.t;
        if (span <= 0.0) return s;
        const auto steps = static_cast<std::size_t>(std::ceil(span / dt_max - 1e-9));
        const double dt = span / static_cast<double>(steps);
        const double t0 = s.t;
        for (std::size_t k = 1; k <= steps; ++k) {
            s = step(s, dt);
            s.t = k == steps ? t_end : t0 + dt * static_cast<double>(k);
            if (history && (++count % stride == 0 || k == steps)) history->record(s);
        }
        return s;
    }
    while (s.t < t_end) {
        double dt = max_stable_dt(s);
        if (s.t + dt >= t_end) dt = t_end - s.t;
        const bool last = s.t + dt >= t_end;
        s = step(s, dt);
        if (last) s.t = t_end;
        if (history && (++count % stride == 0 || last)) history->record(s);
    }
    return s;
}

FlowState step_radial(const FlowSolver& solver, const FlowState& s, double dt) {
    if (s.rep != Representation::Radial) throw DomainViolation("step_radial: state is not radial");
    return solver.step(s, dt);
}

FlowState step_vertical(const FlowSolver& solver, const FlowState& s, double dt) {
    if (s.rep != Representation::Vertical) throw DomainViolation("step_vertical: state is not vertical");
    return solver.step(s, dt);
}

FlowState step_rescaled(const FlowSolver& solver, const FlowState& s, double dt) {
    if (s.rep != Representation::Rescaled) throw DomainViolation("step_rescaled: state is not rescaled");
    return solver.step(s, dt);
}

double cylinder_radius(const SpeedFunction& speed) { return std::sqrt(2.0 * speed.F01()); }

LinearizationReport linearize_rescaled_at_cylinder(const SpeedFunction& speed, double dx, double window,
                                                   std::size_t directions, unsigned seed, double eps) {
    const double sigma = cylinder_radius(speed);
    const double a = speed.a_lin();
    const auto intervals = static_cast<std::size_t>(std::llround(2.0 * window / dx));
    FlowOptions fo;
    fo.boundary = BoundaryMode::Extrapolate;
    const FlowSolver solver(speed, fo);

    LinearizationReport rep;
    rep.a = a;
    rep.dx = 2.0 * window / static_cast<double>(intervals);
    rep.eps = eps;
    rep.directions = directions;
    rep.tolerance = std::max(1e-4, 10.0 * rep.dx * rep.dx);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> om(0.2, 2.0), ph(0.0, 2.0 * std::numbers::pi);
    for (std::size_t d = 0; d < directions; ++d) {
        const double w = om(rng), phi = ph(rng);
        const auto dir = [&](double z) { return std::cos(w * z + phi); };
        const auto plus = make_state(Representation::Rescaled, -window, window, intervals,
                                     [&](double z) { return sigma + eps * dir(z); });
        const auto minus = make_state(Representation::Rescaled, -window, window, intervals,
                                      [&](double z) { return sigma - eps * dir(z); });
        const auto np = solver.rhs(plus), nm = solver.rhs(minus);
        double dev = 0.0, scale = 0.0;
        for (std::size_t i = 1; i + 1 < plus.size(); ++i) {
            const double z = plus.x(i);
            const double u = dir(z), uz = -w * std::sin(w * z + phi), uzz = -w * w * u;
            const double Lu = a * uzz - 0.5 * z * uz + u;
            dev = std::max(dev, std::abs((np[i] - nm[i]) / (2.0 * eps) - Lu));
            scale = std::max(scale, std::abs(Lu));
        }
        rep.max_rel_deviation = std::max(rep.max_rel_deviation, dev / scale);
    }
    rep.pass = rep.max_rel_deviation <= rep.tolerance;
    return rep;
}

double heat_barrier_psi(double z, double t) {
    if (!(z > 0.0) || !(t > 0.0)) throw DomainViolation("heat_barrier_psi: need z > 0 and t > 0");
    return std::erf(z / (2.0 * std::sqrt(t)));
}

double rrz_tail_limit(const FlowState& s, double z_lo, double z_hi) {
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double z = s.x(i);
        if (z < z_lo || z > z_hi) continue;
        acc += s.u[i] * (s.u[i + 1] - s.u[i - 1]) / (2.0 * s.dx);
        ++cnt;
    }
    if (cnt < 10 || z_hi < 1.5 * z_lo) {
        std::ostringstream os;
        os << "tail window [" << z_lo << ", " << z_hi << "] holds " << cnt << " interior nodes";
        throw InsufficientTail(os.str());
    }
    return acc / static_cast<double>(cnt);
}

double level_set_speed(const FlowHistory& h, double r_star) {
    if (h.t.size() < 2) throw InsufficientTail("level_set_speed: need at least two snapshots");
    // Least-squares slope of z*(t).
    double st = 0, sz = 0, stt = 0, stz = 0;
    const double n = static_cast<double>(h.t.size());
    for (std::size_t k = 0; k < h.t.size(); ++k) {
        const double zs = crossing(h.u[k], h.x0, h.dx, r_star);
        st += h.t[k];
        sz += zs;
        stt += h.t[k] * h.t[k];
        stz += h.t[k] * zs;
    }
    return (n * stz - st * sz) / (n * stt - st * st);
}

TipDiagnostics tip_neck_diagnostics(const FlowHistory& h, const SpeedFunction& speed, double r_star,
                                    double tail_lo, double tail_hi) {
    TipDiagnostics d;
    const FlowState last = h.snapshot(h.t.size() - 1);
    d.tail_limit = rrz_tail_limit(last, tail_lo, tail_hi);
    d.tip_speed = std::abs(level_set_speed(h, r_star));
    d.tail_target = speed.F01() / d.tip_speed;
    d.rrz_bound = 4.0 * speed.F01() / d.tip_speed;
    for (std::size_t i = 1; i + 1 < last.size(); ++i)
        d.rrz_max = std::max(d.rrz_max, std::abs(last.u[i] * (last.u[i + 1] - last.u[i - 1]) / (2.0 * last.dx)));
    d.rrz_bound_ok = d.rrz_max <= d.rrz_bound;
    return d;
}

ExtinctionReport extinction_check(const FlowHistory& h, const SpeedFunction& speed, double tol) {
    const std::size_t m = h.t.size();
    if (m < 2) throw InsufficientTail("extinction_check: need at least two snapshots");
    const double F01 = speed.F01();
    ExtinctionReport rep;
    const auto& ul = h.u[m - 1];
    const auto& up = h.u[m - 2];
    const double dt = h.t[m - 1] - h.t[m - 2];
    rep.min_margin = kInf;
    for (std::size_t i = 0; i < ul.size(); ++i) {
        const double slope = (ul[i] * ul[i] - up[i] * up[i]) / dt;
        if (!(slope < 0.0)) throw InsufficientTail("extinction_check: data is not shrinking");
        const double T = h.t[m - 1] - ul[i] * ul[i] / slope;
        rep.z.push_back(h.x0 + h.dx * static_cast<double>(i));
        rep.T.push_back(T);
        for (std::size_t k = 0; k < m; ++k) {
            const double r = h.u[k][i];
            rep.min_margin = std::min(rep.min_margin, r * r - 2.0 * F01 * (T - h.t[k]));
        }
    }
    rep.ok = rep.min_margin >= -tol;
    return rep;
}

CylinderRegression cylinder_regression(const SpeedFunction& speed, double r0, double half, double t_end,
                                       double dx0, int levels, const FlowOptions& base) {
    const double F01 = speed.F01();
    if (!(r0 * r0 > 2.0 * F01 * t_end)) throw DomainViolation("cylinder_regression: the cylinder pinches before t_end");
    const auto exact = [&](double, double t) { return std::sqrt(r0 * r0 - 2.0 * F01 * t); };
    FlowOptions fo = base;
    fo.reference = exact;
    const FlowSolver solver(speed, fo);
    CylinderRegression out;
    out.r_exact = exact(0.0, t_end);
    double ratio_dt = 0.0;
    for (int l = 0; l < levels; ++l) {
        const double dx = dx0 / std::pow(2.0, l);
        const auto intervals = static_cast<std::size_t>(std::llround(2.0 * half / dx));
        const FlowState s0 = make_state(Representation::Radial, -half, half, intervals, [&](double) { return r0; });
        // dt / dx^2 is frozen just below the CFL value of the coarse grid.
        if (l == 0) ratio_dt = 0.95 * solver.max_stable_dt(s0) / (s0.dx * s0.dx);
        const double dt = ratio_dt * s0.dx * s0.dx;
        const FlowState s1 = solver.advance(s0, t_end, dt);
        double err = 0.0;
        for (double v : s1.u) err = std::max(err, std::abs(v - out.r_exact));
        out.dx.push_back(s0.dx);
        out.dt.push_back(t_end / std::ceil(t_end / dt - 1e-9));
        out.max_error.push_back(err);
        if (l > 0) out.ratios.push_back(out.max_error[l - 1] / err);
    }
    return out;
}

TranslationRun bowl_translation(const SpeedFunction& speed, double z_lo, double z_hi, double dx, double t_end,
                                const FlowOptions& base) {
    const BowlProfile bowl = solve_bowl_to_height(speed, z_hi + 1.0);
    const auto ref = [&bowl](double z, double t) { return bowl.radius_at_height(z - 0.5 * t); };
    FlowOptions fo = base;
    fo.reference = ref;
    const FlowSolver solver(speed, fo);
    const auto intervals = static_cast<std::size_t>(std::llround((z_hi - z_lo) / dx));
    const FlowState s0 =
        make_state(Representation::Radial, z_lo, z_hi, intervals, [&](double z) { return ref(z, 0.0); });

    TranslationRun run;
    const FlowState s1 = solver.advance(s0, t_end, fo.dt, &run.history, 200);
    run.r_star = ref(0.5 * (z_lo + z_hi), 0.0);
    run.z_star_start = crossing(s0.u, s0.x0, s0.dx, run.r_star);
    run.z_star_end = crossing(s1.u, s1.x0, s1.dx, run.r_star);
    run.speed_measured = (run.z_star_end - run.z_star_start) / t_end;
    for (std::size_t i = 0; i < s1.size(); ++i)
        run.max_profile_error = std::max(run.max_profile_error, std::abs(s1.u[i] - ref(s1.x(i), t_end)));
    return run;
}

TranslationRun bowl_translation_vertical(const SpeedFunction& speed, double r_hi, double dx, double t_end,
                                         const FlowOptions& base) {
    const BowlProfile bowl = solve_bowl(speed, r_hi * 1.01);
    const auto ref = [&bowl](double r, double t) { return bowl.zeta_at(r) + 0.5 * t; };
    FlowOptions fo = base;
    fo.reference = ref;
    const FlowSolver solver(speed, fo);
    const auto intervals = static_cast<std::size_t>(std::llround(r_hi / dx));
    const FlowState s0 =
        make_state(Representation::Vertical, 0.0, r_hi, intervals, [&](double r) { return ref(r, 0.0); });
    TranslationRun run;
    const FlowState s1 = solver.advance(s0, t_end, fo.dt, &run.history, 200);
    run.r_star = 0.0;
    run.z_star_start = s0.u[0];
    run.z_star_end = s1.u[0];
    run.speed_measured = (s1.u[0] - s0.u[0]) / t_end;
    for (std::size_t i = 0; i < s1.size(); ++i)
        run.max_profile_error = std::max(run.max_profile_error, std::abs(s1.u[i] - ref(s1.x(i), t_end)));
    return run;
}

ModeRun run_mode_seed(const SpeedFunction& speed, int k, double eps, double tau_end, double half, double dx,
                      std::size_t stride, const FlowOptions& base) {
    if (k < 0) throw DomainViolation("run_mode_seed: k must be nonnegative");
    const double sigma = cylinder_radius(speed);
    const double sa = 2.0 * std::sqrt(speed.a_lin());
    const double mu = 1.0 - 0.5 * k;
    const auto mode = [&](double z) { return hermite(k, z / sa); };
    const auto linear = [&](double z, double tau) { return sigma + eps * std::exp(mu * tau) * mode(z); };
    FlowOptions fo = base;
    fo.reference = linear;
    const FlowSolver solver(speed, fo);
    const auto intervals = static_cast<std::size_t>(std::llround(2.0 * half / dx));
    const FlowState s0 =
        make_state(Representation::Rescaled, -half, half, intervals, [&](double z) { return linear(z, 0.0); });

    // Gaussian-weighted projection on the grid (trapezoid rule).
    const double a = speed.a_lin();
    const auto amplitude = [&](const FlowState& s) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double z = s.x(i);
            const double wgt = ((i == 0 || i + 1 == s.size()) ? 0.5 : 1.0) * std::exp(-z * z / (4.0 * a));
            const double hk = mode(z);
            num += wgt * (s.u[i] - sigma) * hk;
            den += wgt * hk * hk;
        }
        return num / den;
    };
    ModeRun run;
    run.k = k;
    run.expected_rate = mu;
    const FlowState s1 = solver.advance(s0, tau_end, fo.dt, &run.history, stride);
    run.amplitude_start = amplitude(s0);
    run.amplitude_end = amplitude(s1);
    run.measured_rate = std::log(run.amplitude_end / run.amplitude_start) / tau_end;
    run.drift = std::abs(run.amplitude_end - run.amplitude_start);
    return run;
}

double rescaled_bowl_value(const BowlProfile& bowl, double z, double tau) {
    const double h = 0.5 * std::exp(-tau) - std::exp(-0.5 * tau) * z;
    if (h < 0.0) throw DomainViolation("rescaled bowl evaluated above its tip");
    return std::exp(0.5 * tau) * bowl.radius_at_height(h);
}

FlowHistory rescaled_bowl_run(const BowlProfile& bowl, double tau0, double tau1, double half, double dx,
                              std::size_t stride, const FlowOptions& base) {
    const auto ref = [&bowl](double z, double tau) { return rescaled_bowl_value(bowl, z, tau); };
    FlowOptions fo = base;
    fo.reference = ref;
    const FlowSolver solver(bowl.speed, fo);
    const auto intervals = static_cast<std::size_t>(std::llround(2.0 * half / dx));
    const FlowState s0 =
        make_state(Representation::Rescaled, -half, half, intervals, [&](double z) { return ref(z, tau0); }, tau0);
    FlowHistory h;
    solver.advance(s0, tau1, fo.dt, &h, stride);
    return h;
}

double stationarity_residual(const SpeedFunction& speed, const FlowState& s) {
    if (s.rep != Representation::Rescaled) throw DomainViolation("stationarity_residual: state is not rescaled");
    FlowOptions fo;
    fo.boundary = BoundaryMode::Extrapolate;
    const FlowSolver solver(speed, fo);
    const auto d = solver.rhs(s);
    double m = 0.0;
    for (double v : d) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace curvlab
