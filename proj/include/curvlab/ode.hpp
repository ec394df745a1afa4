#pragma once

// Adaptive Dormand-Prince 5(4) integrator with dense output and a single
// terminal event. Header-only because the state size is a template argument.

#include "curvlab/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

namespace curvlab {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_initial = 0.0;  // 0: chosen from the start point
    double h_min = 1e-14;    // relative to |t|+1
    double h_max = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 20'000'000;
};

template <std::size_t N>
using OdeState = std::array<double, N>;

/// Accepted steps plus the continuous extension of each step.
template <std::size_t N>
class DenseTrajectory {
public:
    std::vector<double> t;
    std::vector<OdeState<N>> y;
    std::vector<OdeState<N>> dy;
    std::size_t rejected = 0;
    double error_sum = 0.0;  // accumulated local error estimates (max-norm, absolute)
    bool event_hit = false;

    std::size_t size() const { return t.size(); }
    double t_front() const { return t.front(); }
    double t_back() const { return t.back(); }

    OdeState<N> operator()(double tq) const {
        if (t.size() < 2) return y.front();
        const std::size_t i = segment(tq);
        const double h = t[i + 1] - t[i];
        const double th = (tq - t[i]) / h;
        const double th1 = 1.0 - th;
        const auto& r = cont_[i];
        OdeState<N> out{};
        for (std::size_t c = 0; c < N; ++c)
            out[c] = r[0][c] + th * (r[1][c] + th1 * (r[2][c] + th * (r[3][c] + th1 * r[4][c])));
        return out;
    }

    /// Derivative of the continuous extension (used for defect checks).
    OdeState<N> derivative(double tq) const {
        const std::size_t i = segment(tq);
        const double h = t[i + 1] - t[i];
        const double th = (tq - t[i]) / h;
        const double th1 = 1.0 - th;
        const auto& r = cont_[i];
        OdeState<N> out{};
        for (std::size_t c = 0; c < N; ++c) {
            const double A = r[3][c] + th1 * r[4][c];
            const double dA = -r[4][c];
            const double Bv = r[2][c] + th * A;
            const double dB = A + th * dA;
            const double Cv = r[1][c] + th1 * Bv;
            const double dC = -Bv + th1 * dB;
            out[c] = (Cv + th * dC) / h;
        }
        return out;
    }

    std::size_t segment(double tq) const {
        if (tq <= t.front()) return 0;
        if (tq >= t.back()) return t.size() - 2;
        auto it = std::upper_bound(t.begin(), t.end(), tq);
        return static_cast<std::size_t>(it - t.begin()) - 1;
    }

    void push_first(double t0, const OdeState<N>& y0, const OdeState<N>& d0) {
        t.push_back(t0);
        y.push_back(y0);
        dy.push_back(d0);
    }
    void push_step(double t1, const OdeState<N>& y1, const OdeState<N>& d1,
                   const std::array<OdeState<N>, 5>& cont) {
        t.push_back(t1);
        y.push_back(y1);
        dy.push_back(d1);
        cont_.push_back(cont);
    }
    void truncate_last(double t1, const OdeState<N>& y1, const OdeState<N>& d1) {
        // Replace the final node by an interior point of the final step. The
        // continuous extension is rebuilt as a cubic Hermite segment.
        const std::size_t i = t.size() - 2;
        const double t0 = t[i];
        const double h = t1 - t0;
        std::array<OdeState<N>, 5> r{};
        for (std::size_t c = 0; c < N; ++c) {
            const double diff = y1[c] - y[i][c];
            r[0][c] = y[i][c];
            r[1][c] = diff;
            r[2][c] = h * dy[i][c] - diff;
            r[3][c] = diff - h * d1[c] - r[2][c];
            r[4][c] = 0.0;
        }
        t.back() = t1;
        y.back() = y1;
        dy.back() = d1;
        cont_.back() = r;
    }

private:
    std::vector<std::array<OdeState<N>, 5>> cont_;
};

/// Integrates y' = rhs(t, y) from t0 toward t_end. If `event` is given, the
/// integration stops at the first sign change of event(t, y) from negative to
/// non-negative, located on the dense output. Exceptions thrown by `rhs` at a
/// trial stage cause a step rejection; a persistent failure is rethrown once
/// the step size underflows.
template <std::size_t N, class Rhs>
DenseTrajectory<N> integrate_dopri(Rhs&& rhs, double t0, const OdeState<N>& y0, double t_end,
                                   const OdeOptions& opt,
                                   const std::function<double(double, const OdeState<N>&)>& event = {}) {
    // Dormand-Prince coefficients.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                     a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    using S = OdeState<N>;
    const double dir = t_end >= t0 ? 1.0 : -1.0;
    DenseTrajectory<N> traj;
    S k1 = rhs(t0, y0);
    traj.push_first(t0, y0, k1);

    const auto norm_scaled = [&](const S& e, const S& ya, const S& yb) {
        double s = 0.0;
        for (std::size_t c = 0; c < N; ++c) {
            const double sc = opt.atol + opt.rtol * std::max(std::abs(ya[c]), std::abs(yb[c]));
            s += (e[c] / sc) * (e[c] / sc);
        }
        return std::sqrt(s / N);
    };

    double h = opt.h_initial;
    if (h <= 0.0) {
        double d0 = 0.0, dd = 0.0;
        for (std::size_t c = 0; c < N; ++c) {
            const double sc = opt.atol + opt.rtol * std::abs(y0[c]);
            d0 = std::max(d0, std::abs(y0[c]) / sc);
            dd = std::max(dd, std::abs(k1[c]) / sc);
        }
        h = (d0 < 1e-5 || dd < 1e-5) ? 1e-6 : 0.01 * d0 / dd;
        h = std::min(h, std::abs(t_end - t0));
    }
    h = std::min(h, opt.h_max);

    double t = t0;
    S y = y0;
    double err_old = 1e-4;
    bool last_rejected = false;
    double ev_prev = event ? event(t0, y0) : -1.0;
    std::size_t steps = 0;
    std::string last_failure;

    while (dir * (t_end - t) > 0.0) {
        if (++steps > opt.max_steps) throw ToleranceFailure("ODE integrator exceeded maximum step count");
        const double h_floor = opt.h_min * (std::abs(t) + 1.0);
        if (h < h_floor) {
            std::ostringstream os;
            os << "ODE step size underflow at t = " << t;
            if (!last_failure.empty()) {
                os << " (" << last_failure << ")";
                throw ConeExit(os.str());
            }
            throw ToleranceFailure(os.str());
        }
        bool final_step = false;
        if (dir * (t + dir * h - t_end) >= 0.0) {
            h = std::abs(t_end - t);
            final_step = true;
        }
        const double hs = dir * h;
        S k2, k3, k4, k5, k6, k7, y1, ytmp, err;
        bool stage_ok = true;
        try {
            for (std::size_t c = 0; c < N; ++c) ytmp[c] = y[c] + hs * a21 * k1[c];
            k2 = rhs(t + c2 * hs, ytmp);
            for (std::size_t c = 0; c < N; ++c) ytmp[c] = y[c] + hs * (a31 * k1[c] + a32 * k2[c]);
            k3 = rhs(t + c3 * hs, ytmp);
            for (std::size_t c = 0; c < N; ++c) ytmp[c] = y[c] + hs * (a41 * k1[c] + a42 * k2[c] + a43 * k3[c]);
            k4 = rhs(t + c4 * hs, ytmp);
            for (std::size_t c = 0; c < N; ++c)
                ytmp[c] = y[c] + hs * (a51 * k1[c] + a52 * k2[c] + a53 * k3[c] + a54 * k4[c]);
            k5 = rhs(t + c5 * hs, ytmp);
            for (std::size_t c = 0; c < N; ++c)
                ytmp[c] = y[c] + hs * (a61 * k1[c] + a62 * k2[c] + a63 * k3[c] + a64 * k4[c] + a65 * k5[c]);
            k6 = rhs(t + hs, ytmp);
            for (std::size_t c = 0; c < N; ++c)
                y1[c] = y[c] + hs * (a71 * k1[c] + a73 * k3[c] + a74 * k4[c] + a75 * k5[c] + a76 * k6[c]);
            k7 = rhs(t + hs, y1);
        } catch (const Error& e) {
            stage_ok = false;
            last_failure = e.what();
        }
        double err_norm = std::numeric_limits<double>::infinity();
        if (stage_ok) {
            for (std::size_t c = 0; c < N; ++c)
                err[c] = hs * (e1 * k1[c] + e3 * k3[c] + e4 * k4[c] + e5 * k5[c] + e6 * k6[c] + e7 * k7[c]);
            err_norm = norm_scaled(err, y, y1);
            if (!std::isfinite(err_norm)) err_norm = std::numeric_limits<double>::infinity();
        }
        if (err_norm <= 1.0) {
            std::array<S, 5> cont;
            for (std::size_t c = 0; c < N; ++c) {
                const double diff = y1[c] - y[c];
                const double bspl = hs * k1[c] - diff;
                cont[0][c] = y[c];
                cont[1][c] = diff;
                cont[2][c] = bspl;
                cont[3][c] = diff - hs * k7[c] - bspl;
                cont[4][c] = hs * (d1 * k1[c] + d3 * k3[c] + d4 * k4[c] + d5 * k5[c] + d6 * k6[c] + d7 * k7[c]);
            }
            double emax = 0.0;
            for (std::size_t c = 0; c < N; ++c) emax = std::max(emax, std::abs(err[c]));
            traj.error_sum += emax;
            traj.push_step(t + hs, y1, k7, cont);
            const double t_new = t + hs;
            if (event) {
                const double ev = event(t_new, y1);
                if (ev_prev < 0.0 && ev >= 0.0) {
                    double lo = t, hi = t_new;
                    for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15 * (std::abs(hi) + 1.0); ++it) {
                        const double mid = 0.5 * (lo + hi);
                        if (event(mid, traj(mid)) >= 0.0) hi = mid; else lo = mid;
                    }
                    const S ye = traj(hi);
                    traj.truncate_last(hi, ye, rhs(hi, ye));
                    traj.event_hit = true;
                    return traj;
                }
                ev_prev = ev;
            }
            t = t_new;
            y = y1;
            k1 = k7;
            if (final_step) break;
            // PI step size controller.
            const double en = std::max(err_norm, 1e-10);
            double fac = 0.9 * std::pow(en, -0.7 / 5.0) * std::pow(err_old, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, 5.0);
            if (last_rejected) fac = std::min(fac, 1.0);
            h = std::min(h * fac, opt.h_max);
            err_old = std::max(err_norm, 1e-4);
            last_rejected = false;
        } else {
            ++traj.rejected;
            const double fac = stage_ok ? std::max(0.2, 0.9 * std::pow(err_norm, -0.2)) : 0.25;
            h *= fac;
            last_rejected = true;
        }
    }
    return traj;
}

}  // namespace curvlab
