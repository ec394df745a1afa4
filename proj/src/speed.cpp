#include "curvlab/speed.hpp"

#include "curvlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace curvlab {

namespace {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

std::string describe(std::span<const double> lambda) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < lambda.size(); ++i) os << (i ? ", " : "") << lambda[i];
    os << ')';
    return os.str();
}

// sigma_j for j = 0..k with one entry optionally skipped.
void elementary_all(std::span<const double> lambda, int k, std::ptrdiff_t skip, std::vector<double>& e) {
    e.assign(static_cast<std::size_t>(k) + 1, 0.0);
    e[0] = 1.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        if (static_cast<std::ptrdiff_t>(i) == skip) continue;
        for (int j = k; j >= 1; --j) e[j] += lambda[i] * e[j - 1];
    }
}

}  // namespace

std::string to_string(SpeedKind kind) {
    switch (kind) {
        case SpeedKind::Sum: return "sum";
        case SpeedKind::BrendleHuisken: return "bh";
        case SpeedKind::SigmaRatio: return "sigma_ratio";
    }
    return "unknown";
}

SpeedKind speed_kind_from_string(const std::string& s) {
    if (s == "sum" || s == "mean") return SpeedKind::Sum;
    if (s == "bh" || s == "brendle_huisken") return SpeedKind::BrendleHuisken;
    if (s == "sigma_ratio" || s == "sigma") return SpeedKind::SigmaRatio;
    throw ConfigError("unknown speed kind '" + s + "'");
}

double elementary_symmetric(std::span<const double> lambda, int k) {
    if (k < 0) return 0.0;
    std::vector<double> e;
    elementary_all(lambda, k, -1, e);
    return e[static_cast<std::size_t>(k)];
}

SpeedFunction::SpeedFunction(const SpeedSpec& spec) : spec_(spec) {
    const int n = spec_.n;
    if (n < 2) throw DomainViolation("speed dimension must be at least 2");
    switch (spec_.kind) {
        case SpeedKind::Sum:
            cone_slope_ = 1.0;
            break;
        case SpeedKind::BrendleHuisken:
            // n = 2 has a single pair: the speed degenerates and the window
            // F(0,1) < z/y < Q used by the shrinker ODE is empty.
            if (n < 3) throw DomainViolation("brendle_huisken speed requires n >= 3");
            cone_slope_ = 1.0;
            break;
        case SpeedKind::SigmaRatio:
            if (spec_.k < 1 || spec_.k > n - 1)
                throw DomainViolation("sigma_ratio requires 1 <= k <= n-1");
            cone_slope_ = static_cast<double>(n - spec_.k) / spec_.k;
            break;
    }
    binom_.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) binom_[static_cast<std::size_t>(j)] = binomial(n - 1, j);
    F01_ = F(0.0, 1.0);
    F11_ = F(1.0, 1.0);
    a_lin_ = F_x(0.0, 1.0);
    Q_ = compute_Q(*this, spec_.q_growth);
}

SpeedFunction SpeedFunction::sum(int n) { return SpeedFunction({SpeedKind::Sum, n, 1}); }
SpeedFunction SpeedFunction::bh(int n) { return SpeedFunction({SpeedKind::BrendleHuisken, n, 2}); }
SpeedFunction SpeedFunction::sigma_ratio(int n, int k) { return SpeedFunction({SpeedKind::SigmaRatio, n, k}); }

std::string SpeedFunction::name() const {
    std::string s = to_string(spec_.kind) + "(n=" + std::to_string(spec_.n);
    if (spec_.kind == SpeedKind::SigmaRatio) s += ",k=" + std::to_string(spec_.k);
    return s + ")";
}

bool SpeedFunction::in_cone(std::span<const double> lambda) const {
    if (static_cast<int>(lambda.size()) != spec_.n) return false;
    for (double l : lambda)
        if (!std::isfinite(l)) return false;
    if (spec_.kind == SpeedKind::SigmaRatio) {
        std::vector<double> e;
        elementary_all(lambda, spec_.k, -1, e);
        for (int j = 1; j <= spec_.k; ++j)
            if (!(e[static_cast<std::size_t>(j)] > 0.0)) return false;
        return true;
    }
    double m1 = std::numeric_limits<double>::infinity(), m2 = m1;
    for (double l : lambda) {
        if (l < m1) {
            m2 = m1;
            m1 = l;
        } else if (l < m2) {
            m2 = l;
        }
    }
    return m1 + m2 > 0.0;
}

double SpeedFunction::operator()(std::span<const double> lambda) const {
    if (!in_cone(lambda)) throw ConeViolation(name() + ": curvature vector outside cone " + describe(lambda));
    const std::size_t n = lambda.size();
    switch (spec_.kind) {
        case SpeedKind::Sum: {
            double s = 0.0;
            for (double l : lambda) s += l;
            return s;
        }
        case SpeedKind::BrendleHuisken: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) s += 1.0 / (lambda[i] + lambda[j]);
            return 1.0 / s;
        }
        case SpeedKind::SigmaRatio: {
            std::vector<double> e;
            elementary_all(lambda, spec_.k, -1, e);
            return e[static_cast<std::size_t>(spec_.k)] / e[static_cast<std::size_t>(spec_.k - 1)];
        }
    }
    return 0.0;
}

std::vector<double> SpeedFunction::gradient(std::span<const double> lambda) const {
    if (!in_cone(lambda)) throw ConeViolation(name() + ": curvature vector outside cone " + describe(lambda));
    const std::size_t n = lambda.size();
    std::vector<double> g(n, 1.0);
    switch (spec_.kind) {
        case SpeedKind::Sum:
            break;
        case SpeedKind::BrendleHuisken: {
            const double gam = (*this)(lambda);
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    if (j != i) s += 1.0 / ((lambda[i] + lambda[j]) * (lambda[i] + lambda[j]));
                g[i] = gam * gam * s;
            }
            break;
        }
        case SpeedKind::SigmaRatio: {
            const int k = spec_.k;
            std::vector<double> e, ei;
            elementary_all(lambda, k, -1, e);
            const double P = e[static_cast<std::size_t>(k)];
            const double R = e[static_cast<std::size_t>(k - 1)];
            for (std::size_t i = 0; i < n; ++i) {
                elementary_all(lambda, k, static_cast<std::ptrdiff_t>(i), ei);
                const double dP = ei[static_cast<std::size_t>(k - 1)];
                const double dR = k >= 2 ? ei[static_cast<std::size_t>(k - 2)] : 0.0;
                g[i] = (dP * R - P * dR) / (R * R);
            }
            break;
        }
    }
    return g;
}

bool SpeedFunction::in_cone_xy(double x, double y) const {
    return y > 0.0 && std::isfinite(x) && std::isfinite(y) && x > -cone_slope_ * y;
}

double SpeedFunction::F(double x, double y) const {
    if (!in_cone_xy(x, y)) {
        std::ostringstream os;
        os << name() << ": restriction argument (" << x << ", " << y << ") outside cone";
        throw ConeViolation(os.str());
    }
    const double n1 = spec_.n - 1;
    switch (spec_.kind) {
        case SpeedKind::Sum:
            return x + n1 * y;
        case SpeedKind::BrendleHuisken: {
            const double m = n1 * (n1 - 1.0) / 2.0;
            return 1.0 / (n1 / (x + y) + m / (2.0 * y));
        }
        case SpeedKind::SigmaRatio: {
            const int k = spec_.k;
            const auto b = [&](int j) { return j < 0 ? 0.0 : binom_[static_cast<std::size_t>(j)]; };
            const double P = b(k) * std::pow(y, k) + x * b(k - 1) * std::pow(y, k - 1);
            const double R = b(k - 1) * std::pow(y, k - 1) + (k >= 2 ? x * b(k - 2) * std::pow(y, k - 2) : 0.0);
            return P / R;
        }
    }
    return 0.0;
}

double SpeedFunction::F_x(double x, double y) const {
    if (!in_cone_xy(x, y)) throw ConeViolation(name() + ": restriction argument outside cone");
    const double n1 = spec_.n - 1;
    switch (spec_.kind) {
        case SpeedKind::Sum:
            return 1.0;
        case SpeedKind::BrendleHuisken: {
            const double f = F(x, y);
            return f * f * n1 / ((x + y) * (x + y));
        }
        case SpeedKind::SigmaRatio: {
            const int k = spec_.k;
            const auto b = [&](int j) { return j < 0 ? 0.0 : binom_[static_cast<std::size_t>(j)]; };
            const double P = b(k) * std::pow(y, k) + x * b(k - 1) * std::pow(y, k - 1);
            const double R = b(k - 1) * std::pow(y, k - 1) + (k >= 2 ? x * b(k - 2) * std::pow(y, k - 2) : 0.0);
            const double Px = b(k - 1) * std::pow(y, k - 1);
            const double Rx = k >= 2 ? b(k - 2) * std::pow(y, k - 2) : 0.0;
            return (Px * R - P * Rx) / (R * R);
        }
    }
    return 0.0;
}

double SpeedFunction::F_y(double x, double y) const {
    if (spec_.kind == SpeedKind::Sum) {
        if (!in_cone_xy(x, y)) throw ConeViolation(name() + ": restriction argument outside cone");
        return spec_.n - 1.0;
    }
    if (spec_.kind == SpeedKind::BrendleHuisken) {
        const double n1 = spec_.n - 1;
        const double m = n1 * (n1 - 1.0) / 2.0;
        const double f = F(x, y);
        return f * f * (n1 / ((x + y) * (x + y)) + m / (2.0 * y * y));
    }
    // Euler identity for the 1-homogeneous restriction.
    return (F(x, y) - x * F_x(x, y)) / y;
}

double SpeedFunction::solve_restriction(double y, double z) const {
    if (!(y > 0.0) || !(z > 0.0) || !std::isfinite(y) || !std::isfinite(z)) {
        std::ostringstream os;
        os << name() << ": restriction inverse needs y, z > 0, got (" << y << ", " << z << ")";
        throw DomainViolation(os.str());
    }
    if (std::isfinite(Q_) && z >= Q_ * y) {
        std::ostringstream os;
        os << name() << ": z/y = " << z / y << " at or above Q = " << Q_;
        throw DomainViolation(os.str());
    }
    const double x_min = -cone_slope_ * y;
    double lo = x_min;
    double hi = std::max(y, z);
    int guard = 0;
    while (F(hi, y) < z) {
        lo = hi;
        hi = 2.0 * hi + y;
        if (++guard > 200) throw DomainViolation(name() + ": restriction inverse bracket failed");
    }
    // Below the cone edge F tends to a positive limit for some kinds.
    {
        const double x_edge = x_min + 1e-14 * (std::abs(x_min) + y);
        if (lo == x_min && F(x_edge, y) > z) {
            std::ostringstream os;
            os << name() << ": z/y = " << z / y << " below the restriction's range";
            throw DomainViolation(os.str());
        }
    }

    double x = hi;
    double g = F(x, y) - z;
    for (int it = 0; it < 200; ++it) {
        if (g > 0.0) hi = x; else lo = x;
        if (std::abs(g) <= 4.0 * std::numeric_limits<double>::epsilon() * z) break;
        const double d = F_x(x, y);
        double xn = x - g / d;
        if (!(xn > lo && xn < hi) || !std::isfinite(xn)) xn = 0.5 * (lo + hi);
        if (lo == x_min && xn <= x_min) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-16 * (std::abs(x) + y)) {
            x = xn;
            g = F(x, y) - z;
            break;
        }
        x = xn;
        g = F(x, y) - z;
    }
    if (std::abs(g) > 1e-12 * z) {
        std::ostringstream os;
        os << name() << ": restriction inverse residual " << g << " exceeds tolerance";
        throw ToleranceFailure(os.str());
    }
    return x;
}

double SpeedFunction::invert_f(double y, double z) const {
    if (!(y > 0.0) || !(z > 0.0)) throw DomainViolation(name() + ": f(y,z) needs y, z > 0");
    const double ratio = z / y;
    if (!(ratio > F01_) || (std::isfinite(Q_) && ratio >= Q_)) {
        std::ostringstream os;
        os << name() << ": (y, z) = (" << y << ", " << z << ") outside U, z/y = " << ratio;
        throw DomainViolation(os.str());
    }
    return std::max(0.0, solve_restriction(y, z));
}

double SpeedFunction::f_z(double y, double z) const {
    return 1.0 / F_x(solve_restriction(y, z), y);
}

double SpeedFunction::f_y(double y, double z) const {
    const double x = solve_restriction(y, z);
    return -F_y(x, y) / F_x(x, y);
}

double compute_Q(const SpeedFunction& speed, double growth_threshold) {
    double prev = 0.0, last = 0.0;
    for (int j = 0; j <= 12; ++j) {
        prev = last;
        last = speed.F(std::pow(10.0, j), 1.0);
    }
    if (last > growth_threshold * speed.F(1.0, 1.0)) return std::numeric_limits<double>::infinity();
    // F(x,1) = Q - c/x + ...; one Richardson step with ratio 10.
    return last + (last - prev) / 9.0;
}

}  // namespace curvlab
