#pragma once

#include <span>
#include <string>
#include <vector>

namespace curvlab {

enum class SpeedKind { Sum, BrendleHuisken, SigmaRatio };

/// Serializable description of a speed: kind, dimension and (for sigma_ratio) k.
struct SpeedSpec {
    SpeedKind kind = SpeedKind::Sum;
    int n = 3;
    int k = 2;
    double q_growth = 1e6;

    bool operator==(const SpeedSpec&) const = default;
};

std::string to_string(SpeedKind kind);
SpeedKind speed_kind_from_string(const std::string& s);

/// Symmetric, 1-homogeneous, monotone speed gamma on its cone.
///
/// Cones: sum and brendle_huisken use min(l_i + l_j) > 0; sigma_ratio(k) uses
/// sigma_1, ..., sigma_k > 0. Construction validates the kind/dimension pair and
/// caches F(0,1), F(1,1), the linearisation coefficient and Q.
class SpeedFunction {
public:
    explicit SpeedFunction(const SpeedSpec& spec);
    static SpeedFunction sum(int n);
    static SpeedFunction bh(int n);
    static SpeedFunction sigma_ratio(int n, int k);

    const SpeedSpec& spec() const { return spec_; }
    SpeedKind kind() const { return spec_.kind; }
    int n() const { return spec_.n; }
    std::string name() const;
    bool linear() const { return spec_.kind == SpeedKind::Sum; }
    bool concave() const { return true; }

    bool in_cone(std::span<const double> lambda) const;
    double operator()(std::span<const double> lambda) const;
    std::vector<double> gradient(std::span<const double> lambda) const;

    // Restriction F(x, y) = gamma(x, y, ..., y) and its partials.
    bool in_cone_xy(double x, double y) const;
    double F(double x, double y) const;
    double F_x(double x, double y) const;  // gamma-dot^1(x, y, ..., y)
    double F_y(double x, double y) const;  // sum over i >= 2 of gamma-dot^i

    // Smallest admissible x / y along the restriction: (x, y, ..., y) is in the
    // cone iff x > -cone_slope() * y (with y > 0).
    double cone_slope() const { return cone_slope_; }

    double F01() const { return F01_; }
    double F11() const { return F11_; }
    double a_lin() const { return a_lin_; }
    double Q() const { return Q_; }

    /// f(y, z): the x >= 0 with F(x, y) = z, for F(0,1) < z/y < Q.
    double invert_f(double y, double z) const;
    /// Same root solve, but allowed anywhere the restriction stays in the cone
    /// (x may be negative). Used by the ODE right-hand sides.
    double solve_restriction(double y, double z) const;
    /// Partials of f with respect to y and z at the given point.
    double f_y(double y, double z) const;
    double f_z(double y, double z) const;

private:
    SpeedSpec spec_;
    double cone_slope_ = 1.0;
    double F01_ = 0, F11_ = 0, a_lin_ = 0, Q_ = 0;
    std::vector<double> binom_;  // C(n-1, j), j = 0..n-1
};

/// Q = lim F(x,1) from the samples x = 10^j, j = 0..12, with extrapolation.
double compute_Q(const SpeedFunction& speed, double growth_threshold = 1e6);

/// Elementary symmetric polynomial sigma_k of the entries (sigma_0 = 1).
double elementary_symmetric(std::span<const double> lambda, int k);

}  // namespace curvlab
