#pragma once

#include "curvlab/ode.hpp"
#include "curvlab/speed.hpp"

#include <utility>
#include <vector>

namespace curvlab {

struct BowlOptions {
    double rho_start = 1e-4;
    double tol = 1e-10;            // relative local error
    double atol = 1e-13;
    double residual_tol = 1e-6;    // defect of the dense solution, relative to 1+|zeta_rhorho|
};

/// Translator profile: zeta_rhorho = (1 + zeta_rho^2) f(zeta_rho/rho, 1/2).
struct BowlProfile {
    explicit BowlProfile(SpeedFunction s) : speed(std::move(s)) {}
    SpeedFunction speed;
    BowlOptions options;
    double rho_max = 0.0;
    // Nodes, including rho = 0.
    std::vector<double> rho, zeta, zeta_rho, zeta_rhorho;
    double tip_curvature = 0.0;          // extrapolated from the solved profile
    double C_bound = 0.0;                // C with rho/C <= zeta_rho <= C rho
    double max_residual = 0.0;           // node residual, relative
    bool residual_ok = false;
    double error_estimate = 0.0;         // summed local error estimates
    double min_margin_U = 0.0;           // min over nodes of (z/y)/F(0,1) - 1
    DenseTrajectory<2> trajectory;       // (zeta, zeta_rho) from rho_start

    double zeta_at(double r) const;
    double zeta_rho_at(double r) const;
    /// Radius at height h (inverse of zeta).
    double radius_at_height(double h) const;
};

BowlProfile solve_bowl(const SpeedFunction& speed, double rho_max, const BowlOptions& opt = {});

/// Bowl solved on [0, rho_max] with zeta(rho_max) > height.
BowlProfile solve_bowl_to_height(const SpeedFunction& speed, double height, const BowlOptions& opt = {});

/// Right-hand side of the translator ODE at (rho, zeta_rho).
double bowl_rhs(const SpeedFunction& speed, double rho, double p);

struct ShrinkerOptions {
    double theta = 0.9;
    double Theta = 0.0;       // 0 selects 2 F(1,1)/F(0,1)
    int k_first = 4;           // rho_k = 2^-k
    int k_last = 16;
    double tol = 1e-11;
    double atol = 1e-13;
    double cauchy_tol = 1e-9;  // relative sup difference between successive profiles
    double residual_tol = 1e-6;
    double M = 50.0;
    double z_spacing = 0.0;    // 0 selects min(0.01 a, 0.05)
};

struct ShrinkerProfile {
    explicit ShrinkerProfile(SpeedFunction s) : speed(std::move(s)) {}
    SpeedFunction speed;
    ShrinkerOptions options;
    double a = 0.0;
    double theta = 0.0, Theta = 0.0;
    double c = 0.0, K = 0.0, L0 = 0.0;
    double z_stop = 0.0;       // lowest z reached by the integration
    double rho_end = 0.0;
    double rho_start = 0.0;    // start of the accepted (finest) IVP
    // psi-grid nodes (rho = 0 prepended).
    std::vector<double> rho, psi, psi_rho, psi_rhorho, Lambda, B;
    // z-representation on [L0, a].
    std::vector<double> z, v, v_z, v_zz, w;
    std::vector<double> z_rho;   // rho(z) at each z-node
    double tip_curvature = 0.0;
    double max_residual = 0.0;
    bool residual_ok = false;
    double max_inversion_error = 0.0;
    double error_estimate = 0.0;
    double Lambda_max = 0.0, Lambda_min = 0.0, Lambda0 = 0.0, C_f = 0.0;
    double monitor_identity_error = 0.0;
    bool lambda_bound_ok = false;
    double min_rho_psi_rho_minus_psi = 0.0;
    // Cauchy history of the rho_k sequence.
    std::vector<double> rho_k_used;
    std::vector<double> cauchy_diffs;
    DenseTrajectory<2> trajectory;

    double psi_at(double r) const;
    double psi_rho_at(double r) const;
    /// rho with a - psi(rho)/a = zq.
    double rho_of_z(double zq) const;
    /// w in the rho form (finite at the tip).
    double w_at_rho(double r) const;
};

ShrinkerProfile solve_shrinker(const SpeedFunction& speed, double a, const ShrinkerOptions& opt = {});

/// c = inf_{t >= 0} 1 / gamma-dot^1(t, 1, ..., 1), sampled.
double measure_c(const SpeedFunction& speed);
/// K = max{1, 6 F(0,1), 17/c}.
double neck_K(const SpeedFunction& speed, double c);

struct WDiagnostic {
    std::vector<double> z, w, wbar;
    double K = 0.0, c = 0.0, L0 = 0.0;
    double z_M = 0.0;
    bool M_applicable = false;
    bool w_gt_2 = false;
    double min_w_minus_2 = 0.0;
    bool w_le_wbar = false;       // on (sqrt K, z_M)
    std::size_t wbar_violations = 0;
    bool boundary_ok = false;     // w(z_M) < wbar(z_M)
    double tip_limit = 0.0;       // extrapolated to z = a
    double tip_target = 0.0;      // 2 F(1,1)/F(0,1)
};

WDiagnostic shrinker_w_diagnostic(const ShrinkerProfile& p);

struct UpperBoundReport {
    double L = 0.0;
    double C_fit = 0.0;
    double binding_z = 0.0;
    bool strict_at_L0 = false;
    std::size_t lower_bound_violations = 0;  // nodes where the lower bound fails
};

UpperBoundReport shrinker_upper_bound_check(const ShrinkerProfile& p, double L);

struct GapRow {
    double a = 0.0;
    double gap = 0.0;       // sup_{rho <= M} |psi_a - zeta|
    double gap_rho = 0.0;   // same for the first derivative
};

std::vector<GapRow> shrinker_to_bowl_convergence(const SpeedFunction& speed, const std::vector<double>& a_list,
                                                 double M, const ShrinkerOptions& opt = {},
                                                 const BowlOptions& bopt = {});

}  // namespace curvlab
