#pragma once

#include "curvlab/flow.hpp"
#include "curvlab/soliton.hpp"

#include <string>
#include <vector>

namespace curvlab {

struct AsymptoticFit {
    std::string model;
    double window_lo = 0.0, window_hi = 0.0;
    std::vector<double> coefficients;
    double residual = 0.0;     // relative to the smallest retained term
    double target = 0.0;
    double relative_error = 0.0;   // |coefficient - target| / |target|
    bool residual_ok = false;
};

struct BowlExpansionFit {
    AsymptoticFit fit;          // zeta_rho - rho / (2 F(0,1)) ~ c2 / rho
    double c2 = 0.0;
    // Reduction quantities at the upper end of the window.
    double vartheta = 0.0, vartheta_target = 0.0;   // zeta_rho / rho -> 1 / (2 F(0,1))
    double xi = 0.0;                                // zeta_rho - rho / (2 F(0,1)) -> 0
    double lambda = 0.0, lambda_target = 0.0;       // rho xi -> -2 a
    std::vector<double> rho, rho_xi;                // sample points
};

/// Weighted mean of rho xi at 40 log-spaced points in [lo, hi]; weights grow
/// like rho^2 since the next term in rho xi is O(rho^-2 log rho).
BowlExpansionFit fit_bowl_expansion(const BowlProfile& bowl, double lo, double hi);

struct NeckFitRow {
    double a = 0.0;
    std::size_t lower_bound_violations = 0;
    double C_fit = 0.0;
    double binding_z = 0.0;
};

struct ShrinkerNeckFit {
    AsymptoticFit fit;
    std::vector<NeckFitRow> rows;
    bool lower_bound_ok = false;   // zero violations for every a
    bool bounded = false;          // C_fit within 2x across the three largest a
    double spread_top3 = 0.0;      // max / min of C_fit over the three largest a
};

/// Nodes where v^2 >= 2F(0,1)(1 - z^2/a^2) fails.
std::size_t lower_bound_violations(const ShrinkerProfile& p);

ShrinkerNeckFit fit_shrinker_neck(const std::vector<ShrinkerProfile>& profiles, double L);

struct DecayFit {
    double slope = 0.0;
    double residual = 0.0;         // rms deviation of log sup |u| from the line
    bool fixed_point = false;      // sup |u| vanished identically
    std::vector<double> tau, log_sup;
};

/// Slope of log sup_{|z| <= L} |v - sigma| against tau.
DecayFit measure_rescaled_decay(const FlowHistory& run, double sigma, double L, double min_range = 6.0);

}  // namespace curvlab
