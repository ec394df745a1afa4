#pragma once

#include "curvlab/flow.hpp"

#include <functional>
#include <string>
#include <vector>

namespace curvlab {

/// Orthonormal Hermite functions for the weight e^{-z^2/(4a)} on the line,
/// phi_k(z) proportional to H_k(z / (2 sqrt a)), with Gauss-Hermite nodes.
struct HermiteBasis {
    double a = 1.0;
    int K = 0;
    int quad_order = 0;
    std::vector<double> nodes;     // z_i
    std::vector<double> weights;   // integrate g(z) e^{-z^2/4a} dz
    std::vector<std::vector<double>> values;   // values[k][i] = phi_k(z_i)
    double orthogonality_error = 0.0;          // max |<phi_j, phi_k> - delta_jk|
    double eigen_identity_error = 0.0;         // max weighted residual of the eigen-identity

    double phi(int k, double z) const;
    /// phi_k and its first two z-derivatives.
    void phi_derivatives(int k, double z, double& f, double& fz, double& fzz) const;
    /// Weighted norm of H_k(z / (2 sqrt a)): 2 sqrt(pi a) 2^k k!.
    double hermite_norm_sq(int k) const;
};

HermiteBasis build_basis(double a, int K, int quad_order);

/// mu_{k,l} = 1 - k/2 - l(l+n-2)/(2(n-1)).
double mode_eigenvalue(int k, int l, int n);
/// Exact sign of mu_{k,l} (integer arithmetic).
int mode_sign(int k, int l, int n);

struct EigenRow {
    int k = 0, l = 0, n = 0;
    double mu = 0.0;
    int sign = 0;
};
std::vector<EigenRow> eigenvalue_table(int k_max, int l_max, int n);

struct SpectralDecomposition {
    int n = 3;
    double a = 1.0;
    std::vector<double> coeffs;        // l = 0 coefficients in the orthonormal basis
    std::vector<double> eigenvalues;   // mu_{k,0}
    double norm_sq = 0.0;
    double plus_sq = 0.0, zero_sq = 0.0, minus_sq = 0.0;   // minus includes the unresolved tail
    double tail_sq = 0.0;
    bool truncation_warning = false;   // tail above 1% of the total

    double reconstruct(const HermiteBasis& basis, double z) const;
};

/// Coefficients by Gauss-Hermite quadrature of a callable profile.
SpectralDecomposition decompose(const HermiteBasis& basis, const std::function<double(double)>& u, int n);
/// Coefficients by the trapezoid rule on uniform samples (zero outside the grid).
SpectralDecomposition decompose_samples(const HermiteBasis& basis, double x0, double dx,
                                        const std::vector<double>& u, int n);

/// C^3 smoothstep bump: 1 on |s| <= 1/2, 0 on |s| >= 1, s chi'(s) <= 0.
double cutoff_chi(double s);

struct GammaTraceOptions {
    double r = 1e-4;
    double L = 10.0;               // sup window for delta_k
    double cutoff_radius = 0.0;    // 0 selects the grid half-width
};

/// Windowed weighted norms of the projections of (v - sigma) chi; window j is
/// [tau_end - j - 1, tau_end - j].
struct GammaTrace {
    double r = 1e-4;
    double cutoff_radius = 0.0;
    std::vector<double> delta;
    std::vector<double> gamma, gamma_plus, gamma_zero, gamma_minus;
    std::vector<double> Gamma, Gamma_plus, Gamma_zero, Gamma_minus;
    double equivalence_C = 1.0;     // C^{-1} Gamma <= sum of parts <= C Gamma
    double plus_window_factor = 0.0;   // fitted Gamma^+_{k+1} / Gamma^+_k

    std::size_t windows() const { return Gamma.size(); }
};

GammaTrace gamma_trace_from_run(const FlowHistory& run, const HermiteBasis& basis, double sigma, int n,
                                const GammaTraceOptions& opt = {});

/// Builds a trace from given tail sequences (used for constructed inputs).
GammaTrace gamma_trace_from_sequences(std::vector<double> plus, std::vector<double> zero, std::vector<double> minus);

enum class Dominance { PositiveDominated, NeutralDominated, Inconclusive };
std::string to_string(Dominance d);

struct DominanceVerdict {
    Dominance verdict = Dominance::Inconclusive;
    double slope_positive = 0.0;   // per-window slope of log((G0 + G-) / G+)
    double slope_neutral = 0.0;    // per-window slope of log((G+ + G-) / G0)
    double ratio_positive = 0.0;   // max of (G0 + G-) / G+ over the fitted windows
    double ratio_neutral = 0.0;
    std::size_t windows_used = 0;
};

/// Least squares on the log-ratios over the last half of the windows. A ratio
/// counts as vanishing when its slope is below `slope_threshold` or it stays
/// below `floor` throughout.
DominanceVerdict merle_zaag_classifier(const GammaTrace& trace, double slope_threshold = -0.1,
                                       double floor = 1e-3);

}  // namespace curvlab
