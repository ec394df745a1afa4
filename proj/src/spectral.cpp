#include "curvlab/spectral.hpp"

#include "curvlab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace curvlab {

namespace {

// Orthonormal Hermite functions for e^{-x^2} dx at x, degrees 0..K.
void hermite_orthonormal(int K, double x, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(K) + 1, 0.0);
    out[0] = std::pow(std::numbers::pi, -0.25);
    if (K >= 1) out[1] = std::sqrt(2.0) * x * out[0];
    for (int k = 1; k < K; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        out[kk + 1] = std::sqrt(2.0 / (k + 1)) * x * out[kk] - std::sqrt(static_cast<double>(k) / (k + 1)) * out[kk - 1];
    }
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void split_energy(SpectralDecomposition& d) {
    double captured = 0.0;
    d.plus_sq = d.zero_sq = 0.0;
    for (std::size_t k = 0; k < d.coeffs.size(); ++k) {
        const double c2 = d.coeffs[k] * d.coeffs[k];
        captured += c2;
        const int sg = mode_sign(static_cast<int>(k), 0, d.n);
        if (sg > 0) d.plus_sq += c2;
        else if (sg == 0) d.zero_sq += c2;
    }
    d.tail_sq = std::max(0.0, d.norm_sq - captured);
    d.minus_sq = std::max(0.0, d.norm_sq - d.plus_sq - d.zero_sq);
    d.truncation_warning = d.tail_sq > 0.01 * d.norm_sq;
}

void tail_suprema(const std::vector<double>& g, std::vector<double>& G) {
    G.assign(g.size(), 0.0);
    double m = 0.0;
    for (std::size_t j = g.size(); j-- > 0;) {
        m = std::max(m, g[j]);
        G[j] = m;
    }
}

void finish_trace(GammaTrace& tr) {
    tail_suprema(tr.gamma, tr.Gamma);
    tail_suprema(tr.gamma_plus, tr.Gamma_plus);
    tail_suprema(tr.gamma_zero, tr.Gamma_zero);
    tail_suprema(tr.gamma_minus, tr.Gamma_minus);
    tr.equivalence_C = 1.0;
    std::vector<double> ks, lg;
    for (std::size_t k = 0; k < tr.Gamma.size(); ++k) {
        const double parts = tr.Gamma_plus[k] + tr.Gamma_zero[k] + tr.Gamma_minus[k];
        if (tr.Gamma[k] > 0.0 && parts > 0.0)
            tr.equivalence_C = std::max({tr.equivalence_C, parts / tr.Gamma[k], tr.Gamma[k] / parts});
        if (tr.Gamma_plus[k] > 0.0) {
            ks.push_back(static_cast<double>(k));
            lg.push_back(std::log(tr.Gamma_plus[k]));
        }
    }
    tr.plus_window_factor = ks.size() >= 2 ? std::exp(fit_slope(ks, lg)) : 0.0;
}

}  // namespace

double HermiteBasis::phi(int k, double z) const {
    double f, fz, fzz;
    phi_derivatives(k, z, f, fz, fzz);
    return f;
}

void HermiteBasis::phi_derivatives(int k, double z, double& f, double& fz, double& fzz) const {
    // d/dx psi_k = sqrt(2k) psi_{k-1} for the orthonormal functions, dz = 2 sqrt(a) dx.
    const double s = 2.0 * std::sqrt(a);
    std::vector<double> h;
    hermite_orthonormal(std::max(k, 0), z / s, h);
    const double norm = 1.0 / std::sqrt(s);
    const auto kk = static_cast<std::size_t>(k);
    f = h[kk] * norm;
    fz = k >= 1 ? std::sqrt(2.0 * k) * h[kk - 1] * norm / s : 0.0;
    fzz = k >= 2 ? std::sqrt(2.0 * k) * std::sqrt(2.0 * (k - 1)) * h[kk - 2] * norm / (s * s) : 0.0;
}

double HermiteBasis::hermite_norm_sq(int k) const {
    return 2.0 * std::sqrt(std::numbers::pi * a) * std::pow(2.0, k) * std::tgamma(k + 1.0);
}

HermiteBasis build_basis(double a, int K, int quad_order) {
    if (!(a > 0.0)) throw DomainViolation("build_basis: a must be positive");
    if (K < 0) throw DomainViolation("build_basis: K must be nonnegative");
    if (quad_order < 2 * K + 2) throw DomainViolation("build_basis: quad_order must be at least 2K + 2");
    HermiteBasis b;
    b.a = a;
    b.K = K;
    b.quad_order = quad_order;

    // Golub-Welsch: Jacobi matrix of the monic Hermite recurrence for e^{-x^2}.
    const int N = quad_order;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd off(N - 1);
    for (int i = 1; i < N; ++i) off(i - 1) = std::sqrt(0.5 * i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw QuadratureFailure("Golub-Welsch eigensolve failed");
    // Eigenvector components lose relative accuracy for the outer weights, so
    // nodes are polished by Newton on psi_N and weights use the Christoffel sum.
    const double s = 2.0 * std::sqrt(a);
    std::vector<double> h;
    for (int i = 0; i < N; ++i) {
        double x = es.eigenvalues()(i);
        for (int it = 0; it < 3; ++it) {
            hermite_orthonormal(N, x, h);
            x -= h[static_cast<std::size_t>(N)] / (std::sqrt(2.0 * N) * h[static_cast<std::size_t>(N) - 1]);
        }
        hermite_orthonormal(N - 1, x, h);
        double christoffel = 0.0;
        for (double v : h) christoffel += v * v;
        b.nodes.push_back(s * x);
        b.weights.push_back(s / christoffel);
    }

    b.values.assign(static_cast<std::size_t>(K) + 1, std::vector<double>(b.nodes.size()));
    for (std::size_t i = 0; i < b.nodes.size(); ++i) {
        hermite_orthonormal(K, b.nodes[i] / s, h);
        for (int k = 0; k <= K; ++k) b.values[static_cast<std::size_t>(k)][i] = h[static_cast<std::size_t>(k)] / std::sqrt(s);
    }

    double orth = 0.0;
    for (int j = 0; j <= K; ++j)
        for (int k = j; k <= K; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < b.nodes.size(); ++i)
                acc += b.weights[i] * b.values[static_cast<std::size_t>(j)][i] * b.values[static_cast<std::size_t>(k)][i];
            orth = std::max(orth, std::abs(acc - (j == k ? 1.0 : 0.0)));
        }
    b.orthogonality_error = orth;

    double eig = 0.0;
    for (int k = 0; k <= K; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < b.nodes.size(); ++i) {
            double f, fz, fzz;
            b.phi_derivatives(k, b.nodes[i], f, fz, fzz);
            const double r = a * fzz - 0.5 * b.nodes[i] * fz + 0.5 * k * f;
            acc += b.weights[i] * r * r;
        }
        eig = std::max(eig, std::sqrt(acc));
    }
    b.eigen_identity_error = eig;

    if (orth > 1e-10) {
        std::ostringstream os;
        os << "orthogonality error " << orth << " exceeds 1e-10 (K = " << K << ", order " << quad_order << ")";
        throw QuadratureFailure(os.str());
    }
    return b;
}

double mode_eigenvalue(int k, int l, int n) {
    return 1.0 - 0.5 * k - static_cast<double>(l) * (l + n - 2) / (2.0 * (n - 1));
}

int mode_sign(int k, int l, int n) {
    if (n < 2 || k < 0 || l < 0) throw DomainViolation("mode_sign: need n >= 2 and k, l >= 0");
    const long long v = 2LL * (n - 1) - 1LL * k * (n - 1) - 1LL * l * (l + n - 2);
    return (v > 0) - (v < 0);
}

std::vector<EigenRow> eigenvalue_table(int k_max, int l_max, int n) {
    std::vector<EigenRow> rows;
    for (int k = 0; k <= k_max; ++k)
        for (int l = 0; l <= l_max; ++l) rows.push_back({k, l, n, mode_eigenvalue(k, l, n), mode_sign(k, l, n)});
    return rows;
}

double SpectralDecomposition::reconstruct(const HermiteBasis& basis, double z) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) acc += coeffs[k] * basis.phi(static_cast<int>(k), z);
    return acc;
}

SpectralDecomposition decompose(const HermiteBasis& basis, const std::function<double(double)>& u, int n) {
    SpectralDecomposition d;
    d.n = n;
    d.a = basis.a;
    d.coeffs.assign(static_cast<std::size_t>(basis.K) + 1, 0.0);
    for (int k = 0; k <= basis.K; ++k) d.eigenvalues.push_back(mode_eigenvalue(k, 0, n));
    for (std::size_t i = 0; i < basis.nodes.size(); ++i) {
        const double ui = u(basis.nodes[i]);
        d.norm_sq += basis.weights[i] * ui * ui;
        for (std::size_t k = 0; k < d.coeffs.size(); ++k) d.coeffs[k] += basis.weights[i] * ui * basis.values[k][i];
    }
    split_energy(d);
    return d;
}

SpectralDecomposition decompose_samples(const HermiteBasis& basis, double x0, double dx,
                                        const std::vector<double>& u, int n) {
    SpectralDecomposition d;
    d.n = n;
    d.a = basis.a;
    d.coeffs.assign(static_cast<std::size_t>(basis.K) + 1, 0.0);
    for (int k = 0; k <= basis.K; ++k) d.eigenvalues.push_back(mode_eigenvalue(k, 0, n));
    const double s = 2.0 * std::sqrt(basis.a);
    std::vector<double> h;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double z = x0 + dx * static_cast<double>(i);
        const double w = ((i == 0 || i + 1 == u.size()) ? 0.5 : 1.0) * dx * std::exp(-z * z / (4.0 * basis.a));
        d.norm_sq += w * u[i] * u[i];
        hermite_orthonormal(basis.K, z / s, h);
        for (std::size_t k = 0; k < d.coeffs.size(); ++k) d.coeffs[k] += w * u[i] * h[k] / std::sqrt(s);
    }
    split_energy(d);
    return d;
}

double cutoff_chi(double s) {
    const double x = std::abs(s);
    if (x <= 0.5) return 1.0;
    if (x >= 1.0) return 0.0;
    const double t = 2.0 * (x - 0.5);
    const double t4 = t * t * t * t;
    return 1.0 - t4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t);
}

GammaTrace gamma_trace_from_run(const FlowHistory& run, const HermiteBasis& basis, double sigma, int n,
                                const GammaTraceOptions& opt) {
    if (run.t.size() < 2) throw WindowTooShort("gamma trace: run has fewer than two snapshots");
    const double t_end = run.t.back();
    const auto J = static_cast<std::size_t>(std::floor(t_end - run.t.front() + 1e-9));
    if (J < 1) throw WindowTooShort("gamma trace: run shorter than one window");
    const std::size_t m = run.u.front().size();
    const double x_last = run.x0 + run.dx * static_cast<double>(m - 1);
    GammaTrace tr;
    tr.r = opt.r;
    tr.cutoff_radius = opt.cutoff_radius > 0.0 ? opt.cutoff_radius : std::min(std::abs(run.x0), std::abs(x_last));

    // sup |u| on |z| <= L per snapshot, then running sup forward in time.
    std::vector<double> supu(run.t.size(), 0.0);
    for (std::size_t s = 0; s < run.t.size(); ++s)
        for (std::size_t i = 0; i < m; ++i) {
            const double z = run.x0 + run.dx * static_cast<double>(i);
            if (std::abs(z) <= opt.L) supu[s] = std::max(supu[s], std::abs(run.u[s][i] - sigma));
        }

    tr.gamma.assign(J, 0.0);
    tr.gamma_plus.assign(J, 0.0);
    tr.gamma_zero.assign(J, 0.0);
    tr.gamma_minus.assign(J, 0.0);
    tr.delta.assign(J, 0.0);
    for (std::size_t j = 0; j < J; ++j) {
        const double hi = t_end - static_cast<double>(j), lo = hi - 1.0;
        double delta = 0.0;
        for (std::size_t s = 0; s < run.t.size(); ++s)
            if (run.t[s] <= hi + 1e-12) delta = std::max(delta, supu[s]);
        tr.delta[j] = delta;
        const double scale = delta > 0.0 ? std::pow(delta, opt.r) : 1.0;
        std::vector<double> w(m);
        for (std::size_t s = 0; s < run.t.size(); ++s) {
            if (run.t[s] < lo - 1e-12 || run.t[s] > hi + 1e-12) continue;
            for (std::size_t i = 0; i < m; ++i) {
                const double z = run.x0 + run.dx * static_cast<double>(i);
                w[i] = (run.u[s][i] - sigma) * cutoff_chi(scale * z / tr.cutoff_radius);
            }
            const auto d = decompose_samples(basis, run.x0, run.dx, w, n);
            tr.gamma[j] = std::max(tr.gamma[j], d.norm_sq);
            tr.gamma_plus[j] = std::max(tr.gamma_plus[j], d.plus_sq);
            tr.gamma_zero[j] = std::max(tr.gamma_zero[j], d.zero_sq);
            tr.gamma_minus[j] = std::max(tr.gamma_minus[j], d.minus_sq);
        }
    }
    finish_trace(tr);
    return tr;
}

GammaTrace gamma_trace_from_sequences(std::vector<double> plus, std::vector<double> zero, std::vector<double> minus) {
    if (plus.size() != zero.size() || plus.size() != minus.size())
        throw DomainViolation("gamma_trace_from_sequences: sequences differ in length");
    GammaTrace tr;
    tr.gamma_plus = std::move(plus);
    tr.gamma_zero = std::move(zero);
    tr.gamma_minus = std::move(minus);
    tr.gamma.resize(tr.gamma_plus.size());
    for (std::size_t j = 0; j < tr.gamma.size(); ++j)
        tr.gamma[j] = tr.gamma_plus[j] + tr.gamma_zero[j] + tr.gamma_minus[j];
    tr.delta.assign(tr.gamma.size(), 0.0);
    finish_trace(tr);
    return tr;
}

std::string to_string(Dominance d) {
    switch (d) {
        case Dominance::PositiveDominated: return "positive-dominated";
        case Dominance::NeutralDominated: return "neutral-dominated";
        case Dominance::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

DominanceVerdict merle_zaag_classifier(const GammaTrace& trace, double slope_threshold, double floor) {
    DominanceVerdict v;
    const std::size_t J = trace.windows();
    if (J < 8) return v;
    const std::size_t start = J / 2;
    std::vector<double> ks, lp, ln;
    double rp = 0.0, rn = 0.0;
    for (std::size_t k = start; k < J; ++k) {
        const double gp = trace.Gamma_plus[k], g0 = trace.Gamma_zero[k], gm = trace.Gamma_minus[k];
        const double tiny = 1e-300;
        const double ratio_p = (g0 + gm + tiny) / (gp + tiny);
        const double ratio_n = (gp + gm + tiny) / (g0 + tiny);
        ks.push_back(static_cast<double>(k));
        lp.push_back(std::log(ratio_p));
        ln.push_back(std::log(ratio_n));
        rp = std::max(rp, ratio_p);
        rn = std::max(rn, ratio_n);
    }
    v.windows_used = ks.size();
    v.slope_positive = fit_slope(ks, lp);
    v.slope_neutral = fit_slope(ks, ln);
    v.ratio_positive = rp;
    v.ratio_neutral = rn;
    const bool pos = v.slope_positive < slope_threshold || rp <= floor;
    const bool neu = v.slope_neutral < slope_threshold || rn <= floor;
    if (pos && !neu) v.verdict = Dominance::PositiveDominated;
    else if (neu && !pos) v.verdict = Dominance::NeutralDominated;
    else if (pos && neu) v.verdict = rp < rn ? Dominance::PositiveDominated : Dominance::NeutralDominated;
    return v;
}

}  // namespace curvlab
