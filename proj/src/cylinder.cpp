#include "curvlab/cylinder.hpp"

#include "curvlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace curvlab {

double CylinderGraph::kappa_axial(std::size_t i) const {
    const Jet& j = jet[i];
    return -j.u_zz / std::pow(1.0 + j.u_z * j.u_z, 1.5);
}

double CylinderGraph::kappa_rot(std::size_t i) const {
    const Jet& j = jet[i];
    return 1.0 / ((r + j.u) * std::sqrt(1.0 + j.u_z * j.u_z));
}

double CylinderGraph::smallness() const {
    double m = 0.0;
    for (const Jet& j : jet) m = std::max(m, std::abs(j.u) / r + std::abs(j.u_z) + r * std::abs(j.u_zz));
    return m;
}

CylinderGraph make_cylinder_graph(double r, int n, double z_lo, double z_hi, std::size_t intervals,
                                  const std::function<Jet(double)>& u) {
    if (!(r > 0.0)) throw DomainViolation("cylinder radius must be positive");
    if (n < 2) throw DomainViolation("cylinder dimension must be at least 2");
    if (intervals < 1 || !(z_hi > z_lo)) throw DomainViolation("cylinder graph needs a nonempty grid");
    CylinderGraph g;
    g.r = r;
    g.n = n;
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double z = z_lo + (z_hi - z_lo) * static_cast<double>(i) / static_cast<double>(intervals);
        g.z.push_back(z);
        g.jet.push_back(u(z));
        if (!(r + g.jet.back().u > 0.0)) throw DomainViolation("graph crosses the axis");
    }
    return g;
}

CylinderGraph scaled(const CylinderGraph& g, const std::function<Jet(double)>& u, double s) {
    CylinderGraph out = g;
    for (std::size_t i = 0; i < g.z.size(); ++i) {
        const Jet j = u(g.z[i]);
        out.jet[i] = {s * j.u, s * j.u_z, s * j.u_zz};
    }
    return out;
}

ExpansionReport expansion_error_A(const CylinderGraph& g) {
    ExpansionReport rep;
    const double r = g.r;
    for (std::size_t i = 0; i < g.z.size(); ++i) {
        const Jet& j = g.jet[i];
        const double e_rot = std::abs(g.kappa_rot(i) - (1.0 / r - j.u / (r * r)));
        const double e_ax = std::abs(g.kappa_axial(i) + j.u_zz);
        rep.sup_error = std::max({rep.sup_error, e_rot, e_ax});
        // Covariant components divided by the cylinder metric: A_thth / r^2 and A_zz.
        const double w = std::sqrt(1.0 + j.u_z * j.u_z);
        const double cov_rot = (r + j.u) / (r * r * w);
        const double cov_ax = -j.u_zz / w;
        rep.sup_error_covariant = std::max({rep.sup_error_covariant, std::abs(cov_rot - (1.0 / r + j.u / (r * r))),
                                            std::abs(cov_ax + j.u_zz)});
        rep.sup_scale = std::max(rep.sup_scale, j.u * j.u / (r * r * r) + j.u_z * j.u_z / r + r * j.u_zz * j.u_zz);
    }
    rep.ratio = rep.sup_scale > 0.0 ? rep.sup_error / rep.sup_scale : 0.0;
    return rep;
}

ExpansionReport expansion_error_G(const CylinderGraph& g, const SpeedFunction& speed) {
    if (speed.n() != g.n) throw DomainViolation("speed dimension differs from the graph dimension");
    ExpansionReport rep;
    const double r = g.r, F01 = speed.F01(), a = speed.a_lin();
    for (std::size_t i = 0; i < g.z.size(); ++i) {
        const Jet& j = g.jet[i];
        const double x = g.kappa_axial(i), y = g.kappa_rot(i);
        if (!speed.in_cone_xy(x, y)) throw ConeViolation("graph curvatures leave the cone");
        const double G = speed.F(x, y);
        const double lin = F01 / r - a * j.u_zz - F01 * j.u / (r * r);
        rep.sup_error = std::max(rep.sup_error, std::abs(G - lin));
        rep.sup_scale = std::max(rep.sup_scale, j.u * j.u + j.u_z * j.u_z + j.u_zz * j.u_zz);
    }
    rep.ratio = rep.sup_scale > 0.0 ? rep.sup_error / rep.sup_scale : 0.0;
    return rep;
}

std::vector<FrameTensor> graph_hessian(const CylinderGraph& g, const std::function<Jet(double)>& f) {
    // Arc length s along the profile: ds = sqrt(1 + u_z^2) dz, radius R = r + u.
    std::vector<FrameTensor> out;
    for (std::size_t i = 0; i < g.z.size(); ++i) {
        const Jet& j = g.jet[i];
        const Jet fj = f(g.z[i]);
        const double w2 = 1.0 + j.u_z * j.u_z;
        const double fs = fj.u_z / std::sqrt(w2);
        const double fss = (fj.u_zz - fj.u_z * j.u_z * j.u_zz / w2) / w2;
        const double Rs = j.u_z / std::sqrt(w2);
        out.push_back({fss, fs * Rs / (g.r + j.u)});
    }
    return out;
}

TraceReport trace_gamma(const CylinderGraph& g, const SpeedFunction& speed, const std::vector<FrameTensor>& S) {
    if (S.size() != g.z.size()) throw DomainViolation("trace_gamma: one tensor per node required");
    const int n = speed.n();
    // gamma-dot at A_Sigma = (0, 1/r, ..., 1/r) is 0-homogeneous.
    const double g1 = speed.F_x(0.0, 1.0);
    const double gi = speed.F_y(0.0, 1.0) / (n - 1);
    TraceReport rep;
    double smax = 0.0;
    std::vector<double> lam(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < g.z.size(); ++i) {
        const double x = g.kappa_axial(i), y = g.kappa_rot(i);
        if (!speed.in_cone_xy(x, y)) throw ConeViolation("graph curvatures leave the cone");
        lam[0] = x;
        std::fill(lam.begin() + 1, lam.end(), y);
        const auto grad = speed.gradient(lam);
        double ex = grad[0] * S[i].axial;
        for (int k = 1; k < n; ++k) ex += grad[static_cast<std::size_t>(k)] * S[i].rot;
        const double lin = g1 * S[i].axial + (n - 1) * gi * S[i].rot;
        rep.exact.push_back(ex);
        rep.linear.push_back(lin);
        rep.sup_error = std::max(rep.sup_error, std::abs(ex - lin));
        smax = std::max({smax, std::abs(S[i].axial), std::abs(S[i].rot)});
    }
    const double eps = g.smallness();
    rep.ratio = eps > 0.0 && smax > 0.0 ? rep.sup_error / (eps * smax) : 0.0;
    return rep;
}

ScalingStudy expansion_scaling(const SpeedFunction& speed, double r, const std::function<Jet(double)>& u,
                               double z_lo, double z_hi, std::size_t intervals, int halvings) {
    const CylinderGraph base = make_cylinder_graph(r, speed.n(), z_lo, z_hi, intervals, u);
    ScalingStudy st;
    for (int h = 0; h <= halvings; ++h) {
        const double s = std::pow(0.5, h);
        const CylinderGraph g = scaled(base, u, s);
        const auto ea = expansion_error_A(g);
        const auto eg = expansion_error_G(g, speed);
        st.rows_A.push_back({s, ea.sup_error, ea.ratio});
        st.rows_G.push_back({s, eg.sup_error, eg.ratio});
        if (h > 0) {
            const auto change = [](double prev, double cur) { return std::abs(cur - prev) / std::abs(prev); };
            st.max_change_A = std::max(st.max_change_A, change(st.rows_A[h - 1].constant, ea.ratio));
            st.max_change_G = std::max(st.max_change_G, change(st.rows_G[h - 1].constant, eg.ratio));
        }
    }
    return st;
}

}  // namespace curvlab
