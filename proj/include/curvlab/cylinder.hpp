#pragma once

#include "curvlab/speed.hpp"

#include <functional>
#include <vector>

namespace curvlab {

/// Value and first two derivatives of a rotationally symmetric height function.
struct Jet {
    double u = 0.0, u_z = 0.0, u_zz = 0.0;
};

/// Normal graph {x + u(z) nu} over the cylinder R x S^{n-1}(r).
struct CylinderGraph {
    double r = 1.0;
    int n = 3;
    std::vector<double> z;
    std::vector<Jet> jet;

    // Exact principal curvatures of the surface of revolution of radius r + u.
    double kappa_axial(std::size_t i) const;
    double kappa_rot(std::size_t i) const;
    /// sup over nodes of |u|/r + |u_z| + r|u_zz|.
    double smallness() const;
};

CylinderGraph make_cylinder_graph(double r, int n, double z_lo, double z_hi, std::size_t intervals,
                                  const std::function<Jet(double)>& u);
/// Same graph with u scaled by s.
CylinderGraph scaled(const CylinderGraph& g, const std::function<Jet(double)>& u, double s);

struct ExpansionReport {
    double sup_error = 0.0;
    double sup_scale = 0.0;   // denominator of the quadratic-smallness ratio
    double ratio = 0.0;       // sup_error / sup_scale (0 when both vanish)
    // Covariant-component form (A(e_theta, e_theta) in the cylinder metric).
    double sup_error_covariant = 0.0;
};

/// Exact curvatures against 1/r - u/r^2 (rotational) and -u_zz (axial).
/// Scale: sup of u^2/r^3 + u_z^2/r + r u_zz^2.
ExpansionReport expansion_error_A(const CylinderGraph& g);

/// Exact G against F(0,1)/r - a u_zz - F(0,1) u / r^2. Scale: sup of u^2 + u_z^2 + u_zz^2.
ExpansionReport expansion_error_G(const CylinderGraph& g, const SpeedFunction& speed);

/// Diagonal symmetric 2-tensor in the principal frame (axial, rotational).
struct FrameTensor {
    double axial = 0.0, rot = 0.0;
};

/// Hessian on the graph of a rotationally symmetric ambient function f(z).
std::vector<FrameTensor> graph_hessian(const CylinderGraph& g, const std::function<Jet(double)>& f);

struct TraceReport {
    std::vector<double> exact;      // d/dt gamma(A + tS) at t = 0
    std::vector<double> linear;     // gamma-dot(A_Sigma) S
    double sup_error = 0.0;
    double ratio = 0.0;             // sup_error / (smallness * sup |S|)
};

TraceReport trace_gamma(const CylinderGraph& g, const SpeedFunction& speed, const std::vector<FrameTensor>& S);

struct ScalingRow {
    double scale = 0.0;
    double sup_error = 0.0;
    double constant = 0.0;
};

/// Fitted quadratic constants of both expansions as u is halved `halvings` times.
struct ScalingStudy {
    std::vector<ScalingRow> rows_A, rows_G;
    double max_change_A = 0.0, max_change_G = 0.0;   // relative change between successive constants
};

ScalingStudy expansion_scaling(const SpeedFunction& speed, double r, const std::function<Jet(double)>& u,
                               double z_lo, double z_hi, std::size_t intervals, int halvings);

}  // namespace curvlab
