#pragma once

#include "curvlab/soliton.hpp"
#include "curvlab/speed.hpp"

#include <functional>
#include <string>
#include <vector>

namespace curvlab {

enum class Representation { Radial, Vertical, Rescaled };
enum class TimeScheme { ExplicitRK2, SemiImplicit };
enum class BoundaryMode { Dirichlet, Extrapolate };

std::string to_string(Representation r);
std::string to_string(TimeScheme s);
std::string to_string(BoundaryMode b);
Representation representation_from_string(const std::string& s);
TimeScheme time_scheme_from_string(const std::string& s);
BoundaryMode boundary_mode_from_string(const std::string& s);

/// Reference solution used for Dirichlet data: value at (x, t).
using ReferenceFn = std::function<double(double, double)>;

/// Nodal values on the uniform grid x_i = x0 + i dx.
///
/// Radial: r(z, t). Vertical: f(r, t) with x0 = 0 at the axis. Rescaled: v(z, tau).
struct FlowState {
    Representation rep = Representation::Radial;
    double x0 = 0.0;
    double dx = 0.0;
    std::vector<double> u;
    double t = 0.0;

    std::size_t size() const { return u.size(); }
    double x(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
};

FlowState make_state(Representation rep, double x_lo, double x_hi, std::size_t intervals,
                     const std::function<double(double)>& init, double t0 = 0.0);

struct FlowOptions {
    TimeScheme scheme = TimeScheme::ExplicitRK2;
    BoundaryMode boundary = BoundaryMode::Dirichlet;
    ReferenceFn reference;   // required for Dirichlet boundaries
    double cfl_safety = 0.4;
    double r_min = 1e-6;
    double dt = 0.0;         // fixed step used by the experiment drivers; 0 selects the CFL limit
};

struct FlowHistory {
    Representation rep = Representation::Radial;
    double x0 = 0.0, dx = 0.0;
    std::vector<double> t;
    std::vector<std::vector<double>> u;

    void record(const FlowState& s);
    FlowState snapshot(std::size_t i) const;
};

class FlowSolver {
public:
    FlowSolver(SpeedFunction speed, FlowOptions opt);

    const SpeedFunction& speed() const { return speed_; }
    const FlowOptions& options() const { return opt_; }

    /// Time derivative at every node (boundary entries are zero).
    std::vector<double> rhs(const FlowState& s) const;
    /// Coefficient of u_xx in the linearized operator, per node.
    std::vector<double> diffusion(const FlowState& s) const;
    /// safety * dx^2 / (2 max diffusion).
    double max_stable_dt(const FlowState& s) const;

    FlowState step(const FlowState& s, double dt) const;
    /// Steps to t_end with dt <= dt_max (0 selects the CFL limit each step).
    /// Records every `stride` steps and the final state when `history` is set.
    FlowState advance(FlowState s, double t_end, double dt_max = 0.0, FlowHistory* history = nullptr,
                      std::size_t stride = 1) const;

    void apply_boundary(FlowState& s) const;

private:
    double node_rhs(const FlowState& s, std::size_t i, double* coeff) const;
    FlowState step_rk2(const FlowState& s, double dt) const;
    FlowState step_semi_implicit(const FlowState& s, double dt) const;

    SpeedFunction speed_;
    FlowOptions opt_;
};

FlowState step_radial(const FlowSolver& solver, const FlowState& s, double dt);
FlowState step_vertical(const FlowSolver& solver, const FlowState& s, double dt);
FlowState step_rescaled(const FlowSolver& solver, const FlowState& s, double dt);

/// sigma = sqrt(2 F(0,1)), the cylinder radius of the rescaled flow.
double cylinder_radius(const SpeedFunction& speed);

struct LinearizationReport {
    double a = 0.0;
    double dx = 0.0;
    double eps = 0.0;
    std::size_t directions = 0;
    double max_rel_deviation = 0.0;
    double tolerance = 0.0;   // max(1e-4, 10 dx^2)
    bool pass = false;
};

/// Compares the central difference in eps of the discrete rescaled operator at
/// v = sigma with a u_zz - z u_z / 2 + u along random cosine directions.
LinearizationReport linearize_rescaled_at_cylinder(const SpeedFunction& speed, double dx, double window,
                                                   std::size_t directions = 20, unsigned seed = 7,
                                                   double eps = 1e-6);

/// erf(z / (2 sqrt t)): the odd-reflected heat kernel started from 1 on z > 0.
double heat_barrier_psi(double z, double t);

struct ExtinctionReport {
    std::vector<double> z;
    std::vector<double> T;       // estimated extinction time per node
    double min_margin = 0.0;     // min of r^2 - 2F(0,1)(T - t) over the history
    bool ok = false;
};

struct TipDiagnostics {
    double tail_limit = 0.0;     // lim r r_z from the tail window
    double tip_speed = 0.0;      // level-set displacement rate
    double tail_target = 0.0;    // F(0,1) / tip_speed
    double rrz_max = 0.0;
    double rrz_bound = 0.0;      // 4 F(0,1) / tip_speed
    bool rrz_bound_ok = false;
};

/// Average of r r_z over nodes with z in [z_lo, z_hi].
double rrz_tail_limit(const FlowState& s, double z_lo, double z_hi);
/// Rate at which the level set {r = r_star} moves in z over the history.
double level_set_speed(const FlowHistory& h, double r_star);
TipDiagnostics tip_neck_diagnostics(const FlowHistory& h, const SpeedFunction& speed, double r_star,
                                    double tail_lo, double tail_hi);
ExtinctionReport extinction_check(const FlowHistory& h, const SpeedFunction& speed, double tol);

// Experiment drivers shared by the CLI and the acceptance suite. `base` supplies
// the scheme, boundary mode, CFL safety, r floor and step; the driver sets the
// reference data.

struct CylinderRegression {
    std::vector<double> dx, dt, max_error;
    std::vector<double> ratios;
    double r_exact = 0.0;
};

/// Shrinking cylinder r0 on [-half, half] to time t_end on successively halved
/// grids, dt / dx^2 fixed at the CFL value of the coarsest grid (base.dt is unused).
CylinderRegression cylinder_regression(const SpeedFunction& speed, double r0, double half, double t_end,
                                       double dx0, int levels, const FlowOptions& base = {});

struct TranslationRun {
    double speed_measured = 0.0;
    double r_star = 0.0;
    double z_star_start = 0.0, z_star_end = 0.0;
    double max_profile_error = 0.0;   // against the translated bowl
    FlowHistory history;
};

/// Radial bowl window [z_lo, z_hi] evolved over t_end with Dirichlet data from
/// the translating bowl; the level set of r(z_mid, 0) is tracked.
TranslationRun bowl_translation(const SpeedFunction& speed, double z_lo, double z_hi, double dx, double t_end,
                                const FlowOptions& base = {});

/// Same check in the vertical representation on [0, r_hi], which contains the tip.
TranslationRun bowl_translation_vertical(const SpeedFunction& speed, double r_hi, double dx, double t_end,
                                         const FlowOptions& base = {});

struct ModeRun {
    int k = 0;
    double expected_rate = 0.0;    // 1 - k/2
    double measured_rate = 0.0;    // log(c(tau_end) / c(0)) / tau_end
    double amplitude_start = 0.0, amplitude_end = 0.0;
    double drift = 0.0;            // |c(tau_end) - c(0)|
    FlowHistory history;
};

/// Seeds v = sigma + eps H_k(z / (2 sqrt a)) on |z| <= half and evolves the
/// rescaled flow; Dirichlet data follow the linear solution.
ModeRun run_mode_seed(const SpeedFunction& speed, int k, double eps, double tau_end, double half, double dx,
                      std::size_t stride = 20, const FlowOptions& base = {});

/// Exact rescaled history of the downward translating bowl:
/// v(z, tau) = e^{tau/2} zeta^{-1}(e^{-tau}/2 - e^{-tau/2} z).
double rescaled_bowl_value(const BowlProfile& bowl, double z, double tau);

/// Rescaled flow run seeded from the rescaled bowl at tau0 on |z| <= half, with
/// Dirichlet data from the exact history.
FlowHistory rescaled_bowl_run(const BowlProfile& bowl, double tau0, double tau1, double half, double dx,
                              std::size_t stride = 50, const FlowOptions& base = {});

/// Max over nodes of |v_tau| for the stationary profile v sampled on the grid.
double stationarity_residual(const SpeedFunction& speed, const FlowState& s);

}  // namespace curvlab
