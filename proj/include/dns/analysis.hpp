#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dns/field.hpp"
#include "dns/interpolation.hpp"
#include "dns/scheme.hpp"

namespace dns {

// ---------------------------------------------------------------------------
// Energy ledger
// ---------------------------------------------------------------------------

struct LedgerRow {
  int n = 0;
  double t = 0.0;
  /// integral of |v_n - w_n|^2 / (2h), with w_n the back-traced previous field.
  double kinetic_shifted = 0.0;
  /// integral of |v_n - v_{n-1}|^2 / (2h).
  double kinetic_plain = 0.0;
  /// integral of |D v_n|^2 and of |D v_{n-1}|^2.
  double dirichlet = 0.0;
  double dirichlet_prev = 0.0;
  /// Smallest C >= 0 with kinetic_plain + nu*dirichlet <= (1 + C h) nu*dirichlet_prev.
  double fitted_c = 0.0;
};

struct EnergyLedger {
  double h = 0.0;
  double viscosity = 1.0;
  double initial_dirichlet = 0.0;
  std::vector<LedgerRow> rows;
};

EnergyLedger build_ledger(const Trajectory& traj);

/// CSV with header `n,t,kinetic_shifted,kinetic_plain,dirichlet,fitted_c`.
void write_ledger_csv(std::ostream& out, const EnergyLedger& ledger);

// ---------------------------------------------------------------------------
// Per-step and cumulative energy inequalities
// ---------------------------------------------------------------------------

struct StepInequalityRow {
  int n = 0;
  bool holds = true;
  double fitted_c = 0.0;  // clamped at 0, +inf for a vacuous failure
  double raw_c = 0.0;     // unclamped tightest constant (may be negative)
  bool vacuous_failure = false;
};

StepInequalityRow check_step_inequality(const LedgerRow& row, double h, double viscosity = 1.0);

struct StepInequalityReport {
  bool holds = true;
  double max_fitted_c = 0.0;
  double max_raw_c = 0.0;
  std::vector<int> failing_steps;
  std::vector<StepInequalityRow> rows;
};

StepInequalityReport check_step_inequality(const EnergyLedger& ledger);

/// True when the largest value is within `factor` of the smallest (all values
/// below `floor` count as equal).
bool stable_across_ladder(std::span<const double> values, double factor = 2.0,
                          double floor = 1e-12);

struct CumulativeReport {
  bool holds = true;
  double lhs = 0.0;  // sum of shifted kinetic terms + max_n (nu/2) integral |Dv_n|^2
  double bound = 0.0;
  double c_prime = 1.0;
  double tight_constant = 0.0;  // smallest C with C e^{C T} * integral |Da|^2 >= lhs
  double initial_dirichlet = 0.0;
};

/// `c` defaults to the largest fitted constant of the per-step check.
CumulativeReport check_cumulative_estimate(const EnergyLedger& ledger, double T,
                                           std::optional<double> c = std::nullopt);

// ---------------------------------------------------------------------------
// Gradient-scaling monitor
// ---------------------------------------------------------------------------

struct AssumptionAReport {
  std::vector<double> h;
  std::vector<double> max_gradient;  // max over n >= 1 of ||D v_n||_inf
  double alpha = 0.0;                // fitted exponent in max_gradient ~ h^{-alpha}
  bool finite = true;
  bool within_bound = true;  // alpha <= 0.6
};

AssumptionAReport monitor_assumption_a(std::span<const Trajectory* const> ladder);

// ---------------------------------------------------------------------------
// Material-derivative identity
// ---------------------------------------------------------------------------

using Vec2L = std::array<long double, 2>;
using Mat2L = std::array<Vec2L, 2>;  // [c][a] = d v_c / d x_a

/// A velocity field given in closed form, evaluated in extended precision so the
/// divided difference below is not dominated by cancellation.
struct AnalyticVelocity {
  std::function<Vec2L(long double, long double)> value;
  std::function<Mat2L(long double, long double)> jacobian;
};

struct IdentityReport {
  double residual = 0.0;  // L2 gap between the two sides
  double lhs_norm = 0.0;
  double rhs_norm = 0.0;
};

/// (v(x) - v(x - h v(x)))/h against the M-node midpoint rule for
/// the integral over tau in (0,1) of v(x) . Dv(x - h tau v(x)), evaluated at grid nodes.
IdentityReport material_derivative_identity(const AnalyticVelocity& v, const GridSpec& spec,
                                            double h, int M);

/// Same identity on grid data: left side through `backtrace`, Dv sampled off-grid
/// from the discrete velocity gradient.
IdentityReport material_derivative_identity(const VelocityField& v, double h, int M,
                                            InterpOrder order);

// ---------------------------------------------------------------------------
// Time interpolants
// ---------------------------------------------------------------------------

enum class InterpolantMode { PiecewiseConstant, PiecewiseLinear };

/// Piecewise-constant (v_n on (t_{n-1}, t_n]) or piecewise-linear reconstruction of a
/// trajectory. Holds a non-owning reference: the trajectory must outlive it.
class TimeInterpolant {
 public:
  TimeInterpolant(const Trajectory& traj, InterpolantMode mode);

  /// Index n with t in (t_{n-1}, t_n]; t = 0 maps to 1.
  int interval(double t) const;
  VelocityField operator()(double t) const;
  InterpolantMode mode() const { return mode_; }

 private:
  const Trajectory* traj_;
  InterpolantMode mode_;
};

/// max_n ||v_n - v_{n-1}||_L2, which bounds ||v_h(t) - v_hbar(t)|| over the run.
double max_step_change(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Weak-form residual
// ---------------------------------------------------------------------------

using Mat2 = std::array<Vec2, 2>;  // [c][a] = d phi_c / d x_a

struct TestFunction {
  std::string name;
  std::function<Vec2(Vec2, double)> value;
  std::function<Vec2(Vec2, double)> time_derivative;
  std::function<Mat2(Vec2, double)> jacobian;
  bool divergence_free = false;
  bool compact_in_time = false;
  double horizon = 0.0;
};

/// Stream function with its first and second derivatives at a point.
struct StreamDerivatives {
  double dx = 0.0, dy = 0.0, dxx = 0.0, dxy = 0.0, dyy = 0.0;
};

struct StreamFunction {
  std::string name;
  std::function<StreamDerivatives(Vec2)> eval;
};

/// phi(x, t) = b(t) * (d psi/dy, -d psi/dx) with the normalized bump
/// b(t) = 16 t^2 (T - t)^2 / T^4, so phi is solenoidal and vanishes at t = 0 and t = T.
TestFunction curl_test_function(const StreamFunction& psi, double horizon);

/// At least five curl-form test functions suited to the grid's boundary condition.
std::vector<TestFunction> standard_test_functions(const GridSpec& spec, double horizon);

/// Largest |div phi| over random space-time points, from the analytic Jacobian.
double spot_check_divergence(const TestFunction& phi, const GridSpec& spec, std::uint64_t seed,
                             int points = 100);

struct WeakResidual {
  /// -int int <v_h, d_t phi> + nu int int <D v_hbar, D phi>
  double stokes = 0.0;
  /// stokes + int int <(v_hbar . D) v_hbar, phi>
  double navier_stokes = 0.0;
  /// Sum of the absolute interval contributions, a scale for the two numbers above.
  double magnitude = 0.0;
};

/// Integrates each interval (t_{n-1}, t_n] with `gauss_points` Gauss-Legendre nodes
/// (exact for the polynomial bumps of the standard library at the default of 3).
/// Throws std::invalid_argument unless phi has compact support in time matching
/// the trajectory's end time.
WeakResidual weak_residual(const Trajectory& traj, const TestFunction& phi, int gauss_points = 3);

}  // namespace dns
