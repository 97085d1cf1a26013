#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dns/field.hpp"
#include "dns/interpolation.hpp"
#include "dns/projection.hpp"

namespace dns {

enum class StepPath { EulerLagrange, DirectMinimize };

std::string_view to_string(StepPath path);
StepPath parse_step_path(std::string_view text);

struct DnsConfig {
  double h = 1.0 / 80.0;
  double T = 0.5;
  GridSpec grid{};
  InterpOrder interp = InterpOrder::Linear;
  StepPath path = StepPath::EulerLagrange;
  double minimizer_tol = 1e-12;
  int minimizer_max_iters = 2000;
  /// Scale on the Dirichlet term of the functional. 1 is the unscaled functional;
  /// other values are an extension used to vary the decay rate.
  double viscosity = 1.0;
  /// Run both step paths and fail when they disagree by more than cross_check_tol (relative L2).
  bool cross_check = false;
  double cross_check_tol = 1e-6;
  SolverOptions solver{};

  /// floor(T / h), guarded against T/h landing a rounding error below an integer.
  int steps() const;
  double end_time() const { return steps() * h; }
  /// Throws std::invalid_argument.
  void validate() const;
};

struct StepResult {
  VelocityField v;  // the minimizer v_n
  ScalarField p;
  VelocityField w;  // back-traced previous field
  double functional_value = 0.0;
  /// L2 norm of P((v - w)/h - nu lap v); zero at an exact minimizer.
  double el_residual = 0.0;
  /// Natural scale ||w||/h of the terms entering el_residual.
  double el_scale = 0.0;
  double divergence_max = 0.0;
  SolverReport report;
  std::optional<double> cross_check_gap;
};

class StepFailure : public std::runtime_error {
 public:
  StepFailure(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// w(x) = v_prev(x - h v_prev(x)), sampled off-grid with the given order.
VelocityField backtrace(const VelocityField& v_prev, double h,
                        InterpOrder order = InterpOrder::Linear);

/// Quadrature value of ||v - w||^2 / (2h) + (nu/2) * grad_norm_sq(v) for a given
/// back-traced field w.
double functional_value_backtraced(const VelocityField& v, const VelocityField& w, double h,
                                   double viscosity = 1.0);

/// The step functional, with w = backtrace(v_prev, h, order).
double functional_value(const VelocityField& v, const VelocityField& v_prev, double h,
                        InterpOrder order = InterpOrder::Linear, double viscosity = 1.0);

/// ||P((v - w)/h - nu lap v)||_L2, the projected Euler-Lagrange residual.
double euler_lagrange_residual(const VelocityField& v, const VelocityField& w, double h,
                               double viscosity = 1.0, const SolverOptions& options = {});

/// Minimizes the step functional over divergence-free fields by projected conjugate
/// gradients started from P w. Every search direction is re-projected.
VelocityField minimize_functional(const VelocityField& w, double h, double viscosity, double tol,
                                  int max_iters, const SolverOptions& options,
                                  SolverReport& report);

/// Pressure recovered from the momentum balance: grad p = (w - v)/h + nu lap v.
ScalarField recover_pressure(const VelocityField& v, const VelocityField& w, double h,
                             double viscosity = 1.0, const SolverOptions& options = {});

/// One step v_{n-1} -> v_n. Throws SolverError on solver failure and
/// std::runtime_error when cross-checked paths disagree.
StepResult dns_step(const VelocityField& v_prev, const DnsConfig& cfg);

struct StepRecord {
  ScalarField p;
  VelocityField w;
  double functional_value = 0.0;
  double el_residual = 0.0;
  double el_scale = 0.0;
  double divergence_max = 0.0;
  SolverReport report;
};

/// v_0 .. v_N of one run, plus per-step records for n = 1 .. N.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(DnsConfig cfg, VelocityField initial);

  const DnsConfig& config() const { return config_; }
  double h() const { return config_.h; }
  int steps() const { return static_cast<int>(records_.size()); }
  double time(int n) const { return n * config_.h; }
  double end_time() const { return time(steps()); }

  const VelocityField& velocity(int n) const { return velocity_.at(n); }
  VelocityField& velocity(int n) { return velocity_.at(n); }
  const std::vector<VelocityField>& velocities() const { return velocity_; }
  /// Record of step n (n >= 1).
  const StepRecord& record(int n) const { return records_.at(n - 1); }

  void append(StepResult result);

  bool initial_projected = false;
  double initial_divergence = 0.0;

 private:
  DnsConfig config_{};
  std::vector<VelocityField> velocity_;
  std::vector<StepRecord> records_;
};

using StepSink = std::function<void(int n, double t, const StepResult&)>;

/// Iterates dns_step N = floor(T/h) times from a. An initial datum whose divergence
/// exceeds the backend tolerance is projected once and flagged on the trajectory.
/// Throws std::invalid_argument when a violates the Dirichlet boundary condition and
/// StepFailure when a step fails.
Trajectory run(const VelocityField& a, const DnsConfig& cfg, std::span<const StepSink> sinks = {});

}  // namespace dns
