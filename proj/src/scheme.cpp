#include "dns/scheme.hpp"

#include <cmath>

#include "dns/operators.hpp"

namespace dns {
namespace {

SolverOptions tight(const SolverOptions& options) {
  SolverOptions o = options;
  o.rel_tol = std::min(o.rel_tol, 1e-12);
  return o;
}

// B v = v/h - nu lap v, the Hessian of the step functional.
VelocityField apply_hessian(const VelocityField& v, double h, double viscosity) {
  VelocityField out = (1.0 / h) * v;
  out.axpy(-viscosity, laplacian(v));
  out.zero_boundary();
  return out;
}

}  // namespace

std::string_view to_string(StepPath path) {
  return path == StepPath::EulerLagrange ? "euler_lagrange" : "direct_minimize";
}

StepPath parse_step_path(std::string_view text) {
  if (text == "euler_lagrange") return StepPath::EulerLagrange;
  if (text == "direct_minimize") return StepPath::DirectMinimize;
  throw std::invalid_argument("unknown step path: " + std::string(text));
}

int DnsConfig::steps() const {
  return static_cast<int>(std::floor(T / h * (1.0 + 1e-12)));
}

void DnsConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("h must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("T must be positive");
  if (steps() < 1) throw std::invalid_argument("T/h must allow at least one step");
  if (path == StepPath::DirectMinimize && !(minimizer_tol > 0.0))
    throw std::invalid_argument("minimizer_tol must be positive");
  if (minimizer_max_iters < 1) throw std::invalid_argument("minimizer_max_iters must be >= 1");
  if (!(viscosity > 0.0)) throw std::invalid_argument("viscosity must be positive");
  grid.validate();
}

VelocityField backtrace(const VelocityField& v_prev, double h, InterpOrder order) {
  const auto& spec = v_prev.spec();
  VelocityField w(spec);
  for (int j = 0; j < spec.nodes(1); ++j)
    for (int i = 0; i < spec.nodes(0); ++i) {
      const Vec2 x = spec.position(i, j);
      const Vec2 u = v_prev.at(i, j);
      w.set(i, j, sample_offgrid(v_prev, Vec2{x[0] - h * u[0], x[1] - h * u[1]}, order));
    }
  return w;
}

double functional_value_backtraced(const VelocityField& v, const VelocityField& w, double h,
                                   double viscosity) {
  const auto d = v - w;
  return inner_product_l2(d, d) / (2.0 * h) + 0.5 * viscosity * grad_norm_sq(v);
}

double functional_value(const VelocityField& v, const VelocityField& v_prev, double h,
                        InterpOrder order, double viscosity) {
  if (!(h > 0.0)) throw std::invalid_argument("time step must be positive");
  require_same_spec(v.spec(), v_prev.spec());
  return functional_value_backtraced(v, backtrace(v_prev, h, order), h, viscosity);
}

double euler_lagrange_residual(const VelocityField& v, const VelocityField& w, double h,
                               double viscosity, const SolverOptions& options) {
  VelocityField r = (1.0 / h) * (v - w);
  r.axpy(-viscosity, laplacian(v));
  return norm_l2(leray_project(r, tight(options)).solenoidal);
}

ScalarField recover_pressure(const VelocityField& v, const VelocityField& w, double h,
                             double viscosity, const SolverOptions& options) {
  VelocityField r = (1.0 / h) * (w - v);
  r.axpy(viscosity, laplacian(v));
  return leray_project(r, tight(options)).potential;
}

VelocityField minimize_functional(const VelocityField& w, double h, double viscosity, double tol,
                                  int max_iters, const SolverOptions& options,
                                  SolverReport& report) {
  const auto popts = tight(options);
  auto project = [&](const VelocityField& u) { return leray_project(u, popts).solenoidal; };
  VelocityField v = project(w);
  // Residual = -P grad I = P(w/h - B v).
  VelocityField r = project((1.0 / h) * w - apply_hessian(v, h, viscosity));
  const double scale = norm_l2(project((1.0 / h) * w));
  report = {};
  if (scale == 0.0) {
    report.converged = true;
    return v;
  }
  VelocityField p = r;
  double rr = inner_product_l2(r, r);
  while (std::sqrt(rr) > tol * scale && report.iterations < max_iters) {
    const VelocityField Bp = project(apply_hessian(p, h, viscosity));
    const double pBp = inner_product_l2(p, Bp);
    if (!(pBp > 0.0)) break;
    const double alpha = rr / pBp;
    v.axpy(alpha, p);
    r.axpy(-alpha, Bp);
    const double rr_next = inner_product_l2(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    p *= beta;
    p += r;
    ++report.iterations;
  }
  report.relative_residual = std::sqrt(rr) / scale;
  report.converged = std::sqrt(rr) <= tol * scale;
  return v;
}

StepResult dns_step(const VelocityField& v_prev, const DnsConfig& cfg) {
  const double h = cfg.h;
  const double nu = cfg.viscosity;
  StepResult out;
  out.w = backtrace(v_prev, h, cfg.interp);

  auto euler_lagrange = [&](SolverReport& report) {
    auto sol = solve_implicit_stokes(out.w, h, nu, cfg.solver);
    report = sol.report;
    return std::pair{std::move(sol.velocity), std::move(sol.pressure)};
  };
  auto direct = [&](SolverReport& report) {
    auto v = minimize_functional(out.w, h, nu, cfg.minimizer_tol, cfg.minimizer_max_iters,
                                 cfg.solver, report);
    auto p = recover_pressure(v, out.w, h, nu, cfg.solver);
    return std::pair{std::move(v), std::move(p)};
  };

  const bool el_primary = cfg.path == StepPath::EulerLagrange;
  auto [v, p] = el_primary ? euler_lagrange(out.report) : direct(out.report);
  if (!out.report.converged)
    throw SolverError(el_primary ? "implicit Stokes solve did not converge"
                                 : "direct minimization did not converge",
                      out.report);
  if (cfg.cross_check) {
    SolverReport other;
    auto [v2, p2] = el_primary ? direct(other) : euler_lagrange(other);
    const double denom = std::max(norm_l2(v), 1e-300);
    out.cross_check_gap = norm_l2(v - v2) / denom;
    if (*out.cross_check_gap > cfg.cross_check_tol)
      throw std::runtime_error("step paths disagree: relative gap " +
                               std::to_string(*out.cross_check_gap));
  }
  out.v = std::move(v);
  out.p = std::move(p);
  out.functional_value = functional_value_backtraced(out.v, out.w, h, nu);
  out.el_residual = euler_lagrange_residual(out.v, out.w, h, nu, cfg.solver);
  out.el_scale = norm_l2(out.w) / h;
  out.divergence_max = divergence(out.v).max_abs();
  return out;
}

Trajectory::Trajectory(DnsConfig cfg, VelocityField initial) : config_(std::move(cfg)) {
  velocity_.push_back(std::move(initial));
}

void Trajectory::append(StepResult result) {
  velocity_.push_back(std::move(result.v));
  records_.push_back(StepRecord{std::move(result.p), std::move(result.w), result.functional_value,
                                result.el_residual, result.el_scale, result.divergence_max,
                                result.report});
}

Trajectory run(const VelocityField& a, const DnsConfig& cfg, std::span<const StepSink> sinks) {
  cfg.validate();
  a.validate();
  require_same_spec(a.spec(), cfg.grid);
  if (!a.satisfies_boundary_condition())
    throw std::invalid_argument("initial datum violates the wall boundary condition");

  VelocityField v0 = a;
  const double div0 = divergence(a).max_abs();
  bool projected = false;
  if (div0 > divergence_tolerance(cfg.grid)) {
    v0 = leray_project(a, tight(cfg.solver)).solenoidal;
    projected = true;
  }
  Trajectory traj(cfg, std::move(v0));
  traj.initial_projected = projected;
  traj.initial_divergence = div0;

  const int steps = cfg.steps();
  for (int n = 1; n <= steps; ++n) {
    StepResult result;
    try {
      result = dns_step(traj.velocity(n - 1), cfg);
    } catch (const std::exception& e) {
      throw StepFailure(n, e.what());
    }
    for (const auto& sink : sinks) sink(n, n * cfg.h, result);
    traj.append(std::move(result));
  }
  return traj;
}

}  // namespace dns
