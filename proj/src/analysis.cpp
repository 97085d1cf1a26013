#include "dns/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "dns/io.hpp"
#include "dns/operators.hpp"

namespace dns {

// ---------------------------------------------------------------------------
// Energy ledger
// ---------------------------------------------------------------------------

EnergyLedger build_ledger(const Trajectory& traj) {
  EnergyLedger ledger;
  ledger.h = traj.h();
  ledger.viscosity = traj.config().viscosity;
  ledger.initial_dirichlet = grad_norm_sq(traj.velocity(0));
  double prev = ledger.initial_dirichlet;
  const double h = traj.h();
  for (int n = 1; n <= traj.steps(); ++n) {
    const auto& v = traj.velocity(n);
    const auto shifted = v - traj.record(n).w;
    const auto plain = v - traj.velocity(n - 1);
    LedgerRow row;
    row.n = n;
    row.t = traj.time(n);
    row.kinetic_shifted = inner_product_l2(shifted, shifted) / (2.0 * h);
    row.kinetic_plain = inner_product_l2(plain, plain) / (2.0 * h);
    row.dirichlet = grad_norm_sq(v);
    row.dirichlet_prev = prev;
    row.fitted_c = check_step_inequality(row, h, ledger.viscosity).fitted_c;
    prev = row.dirichlet;
    ledger.rows.push_back(row);
  }
  return ledger;
}

void write_ledger_csv(std::ostream& out, const EnergyLedger& ledger) {
  out << "n,t,kinetic_shifted,kinetic_plain,dirichlet,fitted_c\n";
  for (const auto& r : ledger.rows)
    out << r.n << ',' << format_double(r.t) << ',' << format_double(r.kinetic_shifted) << ','
        << format_double(r.kinetic_plain) << ',' << format_double(r.dirichlet) << ','
        << format_double(r.fitted_c) << '\n';
}

StepInequalityRow check_step_inequality(const LedgerRow& row, double h, double viscosity) {
  StepInequalityRow out;
  out.n = row.n;
  const double lhs = row.kinetic_plain + viscosity * row.dirichlet;
  const double prev = viscosity * row.dirichlet_prev;
  if (prev == 0.0) {
    out.raw_c = 0.0;
    if (lhs > 0.0) {
      out.vacuous_failure = true;
      out.holds = false;
      out.fitted_c = std::numeric_limits<double>::infinity();
      out.raw_c = out.fitted_c;
    }
    return out;
  }
  out.raw_c = (lhs - prev) / (h * prev);
  out.fitted_c = std::max(0.0, out.raw_c);
  out.holds = std::isfinite(out.fitted_c);
  return out;
}

StepInequalityReport check_step_inequality(const EnergyLedger& ledger) {
  StepInequalityReport report;
  report.max_raw_c = ledger.rows.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (const auto& row : ledger.rows) {
    auto r = check_step_inequality(row, ledger.h, ledger.viscosity);
    if (!r.holds) {
      report.holds = false;
      report.failing_steps.push_back(r.n);
    }
    report.max_fitted_c = std::max(report.max_fitted_c, r.fitted_c);
    report.max_raw_c = std::max(report.max_raw_c, r.raw_c);
    report.rows.push_back(r);
  }
  return report;
}

bool stable_across_ladder(std::span<const double> values, double factor, double floor) {
  if (values.empty()) return true;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (!std::isfinite(*lo) || !std::isfinite(*hi)) return false;
  if (std::abs(*hi) <= floor && std::abs(*lo) <= floor) return true;
  if ((*lo > 0.0) != (*hi > 0.0)) return false;
  const double a = std::abs(*lo);
  const double b = std::abs(*hi);
  return std::max(a, b) <= factor * std::min(a, b);
}

CumulativeReport check_cumulative_estimate(const EnergyLedger& ledger, double T,
                                           std::optional<double> c) {
  CumulativeReport report;
  report.initial_dirichlet = ledger.initial_dirichlet;
  double kinetic_sum = 0.0;
  double max_half_dirichlet = 0.0;
  for (const auto& row : ledger.rows) {
    kinetic_sum += row.kinetic_shifted;
    max_half_dirichlet = std::max(max_half_dirichlet, 0.5 * ledger.viscosity * row.dirichlet);
  }
  report.lhs = kinetic_sum + max_half_dirichlet;
  const double fitted = c ? *c : check_step_inequality(ledger).max_fitted_c;
  report.c_prime = std::max(fitted, 1.0);
  report.bound = report.c_prime * std::exp(report.c_prime * T) * ledger.initial_dirichlet;
  report.holds = std::isfinite(report.bound) && report.lhs <= report.bound;

  // Smallest C >= 0 with C e^{CT} E0 >= lhs; the map is increasing in C.
  if (report.lhs <= 0.0) {
    report.tight_constant = 0.0;
  } else if (ledger.initial_dirichlet <= 0.0) {
    report.tight_constant = std::numeric_limits<double>::infinity();
  } else {
    const double target = report.lhs / ledger.initial_dirichlet;
    auto f = [&](double C) { return C * std::exp(C * T); };
    double lo = 0.0, hi = 1.0;
    while (f(hi) < target) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < target ? lo : hi) = mid;
    }
    report.tight_constant = hi;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Gradient-scaling monitor
// ---------------------------------------------------------------------------

AssumptionAReport monitor_assumption_a(std::span<const Trajectory* const> ladder) {
  AssumptionAReport report;
  for (const Trajectory* traj : ladder) {
    double m = 0.0;
    for (int n = 1; n <= traj->steps(); ++n) m = std::max(m, max_gradient_norm(traj->velocity(n)));
    report.h.push_back(traj->h());
    report.max_gradient.push_back(m);
  }
  const bool all_zero = std::all_of(report.max_gradient.begin(), report.max_gradient.end(),
                                    [](double g) { return g == 0.0; });
  if (all_zero || report.h.size() < 2) {
    report.alpha = 0.0;
  } else {
    // Least-squares slope of log g against log h.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(report.h.size());
    for (std::size_t i = 0; i < report.h.size(); ++i) {
      const double x = std::log(report.h[i]);
      const double y = std::log(report.max_gradient[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    report.alpha = -slope;
  }
  report.finite = std::isfinite(report.alpha) &&
                  std::all_of(report.max_gradient.begin(), report.max_gradient.end(),
                              [](double g) { return std::isfinite(g); });
  report.within_bound = report.finite && report.alpha <= 0.5 + 0.1;
  return report;
}

// ---------------------------------------------------------------------------
// Material-derivative identity
// ---------------------------------------------------------------------------

IdentityReport material_derivative_identity(const AnalyticVelocity& v, const GridSpec& spec,
                                            double h, int M) {
  if (M < 2) throw std::invalid_argument("material-derivative quadrature needs M >= 2");
  if (!(h > 0.0)) throw std::invalid_argument("time step must be positive");
  const long double hl = h;
  long double gap = 0, lhs_sq = 0, rhs_sq = 0;
  for (int j = 0; j < spec.nodes(1); ++j)
    for (int i = 0; i < spec.nodes(0); ++i) {
      const long double x = static_cast<long double>(i) * spec.spacing();
      const long double y = static_cast<long double>(j) * spec.spacing();
      const Vec2L u = v.value(x, y);
      const Vec2L back = v.value(x - hl * u[0], y - hl * u[1]);
      Vec2L left{(u[0] - back[0]) / hl, (u[1] - back[1]) / hl};
      Vec2L right{0, 0};
      for (int m = 0; m < M; ++m) {
        const long double tau = (m + 0.5L) / M;
        const Mat2L J = v.jacobian(x - hl * tau * u[0], y - hl * tau * u[1]);
        for (int c = 0; c < 2; ++c) right[c] += (u[0] * J[c][0] + u[1] * J[c][1]) / M;
      }
      const long double w = spec.quadrature_weight(i, j);
      for (int c = 0; c < 2; ++c) {
        gap += w * (left[c] - right[c]) * (left[c] - right[c]);
        lhs_sq += w * left[c] * left[c];
        rhs_sq += w * right[c] * right[c];
      }
    }
  return {static_cast<double>(std::sqrt(gap)), static_cast<double>(std::sqrt(lhs_sq)),
          static_cast<double>(std::sqrt(rhs_sq))};
}

IdentityReport material_derivative_identity(const VelocityField& v, double h, int M,
                                            InterpOrder order) {
  if (M < 2) throw std::invalid_argument("material-derivative quadrature needs M >= 2");
  const auto& spec = v.spec();
  const auto w = backtrace(v, h, order);
  const auto J = jacobian(v);
  VelocityField left = (1.0 / h) * (v - w);
  VelocityField right(spec);
  for (int j = 0; j < spec.nodes(1); ++j)
    for (int i = 0; i < spec.nodes(0); ++i) {
      const Vec2 x = spec.position(i, j);
      const Vec2 u = v.at(i, j);
      Vec2 acc{0.0, 0.0};
      for (int m = 0; m < M; ++m) {
        const double tau = (m + 0.5) / M;
        const Vec2 p{x[0] - h * tau * u[0], x[1] - h * tau * u[1]};
        for (int c = 0; c < 2; ++c) {
          const double d0 = sample_offgrid(spec, J[c][0].samples(), p, order);
          const double d1 = sample_offgrid(spec, J[c][1].samples(), p, order);
          acc[c] += (u[0] * d0 + u[1] * d1) / M;
        }
      }
      right.set(i, j, acc);
    }
  return {norm_l2(left - right), norm_l2(left), norm_l2(right)};
}

// ---------------------------------------------------------------------------
// Time interpolants
// ---------------------------------------------------------------------------

TimeInterpolant::TimeInterpolant(const Trajectory& traj, InterpolantMode mode)
    : traj_(&traj), mode_(mode) {
  if (traj.steps() < 1) throw std::invalid_argument("interpolant needs at least one step");
}

int TimeInterpolant::interval(double t) const {
  const double h = traj_->h();
  if (t < 0.0 || t > traj_->end_time() * (1.0 + 1e-12))
    throw std::out_of_range("time outside the trajectory");
  const int n = static_cast<int>(std::ceil(t / h - 1e-9));
  return std::clamp(n, 1, traj_->steps());
}

VelocityField TimeInterpolant::operator()(double t) const {
  const int n = interval(t);
  if (mode_ == InterpolantMode::PiecewiseConstant) return traj_->velocity(n);
  const double h = traj_->h();
  const double theta = (t - traj_->time(n - 1)) / h;
  if (theta >= 1.0 - 1e-12) return traj_->velocity(n);
  if (theta <= 1e-12) return traj_->velocity(n - 1);
  VelocityField out = theta * traj_->velocity(n);
  out.axpy(1.0 - theta, traj_->velocity(n - 1));
  return out;
}

double max_step_change(const Trajectory& traj) {
  double m = 0.0;
  for (int n = 1; n <= traj.steps(); ++n)
    m = std::max(m, norm_l2(traj.velocity(n) - traj.velocity(n - 1)));
  return m;
}

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

TestFunction curl_test_function(const StreamFunction& psi, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("test-function horizon must be positive");
  const double T = horizon;
  const double T4 = T * T * T * T;
  auto bump = [T, T4](double t) { return 16.0 * t * t * (T - t) * (T - t) / T4; };
  auto bump_rate = [T, T4](double t) { return 32.0 * t * (T - t) * (T - 2.0 * t) / T4; };
  TestFunction phi;
  phi.name = psi.name;
  phi.horizon = T;
  phi.divergence_free = true;
  phi.compact_in_time = true;
  const auto eval = psi.eval;
  phi.value = [eval, bump](Vec2 x, double t) {
    const auto d = eval(x);
    const double b = bump(t);
    return Vec2{b * d.dy, -b * d.dx};
  };
  phi.time_derivative = [eval, bump_rate](Vec2 x, double t) {
    const auto d = eval(x);
    const double b = bump_rate(t);
    return Vec2{b * d.dy, -b * d.dx};
  };
  phi.jacobian = [eval, bump](Vec2 x, double t) {
    const auto d = eval(x);
    const double b = bump(t);
    return Mat2{Vec2{b * d.dxy, b * d.dyy}, Vec2{-b * d.dxx, -b * d.dxy}};
  };
  return phi;
}

namespace {

StreamFunction trig_mode(int mx, int my, double phase_x, double phase_y, const GridSpec& spec) {
  const double ax = 2.0 * std::numbers::pi * mx / spec.extent[0];
  const double ay = 2.0 * std::numbers::pi * my / spec.extent[1];
  StreamFunction s;
  s.name = "mode_" + std::to_string(mx) + "_" + std::to_string(my);
  if (phase_x != 0.0 || phase_y != 0.0) s.name += "_shifted";
  s.eval = [=](Vec2 x) {
    const double sx = std::sin(ax * x[0] + phase_x), cx = std::cos(ax * x[0] + phase_x);
    const double sy = std::sin(ay * x[1] + phase_y), cy = std::cos(ay * x[1] + phase_y);
    return StreamDerivatives{ax * cx * sy, ay * sx * cy, -ax * ax * sx * sy, ax * ay * cx * cy,
                             -ay * ay * sx * sy};
  };
  return s;
}

// exp(cos(s(x - a)) + cos(s(y - b))): a smooth periodic bump with every Fourier mode.
StreamFunction periodic_bump(double a, double b, const GridSpec& spec, std::string name) {
  const double sx = 2.0 * std::numbers::pi / spec.extent[0];
  const double sy = 2.0 * std::numbers::pi / spec.extent[1];
  StreamFunction s;
  s.name = std::move(name);
  s.eval = [=](Vec2 x) {
    const double tx = sx * (x[0] - a), ty = sy * (x[1] - b);
    const double E = std::exp(std::cos(tx) + std::cos(ty));
    const double snx = std::sin(tx), sny = std::sin(ty);
    return StreamDerivatives{-sx * snx * E, -sy * sny * E,
                             sx * sx * (snx * snx - std::cos(tx)) * E, sx * sy * snx * sny * E,
                             sy * sy * (sny * sny - std::cos(ty)) * E};
  };
  return s;
}

// sin^2(pi x / Lx) sin^2(pi y / Ly) times a trig modulation; its curl vanishes on the walls.
StreamFunction wall_bump(int mx, int my, const GridSpec& spec) {
  const double kx = std::numbers::pi / spec.extent[0];
  const double ky = std::numbers::pi / spec.extent[1];
  const double mkx = mx * kx, mky = my * ky;
  StreamFunction s;
  s.name = "wall_bump_" + std::to_string(mx) + "_" + std::to_string(my);
  s.eval = [=](Vec2 x) {
    // psi = f(x) g(y), f = sin^2(kx x) cos(mkx x), g = sin^2(ky y) cos(mky y)
    auto factor = [](double k, double mk, double z, double& f, double& f1, double& f2) {
      const double s2 = std::sin(k * z) * std::sin(k * z);
      const double ds2 = k * std::sin(2.0 * k * z);
      const double dds2 = 2.0 * k * k * std::cos(2.0 * k * z);
      const double c = std::cos(mk * z), dc = -mk * std::sin(mk * z), ddc = -mk * mk * c;
      f = s2 * c;
      f1 = ds2 * c + s2 * dc;
      f2 = dds2 * c + 2.0 * ds2 * dc + s2 * ddc;
    };
    double f, f1, f2, g, g1, g2;
    factor(kx, mkx, x[0], f, f1, f2);
    factor(ky, mky, x[1], g, g1, g2);
    return StreamDerivatives{f1 * g, f * g1, f2 * g, f1 * g1, f * g2};
  };
  return s;
}

}  // namespace

std::vector<TestFunction> standard_test_functions(const GridSpec& spec, double horizon) {
  std::vector<StreamFunction> psi;
  if (spec.periodic()) {
    psi.push_back(trig_mode(1, 1, 0.0, 0.0, spec));
    psi.push_back(trig_mode(1, 1, 0.3, 1.1, spec));
    psi.push_back(periodic_bump(0.6, 5.3, spec, "bump_0.6_5.3"));
    psi.push_back(periodic_bump(1.0, 2.0, spec, "bump_1_2"));
    psi.push_back(periodic_bump(2.5, 0.7, spec, "bump_2.5_0.7"));
    psi.push_back(periodic_bump(4.0, 4.5, spec, "bump_4_4.5"));
  } else {
    psi.push_back(wall_bump(0, 0, spec));
    psi.push_back(wall_bump(1, 0, spec));
    psi.push_back(wall_bump(0, 1, spec));
    psi.push_back(wall_bump(1, 1, spec));
    psi.push_back(wall_bump(2, 1, spec));
  }
  std::vector<TestFunction> out;
  for (const auto& s : psi) out.push_back(curl_test_function(s, horizon));
  return out;
}

double spot_check_divergence(const TestFunction& phi, const GridSpec& spec, std::uint64_t seed,
                             int points) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, spec.extent[0]), uy(0.0, spec.extent[1]),
      ut(0.0, phi.horizon);
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const Vec2 x{ux(rng), uy(rng)};
    const auto J = phi.jacobian(x, ut(rng));
    worst = std::max(worst, std::abs(J[0][0] + J[1][1]));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Weak-form residual
// ---------------------------------------------------------------------------

namespace {

struct GaussRule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

GaussRule gauss_legendre(int points) {
  // Nodes and weights on [-1, 1].
  std::vector<double> x, w;
  switch (points) {
    case 1: x = {0.0}; w = {2.0}; break;
    case 2: x = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)}; w = {1.0, 1.0}; break;
    case 3: x = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)}; w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}; break;
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      x = {-b, -a, a, b};
      w = {wb, wa, wa, wb};
      break;
    }
    case 5: {
      const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
      const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
      x = {-b, -a, 0.0, a, b};
      w = {wb, wa, 128.0 / 225.0, wa, wb};
      break;
    }
    default: throw std::invalid_argument("gauss_points must be in 1..5");
  }
  GaussRule rule;
  for (std::size_t k = 0; k < x.size(); ++k) {
    rule.nodes.push_back(0.5 * (x[k] + 1.0));
    rule.weights.push_back(0.5 * w[k]);
  }
  return rule;
}

}  // namespace

WeakResidual weak_residual(const Trajectory& traj, const TestFunction& phi, int gauss_points) {
  if (!phi.compact_in_time)
    throw std::invalid_argument("weak residual needs a test function with compact support in time");
  if (!phi.divergence_free) throw std::invalid_argument("weak residual needs a solenoidal test function");
  const double t_end = traj.end_time();
  if (std::abs(phi.horizon - t_end) > 1e-12 * t_end)
    throw std::invalid_argument("test-function support must end at the trajectory end time");

  const auto rule = gauss_legendre(gauss_points);
  const auto& spec = traj.velocity(0).spec();
  const double h = traj.h();
  const double nu = traj.config().viscosity;
  const TimeInterpolant linear(traj, InterpolantMode::PiecewiseLinear);

  WeakResidual out;
  for (int n = 1; n <= traj.steps(); ++n) {
    const auto& vn = traj.velocity(n);
    const auto Jv = jacobian(vn);
    const auto conv = advection(vn);
    double time_term = 0.0, viscous_term = 0.0, convective_term = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = traj.time(n - 1) + rule.nodes[q] * h;
      const double wq = rule.weights[q] * h;
      const auto vh = linear(t);
      double a = 0.0, b = 0.0, c = 0.0;
      for (int j = 0; j < spec.nodes(1); ++j)
        for (int i = 0; i < spec.nodes(0); ++i) {
          const auto k = spec.index(i, j);
          const double wx = spec.quadrature_weight(i, j);
          const Vec2 x = spec.position(i, j);
          const Vec2 dphi = phi.time_derivative(x, t);
          const Vec2 val = phi.value(x, t);
          const Mat2 J = phi.jacobian(x, t);
          a += wx * (vh.component(0)[k] * dphi[0] + vh.component(1)[k] * dphi[1]);
          double ddot = 0.0;
          for (int cc = 0; cc < 2; ++cc)
            for (int aa = 0; aa < 2; ++aa) ddot += Jv[cc][aa].samples()[k] * J[cc][aa];
          b += wx * ddot;
          c += wx * (conv.component(0)[k] * val[0] + conv.component(1)[k] * val[1]);
        }
      time_term += wq * a;
      viscous_term += wq * b;
      convective_term += wq * c;
    }
    out.stokes += -time_term + nu * viscous_term;
    out.navier_stokes += -time_term + nu * viscous_term + convective_term;
    out.magnitude += std::abs(time_term) + std::abs(nu * viscous_term) + std::abs(convective_term);
  }
  return out;
}

}  // namespace dns
