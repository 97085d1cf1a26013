#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dns/analysis.hpp"
#include "dns/field.hpp"
#include "dns/scheme.hpp"

namespace dns {

/// v = A e^{-2 nu t} (sin x cos y, -cos x sin y), p = (A^2/4) e^{-4 nu t} (cos 2x + cos 2y)
/// on the 2 pi torus: an exact solution of the incompressible Navier-Stokes equations.
struct TaylorGreenOracle {
  double amplitude = 1.0;
  double viscosity = 1.0;

  template <class Real>
  std::array<Real, 2> velocity(Real x, Real y, Real t) const {
    using std::cos, std::exp, std::sin;
    const Real a = Real(amplitude) * exp(Real(-2) * Real(viscosity) * t);
    return {a * sin(x) * cos(y), -a * cos(x) * sin(y)};
  }

  /// [c][a] = d v_c / d x_a
  template <class Real>
  std::array<std::array<Real, 2>, 2> jacobian(Real x, Real y, Real t) const {
    using std::cos, std::exp, std::sin;
    const Real a = Real(amplitude) * exp(Real(-2) * Real(viscosity) * t);
    return {{{a * cos(x) * cos(y), -a * sin(x) * sin(y)},
             {a * sin(x) * sin(y), -a * cos(x) * cos(y)}}};
  }

  double pressure(double x, double y, double t) const {
    return 0.25 * amplitude * amplitude * std::exp(-4.0 * viscosity * t) *
           (std::cos(2.0 * x) + std::cos(2.0 * y));
  }
  std::array<double, 2> pressure_gradient(double x, double y, double t) const {
    const double s = -0.5 * amplitude * amplitude * std::exp(-4.0 * viscosity * t);
    return {s * std::sin(2.0 * x), s * std::sin(2.0 * y)};
  }
  std::array<double, 2> laplacian(double x, double y, double t) const {
    const auto v = velocity(x, y, t);
    return {-2.0 * v[0], -2.0 * v[1]};
  }
  std::array<double, 2> time_derivative(double x, double y, double t) const {
    const auto v = velocity(x, y, t);
    return {-2.0 * viscosity * v[0], -2.0 * viscosity * v[1]};
  }

  AnalyticVelocity at_time(double t) const;
};

/// Sampled oracle fields. Throws std::invalid_argument unless the grid is a 2 pi torus.
std::pair<VelocityField, ScalarField> taylor_green_field(double t, const GridSpec& spec,
                                                         const TaylorGreenOracle& oracle = {});

/// Random divergence-free datum with unit RMS speed. Periodic grids: curl of a random
/// trigonometric stream function with modes up to `max_mode` (spectral weight
/// exp(-|m|^2 / max_mode^2) when `smooth`, flat otherwise). Dirichlet grids: the same
/// stream function multiplied by a wall envelope, then discretely projected.
VelocityField random_solenoidal(const GridSpec& spec, std::uint64_t seed, int max_mode = 4,
                                bool smooth = true);

/// Single-cell vortex on a Dirichlet box: the curl of A sin^2(pi x/Lx) sin^2(pi y/Ly),
/// discretely projected so it is admissible as an initial datum.
VelocityField wall_vortex(const GridSpec& spec, double amplitude = 1.0);

struct ConvergenceRow {
  double h = 0.0;
  int cells = 0;
  int steps = 0;
  double comparison_time = 0.0;  // N_T h
  double l2_error = 0.0;
  std::optional<double> order;   // log2 error ratio against the previous row, same grid
  double max_fitted_c = 0.0;
  double runtime_seconds = 0.0;
  std::optional<std::string> failure;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;  // grouped by grid size, decreasing h within a group

  std::string to_csv() const;
  std::string to_text() const;
};

/// Runs the scheme from the oracle at t = 0 for every (h, cells) pair of `cfg`'s
/// grid family and compares with the oracle at N_T h in L2. Rungs run on up to
/// `threads` threads; the table does not depend on the thread count.
ConvergenceTable convergence_study(const DnsConfig& cfg, std::span<const double> h_ladder,
                                   std::span<const int> resolutions,
                                   const TaylorGreenOracle& oracle = {}, int threads = 1);

}  // namespace dns
