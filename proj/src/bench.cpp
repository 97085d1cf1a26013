#include "dns/bench.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dns/io.hpp"
#include "dns/operators.hpp"
#include "dns/projection.hpp"

namespace dns {

AnalyticVelocity TaylorGreenOracle::at_time(double t) const {
  const TaylorGreenOracle self = *this;
  const long double tl = t;
  AnalyticVelocity v;
  v.value = [self, tl](long double x, long double y) { return self.velocity(x, y, tl); };
  v.jacobian = [self, tl](long double x, long double y) { return self.jacobian(x, y, tl); };
  return v;
}

std::pair<VelocityField, ScalarField> taylor_green_field(double t, const GridSpec& spec,
                                                         const TaylorGreenOracle& oracle) {
  const double two_pi = 2.0 * std::numbers::pi;
  if (!spec.periodic() || std::abs(spec.extent[0] - two_pi) > 1e-12 ||
      std::abs(spec.extent[1] - two_pi) > 1e-12)
    throw std::invalid_argument("Taylor-Green oracle needs a periodic grid of extent 2 pi");
  auto v = VelocityField::from_function(spec, [&](double x, double y) {
    return oracle.velocity(x, y, t);
  });
  auto p = ScalarField::from_function(spec, [&](double x, double y) {
    return oracle.pressure(x, y, t);
  });
  return {std::move(v), std::move(p)};
}

namespace {

struct Mode {
  double kx, ky, amp, phase;
};

std::vector<Mode> random_modes(const GridSpec& spec, std::uint64_t seed, int max_mode, bool smooth) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<Mode> modes;
  const double sx = 2.0 * std::numbers::pi / spec.extent[0];
  const double sy = 2.0 * std::numbers::pi / spec.extent[1];
  for (int mx = 0; mx <= max_mode; ++mx)
    for (int my = -max_mode; my <= max_mode; ++my) {
      if (mx == 0 && my <= 0) continue;
      const double m2 = mx * mx + my * my;
      if (m2 > max_mode * max_mode) continue;
      const double weight = smooth ? std::exp(-m2 / (max_mode * max_mode)) : 1.0;
      // Stream-function amplitude ~ 1/|m| so the velocity spectrum follows `weight`.
      modes.push_back({sx * mx, sy * my, weight * normal(rng) / std::sqrt(m2), phase(rng)});
    }
  return modes;
}

void normalize_rms(VelocityField& v) {
  const double rms = norm_l2(v) / std::sqrt(v.spec().volume());
  if (rms > 0.0) v *= 1.0 / rms;
}

}  // namespace

VelocityField random_solenoidal(const GridSpec& spec, std::uint64_t seed, int max_mode, bool smooth) {
  spec.validate();
  if (max_mode < 1) throw std::invalid_argument("max_mode must be >= 1");
  const auto modes = random_modes(spec, seed, max_mode, smooth);
  // psi = sum amp cos(k.x + phase); curl psi = (d psi/dy, -d psi/dx).
  auto curl = [&](double x, double y) {
    Vec2 u{0.0, 0.0};
    double psi = 0.0;
    Vec2 dpsi{0.0, 0.0};
    for (const auto& m : modes) {
      const double arg = m.kx * x + m.ky * y + m.phase;
      const double s = std::sin(arg);
      psi += m.amp * std::cos(arg);
      dpsi[0] += -m.amp * m.kx * s;
      dpsi[1] += -m.amp * m.ky * s;
    }
    if (spec.periodic()) {
      u = {dpsi[1], -dpsi[0]};
    } else {
      // Envelope E = sin^2(pi x/L) sin^2(pi y/L) and its gradient vanish on the walls.
      const double kx = std::numbers::pi / spec.extent[0], ky = std::numbers::pi / spec.extent[1];
      const double ex = std::sin(kx * x) * std::sin(kx * x);
      const double ey = std::sin(ky * y) * std::sin(ky * y);
      const double dex = kx * std::sin(2.0 * kx * x), dey = ky * std::sin(2.0 * ky * y);
      const double gx = dex * ey * psi + ex * ey * dpsi[0];
      const double gy = ex * dey * psi + ex * ey * dpsi[1];
      u = {gy, -gx};
    }
    return u;
  };
  auto v = VelocityField::from_function(spec, curl);
  if (!spec.periodic()) {
    v.zero_boundary();
    SolverOptions tight;
    tight.rel_tol = 1e-12;
    v = leray_project(v, tight).solenoidal;
  }
  normalize_rms(v);
  return v;
}

VelocityField wall_vortex(const GridSpec& spec, double amplitude) {
  spec.validate();
  if (spec.periodic()) throw std::invalid_argument("wall vortex needs a Dirichlet grid");
  const double kx = std::numbers::pi / spec.extent[0], ky = std::numbers::pi / spec.extent[1];
  auto v = VelocityField::from_function(spec, [&](double x, double y) {
    const double ex = std::sin(kx * x) * std::sin(kx * x);
    const double ey = std::sin(ky * y) * std::sin(ky * y);
    const double dex = kx * std::sin(2.0 * kx * x), dey = ky * std::sin(2.0 * ky * y);
    return Vec2{amplitude * ex * dey, -amplitude * dex * ey};
  });
  v.zero_boundary();
  SolverOptions tight;
  tight.rel_tol = 1e-12;
  return leray_project(v, tight).solenoidal;
}

std::string ConvergenceTable::to_csv() const {
  std::ostringstream out;
  out << "h,cells,steps,comparison_time,l2_error,order,max_fitted_c,runtime_seconds,status\n";
  for (const auto& r : rows) {
    out << format_double(r.h) << ',' << r.cells << ',' << r.steps << ','
        << format_double(r.comparison_time) << ',' << format_double(r.l2_error) << ','
        << (r.order ? format_double(*r.order) : "") << ',' << format_double(r.max_fitted_c) << ','
        << format_double(r.runtime_seconds) << ',' << (r.failure ? "failed: " + *r.failure : "ok")
        << '\n';
  }
  return out.str();
}

std::string ConvergenceTable::to_text() const {
  std::ostringstream out;
  out << std::left << std::setw(12) << "h" << std::setw(7) << "cells" << std::setw(7) << "steps"
      << std::setw(12) << "t_compare" << std::setw(14) << "L2 error" << std::setw(9) << "order"
      << std::setw(13) << "max C" << "runtime[s]\n";
  for (const auto& r : rows) {
    std::ostringstream order;
    if (r.order) order << std::fixed << std::setprecision(3) << *r.order;
    out << std::left << std::setw(12) << std::setprecision(6) << r.h << std::setw(7) << r.cells
        << std::setw(7) << r.steps << std::setw(12) << r.comparison_time << std::setw(14)
        << std::scientific << std::setprecision(5) << r.l2_error << std::defaultfloat
        << std::setw(9) << order.str() << std::setw(13) << std::setprecision(5) << r.max_fitted_c
        << std::fixed << std::setprecision(3) << r.runtime_seconds << std::defaultfloat;
    if (r.failure) out << "  FAILED: " << *r.failure;
    out << '\n';
  }
  return out.str();
}

ConvergenceTable convergence_study(const DnsConfig& cfg, std::span<const double> h_ladder,
                                   std::span<const int> resolutions,
                                   const TaylorGreenOracle& oracle, int threads) {
  if (h_ladder.empty() || resolutions.empty()) throw std::invalid_argument("empty ladder");
  std::vector<double> hs(h_ladder.begin(), h_ladder.end());
  std::sort(hs.begin(), hs.end(), std::greater<>());
  std::vector<int> grids(resolutions.begin(), resolutions.end());
  std::sort(grids.begin(), grids.end());

  struct Cell {
    double h;
    int cells;
  };
  std::vector<Cell> cells;
  for (int g : grids)
    for (double h : hs) cells.push_back({h, g});

  auto run_cell = [&](const Cell& c) {
    ConvergenceRow row;
    row.h = c.h;
    row.cells = c.cells;
    DnsConfig rung = cfg;
    rung.h = c.h;
    rung.grid.cells = {c.cells, c.cells};
    rung.viscosity = oracle.viscosity;
    row.steps = rung.steps();
    row.comparison_time = rung.end_time();
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto a = taylor_green_field(0.0, rung.grid, oracle).first;
      const auto traj = run(a, rung);
      const auto exact = taylor_green_field(traj.end_time(), rung.grid, oracle).first;
      row.l2_error = norm_l2(traj.velocity(traj.steps()) - exact);
      row.max_fitted_c = check_step_inequality(build_ledger(traj)).max_fitted_c;
    } catch (const std::exception& e) {
      row.failure = e.what();
      row.l2_error = std::numeric_limits<double>::quiet_NaN();
    }
    row.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
  };

  ConvergenceTable table;
  table.rows.resize(cells.size());
  const std::size_t width = static_cast<std::size_t>(std::max(1, threads));
  for (std::size_t begin = 0; begin < cells.size(); begin += width) {
    const std::size_t end = std::min(cells.size(), begin + width);
    if (width == 1) {
      table.rows[begin] = run_cell(cells[begin]);
      continue;
    }
    std::vector<std::future<ConvergenceRow>> jobs;
    for (std::size_t k = begin; k < end; ++k)
      jobs.push_back(std::async(std::launch::async, run_cell, cells[k]));
    for (std::size_t k = begin; k < end; ++k) table.rows[k] = jobs[k - begin].get();
  }
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    auto& r = table.rows[k];
    const auto& prev = table.rows[k - 1];
    if (prev.cells == r.cells && !r.failure && !prev.failure && r.l2_error > 0.0)
      r.order = std::log(prev.l2_error / r.l2_error) / std::log(prev.h / r.h);
  }
  return table;
}

}  // namespace dns
