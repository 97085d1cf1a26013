#include "dns/projection.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "cg.hpp"
#include "dns/operators.hpp"
#include "spectral.hpp"

namespace dns {
namespace {

using spectral::Complex;

// ---------------------------------------------------------------------------
// Dirichlet building blocks. Velocity unknowns are interior nodes (walls are 0);
// scalar unknowns are all nodes. G is the interior central-difference gradient and
// GT its Euclidean transpose, which equals -tau * divergence with tau the
// trapezoidal weight factor (1 inside, 1/2 on edges, 1/4 at corners).
// ---------------------------------------------------------------------------

double wall_factor(const GridSpec& spec, int i, int j) {
  double t = 1.0;
  if (i == 0 || i == spec.nodes(0) - 1) t *= 0.5;
  if (j == 0 || j == spec.nodes(1) - 1) t *= 0.5;
  return t;
}

ScalarField gradient_transpose(const VelocityField& u) {
  auto d = divergence(u);
  const auto& spec = u.spec();
  for (int j = 0; j < spec.nodes(1); ++j)
    for (int i = 0; i < spec.nodes(0); ++i) d(i, j) *= -wall_factor(spec, i, j);
  return d;
}

// Null space of G: the four parity classes on non-corner nodes and the four corners.
// The supports are disjoint, so removing each component in turn is an orthogonal
// projection.
void deflate(ScalarField& f) {
  const auto& spec = f.spec();
  const int nx = spec.nodes(0);
  const int ny = spec.nodes(1);
  auto corner = [&](int i, int j) { return (i == 0 || i == nx - 1) && (j == 0 || j == ny - 1); };
  std::array<double, 4> sum{};
  std::array<int, 4> count{};
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (corner(i, j)) {
        f(i, j) = 0.0;
        continue;
      }
      const int c = (i % 2) + 2 * (j % 2);
      sum[c] += f(i, j);
      ++count[c];
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (corner(i, j)) continue;
      const int c = (i % 2) + 2 * (j % 2);
      f(i, j) -= sum[c] / count[c];
    }
}

SolverReport to_report(const detail::CgOutcome& o) {
  return {o.iterations, o.relative_residual, o.converged};
}

// Solves (I - h nu lap) v = rhs on interior nodes.
VelocityField helmholtz_solve(const VelocityField& rhs, double hnu, double tol, int cap,
                              SolverReport& report) {
  const auto& spec = rhs.spec();
  VelocityField v(spec);
  VelocityField r = rhs;
  r.zero_boundary();
  report = {};
  const int nx = spec.nodes(0);
  const int ny = spec.nodes(1);
  const double dx = spec.spacing();
  const double s = hnu / (dx * dx);
  // Same 5-point stencil as laplacian(); wall rows stay 0.
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (int j = 1; j < ny - 1; ++j) {
      const std::size_t row = static_cast<std::size_t>(j) * nx;
      for (int i = 1; i < nx - 1; ++i) {
        const std::size_t k = row + i;
        out[k] = in[k] - s * (in[k - 1] + in[k + 1] + in[k - nx] + in[k + nx] - 4.0 * in[k]);
      }
    }
  };
  for (int c = 0; c < 2; ++c) {
    auto& x = v.component(c);
    const auto o = detail::conjugate_gradient(apply, r.component(c), x, tol, cap);
    report.iterations = std::max(report.iterations, o.iterations);
    report.relative_residual = std::max(report.relative_residual, o.relative_residual);
    report.converged = report.converged && o.converged;
  }
  return v;
}

HelmholtzParts project_periodic(const VelocityField& u) {
  const auto& spec = u.spec();
  auto ux = spectral::forward(spec, u.component(0));
  auto uy = spectral::forward(spec, u.component(1));
  auto phi = ux;
  const auto k = spectral::derivative_wavenumbers(spec);
  for (int b = 0; b < ux.ny; ++b)
    for (int a = 0; a < ux.nkx; ++a) {
      const double k2 = k.kx[a] * k.kx[a] + k.ky[b] * k.ky[b];
      if (k2 == 0.0) {
        phi.at(a, b) = 0.0;
        continue;
      }
      const Complex kdotu = k.kx[a] * ux.at(a, b) + k.ky[b] * uy.at(a, b);
      phi.at(a, b) = Complex(0.0, -1.0) * kdotu / k2;
      ux.at(a, b) -= k.kx[a] * kdotu / k2;
      uy.at(a, b) -= k.ky[b] * kdotu / k2;
    }
  HelmholtzParts parts{
      VelocityField(spec, spectral::inverse(spec, std::move(ux)), spectral::inverse(spec, std::move(uy))),
      ScalarField(spec, spectral::inverse(spec, std::move(phi))), SolverReport{}};
  parts.potential.remove_mean();
  return parts;
}

HelmholtzParts project_dirichlet(const VelocityField& u, const SolverOptions& options) {
  const auto& spec = u.spec();
  VelocityField interior = u;
  interior.zero_boundary();
  auto rhs = gradient_transpose(interior);
  deflate(rhs);
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    const auto g = interior_gradient(ScalarField(spec, in));
    out = gradient_transpose(g).samples();
  };
  std::vector<double> phi(spec.node_count(), 0.0);
  const auto o = detail::conjugate_gradient(apply, rhs.samples(), phi, options.rel_tol,
                                            options.iteration_cap(spec));
  HelmholtzParts parts{interior, ScalarField(spec, std::move(phi)), to_report(o)};
  parts.solenoidal -= interior_gradient(parts.potential);
  parts.potential.remove_mean();
  if (!o.converged) throw SolverError("Leray projection did not converge", parts.report);
  return parts;
}

StokesSolution stokes_periodic(const VelocityField& w, double h, double viscosity) {
  const auto& spec = w.spec();
  auto parts = project_periodic(w);
  auto vx = spectral::forward(spec, parts.solenoidal.component(0));
  auto vy = spectral::forward(spec, parts.solenoidal.component(1));
  const auto k = spectral::derivative_wavenumbers(spec);
  for (int b = 0; b < vx.ny; ++b)
    for (int a = 0; a < vx.nkx; ++a) {
      const double resolvent = 1.0 / (1.0 + h * viscosity * (k.kx[a] * k.kx[a] + k.ky[b] * k.ky[b]));
      vx.at(a, b) *= resolvent;
      vy.at(a, b) *= resolvent;
    }
  StokesSolution sol{
      VelocityField(spec, spectral::inverse(spec, std::move(vx)), spectral::inverse(spec, std::move(vy))),
      (1.0 / h) * parts.potential, SolverReport{}};
  return sol;
}

StokesSolution stokes_dirichlet(const VelocityField& w_in, double h, double viscosity,
                                const SolverOptions& options) {
  const auto& spec = w_in.spec();
  VelocityField w = w_in;
  w.zero_boundary();
  const double hnu = h * viscosity;
  const int cap = options.iteration_cap(spec);
  const double inner_tol = std::min(1e-13, 1e-3 * options.rel_tol);
  SolverReport inner;

  // Schur complement in q = h p: (G^T A^{-1} G) q = G^T A^{-1} w.
  auto rhs = gradient_transpose(helmholtz_solve(w, hnu, inner_tol, cap, inner));
  deflate(rhs);
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    const auto g = interior_gradient(ScalarField(spec, in));
    SolverReport r;
    out = gradient_transpose(helmholtz_solve(g, hnu, inner_tol, cap, r)).samples();
  };
  std::vector<double> q(spec.node_count(), 0.0);
  const auto o = detail::conjugate_gradient(apply, rhs.samples(), q, options.rel_tol, cap);
  ScalarField qh(spec, std::move(q));
  auto v = helmholtz_solve(w - interior_gradient(qh), hnu, inner_tol, cap, inner);
  StokesSolution sol{std::move(v), (1.0 / h) * qh, to_report(o)};
  sol.pressure.remove_mean();
  sol.report.converged = sol.report.converged && inner.converged;
  return sol;
}

}  // namespace

int SolverOptions::iteration_cap(const GridSpec& spec) const {
  if (max_iters > 0) return max_iters;
  return 10 * std::max(spec.cells[0], spec.cells[1]);
}

double divergence_tolerance(const GridSpec& spec) { return spec.periodic() ? 1e-10 : 1e-8; }

VelocityField interior_gradient(const ScalarField& f) {
  auto g = gradient(f);
  g.zero_boundary();
  return g;
}

HelmholtzParts leray_project(const VelocityField& u, const SolverOptions& options) {
  u.validate();
  return u.spec().periodic() ? project_periodic(u) : project_dirichlet(u, options);
}

StokesSolution solve_implicit_stokes(const VelocityField& w, double h, double viscosity,
                                     const SolverOptions& options) {
  if (!(h > 0.0)) throw std::invalid_argument("time step must be positive");
  w.validate();
  return w.spec().periodic() ? stokes_periodic(w, h, viscosity)
                             : stokes_dirichlet(w, h, viscosity, options);
}

double stokes_momentum_residual(const VelocityField& v, const ScalarField& p,
                                const VelocityField& w, double h, double viscosity) {
  VelocityField r = v;
  r.axpy(-h * viscosity, laplacian(v));
  r.axpy(h, interior_gradient(p));
  r -= w;
  r.zero_boundary();
  return norm_l2(r);
}

}  // namespace dns
