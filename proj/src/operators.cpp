#include "dns/operators.hpp"

#include <algorithm>
#include <cmath>

#include "spectral.hpp"

namespace dns {
namespace {

using spectral::Complex;

// d f / d x_axis on a Dirichlet grid.
double fd_derivative(const GridSpec& spec, const std::vector<double>& f, int i, int j, int axis) {
  const double dx = spec.spacing();
  const int n = spec.nodes(axis);
  const int idx = axis == 0 ? i : j;
  auto at = [&](int k) { return axis == 0 ? f[spec.index(k, j)] : f[spec.index(i, k)]; };
  if (idx == 0) return (at(1) - at(0)) / dx;
  if (idx == n - 1) return (at(n - 1) - at(n - 2)) / dx;
  return (at(idx + 1) - at(idx - 1)) / (2.0 * dx);
}

std::vector<double> fd_partial(const GridSpec& spec, const std::vector<double>& f, int axis) {
  std::vector<double> out(spec.node_count());
  for (int j = 0; j < spec.nodes(1); ++j)
    for (int i = 0; i < spec.nodes(0); ++i) out[spec.index(i, j)] = fd_derivative(spec, f, i, j, axis);
  return out;
}

std::vector<double> spectral_partial(const GridSpec& spec, const std::vector<double>& f, int axis) {
  auto s = spectral::forward(spec, f);
  const auto k = spectral::derivative_wavenumbers(spec);
  for (int b = 0; b < s.ny; ++b)
    for (int a = 0; a < s.nkx; ++a) s.at(a, b) *= Complex(0.0, axis == 0 ? k.kx[a] : k.ky[b]);
  return spectral::inverse(spec, std::move(s));
}

std::vector<double> partial(const GridSpec& spec, const std::vector<double>& f, int axis) {
  return spec.periodic() ? spectral_partial(spec, f, axis) : fd_partial(spec, f, axis);
}

std::vector<double> laplacian_samples(const GridSpec& spec, const std::vector<double>& f) {
  std::vector<double> out(spec.node_count(), 0.0);
  if (spec.periodic()) {
    auto s = spectral::forward(spec, f);
    const auto k = spectral::derivative_wavenumbers(spec);
    for (int b = 0; b < s.ny; ++b)
      for (int a = 0; a < s.nkx; ++a) s.at(a, b) *= -(k.kx[a] * k.kx[a] + k.ky[b] * k.ky[b]);
    return spectral::inverse(spec, std::move(s));
  }
  const double inv_dx2 = 1.0 / (spec.spacing() * spec.spacing());
  for (int j = 1; j < spec.nodes(1) - 1; ++j)
    for (int i = 1; i < spec.nodes(0) - 1; ++i) {
      out[spec.index(i, j)] = (f[spec.index(i + 1, j)] + f[spec.index(i - 1, j)] +
                               f[spec.index(i, j + 1)] + f[spec.index(i, j - 1)] -
                               4.0 * f[spec.index(i, j)]) *
                              inv_dx2;
    }
  return out;
}

}  // namespace

ScalarField divergence(const VelocityField& v) {
  const auto& spec = v.spec();
  auto dx = partial(spec, v.component(0), 0);
  const auto dy = partial(spec, v.component(1), 1);
  for (std::size_t k = 0; k < dx.size(); ++k) dx[k] += dy[k];
  return ScalarField(spec, std::move(dx));
}

VelocityField gradient(const ScalarField& f) {
  const auto& spec = f.spec();
  return VelocityField(spec, partial(spec, f.samples(), 0), partial(spec, f.samples(), 1));
}

VelocityField laplacian(const VelocityField& v) {
  const auto& spec = v.spec();
  return VelocityField(spec, laplacian_samples(spec, v.component(0)),
                       laplacian_samples(spec, v.component(1)));
}

ScalarField laplacian(const ScalarField& f) {
  return ScalarField(f.spec(), laplacian_samples(f.spec(), f.samples()));
}

Jacobian jacobian(const VelocityField& v) {
  const auto& spec = v.spec();
  Jacobian J;
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a) J[c][a] = ScalarField(spec, partial(spec, v.component(c), a));
  return J;
}

VelocityField advection(const VelocityField& v) {
  const auto J = jacobian(v);
  VelocityField out(v.spec());
  const auto& vx = v.component(0);
  const auto& vy = v.component(1);
  for (int c = 0; c < 2; ++c) {
    auto& o = out.component(c);
    const auto& d0 = J[c][0].samples();
    const auto& d1 = J[c][1].samples();
    for (std::size_t k = 0; k < o.size(); ++k) o[k] = vx[k] * d0[k] + vy[k] * d1[k];
  }
  return out;
}

double inner_product_l2(const VelocityField& a, const VelocityField& b) {
  require_same_spec(a.spec(), b.spec());
  const auto& spec = a.spec();
  double sum = 0.0;
  for (int j = 0; j < spec.nodes(1); ++j)
    for (int i = 0; i < spec.nodes(0); ++i) {
      const auto k = spec.index(i, j);
      sum += spec.quadrature_weight(i, j) *
             (a.component(0)[k] * b.component(0)[k] + a.component(1)[k] * b.component(1)[k]);
    }
  return sum;
}

double inner_product_l2(const ScalarField& a, const ScalarField& b) {
  require_same_spec(a.spec(), b.spec());
  const auto& spec = a.spec();
  double sum = 0.0;
  for (int j = 0; j < spec.nodes(1); ++j)
    for (int i = 0; i < spec.nodes(0); ++i) sum += spec.quadrature_weight(i, j) * a(i, j) * b(i, j);
  return sum;
}

double norm_l2(const VelocityField& v) { return std::sqrt(inner_product_l2(v, v)); }
double norm_l2(const ScalarField& f) { return std::sqrt(inner_product_l2(f, f)); }

double grad_norm_sq(const VelocityField& v) {
  const auto& spec = v.spec();
  if (spec.periodic()) {
    double sum = 0.0;
    for (int c = 0; c < 2; ++c)
      for (int a = 0; a < 2; ++a) {
        const ScalarField d(spec, spectral_partial(spec, v.component(c), a));
        sum += inner_product_l2(d, d);
      }
    return sum;
  }
  // Edge sum: the cell area dx^2 cancels the 1/dx^2 of the difference quotient.
  const int nx = spec.nodes(0);
  const int ny = spec.nodes(1);
  auto transverse = [](int k, int n) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; };
  double sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    const auto& f = v.component(c);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i + 1 < nx; ++i) {
        const double d = f[spec.index(i + 1, j)] - f[spec.index(i, j)];
        sum += transverse(j, ny) * d * d;
      }
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double d = f[spec.index(i, j + 1)] - f[spec.index(i, j)];
        sum += transverse(i, nx) * d * d;
      }
  }
  return sum;
}

double max_gradient_norm(const VelocityField& v) {
  const auto J = jacobian(v);
  double m = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    double s = 0.0;
    for (int c = 0; c < 2; ++c)
      for (int a = 0; a < 2; ++a) s += J[c][a].samples()[k] * J[c][a].samples()[k];
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

}  // namespace dns
