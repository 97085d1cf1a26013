#pragma once

#include <array>

#include "dns/field.hpp"

namespace dns {

// Discrete differential operators. Periodic grids use Fourier symbols; Dirichlet
// grids use central differences in the interior and one-sided differences on the
// walls. For velocity fields that vanish on the walls the Dirichlet divergence is
// the exact negative adjoint of the interior gradient under trapezoidal quadrature.

ScalarField divergence(const VelocityField& v);
VelocityField gradient(const ScalarField& f);

/// Componentwise Laplacian (5-point on Dirichlet interiors, zero on the walls).
VelocityField laplacian(const VelocityField& v);
ScalarField laplacian(const ScalarField& f);

/// Velocity gradient: entry [c][a] holds d v_c / d x_a.
using Jacobian = std::array<std::array<ScalarField, 2>, 2>;
Jacobian jacobian(const VelocityField& v);

/// Convective term (v . D) v.
VelocityField advection(const VelocityField& v);

double inner_product_l2(const VelocityField& a, const VelocityField& b);
double inner_product_l2(const ScalarField& a, const ScalarField& b);
double norm_l2(const VelocityField& v);
double norm_l2(const ScalarField& f);

/// Raw Dirichlet integral: the integral of |Dv|^2 (no factor 1/2).
///
/// Periodic: spectral derivatives with rectangle quadrature. Dirichlet: squared
/// forward differences over grid edges, whose first variation is the 5-point
/// Laplacian, so that minimizers of functionals built on it satisfy the discrete
/// Euler-Lagrange equation exactly.
double grad_norm_sq(const VelocityField& v);

/// Largest pointwise Frobenius norm of the velocity gradient.
double max_gradient_norm(const VelocityField& v);

}  // namespace dns
