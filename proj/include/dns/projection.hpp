#pragma once

#include <stdexcept>
#include <string>

#include "dns/field.hpp"

namespace dns {

struct SolverOptions {
  /// Relative residual at which the CG / Uzawa iterations stop (Dirichlet grids).
  double rel_tol = 1e-10;
  /// 0 selects the default cap of 10 iterations per cell along the longest axis.
  int max_iters = 0;

  int iteration_cap(const GridSpec& spec) const;
};

struct SolverReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = true;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolverReport report)
      : std::runtime_error(what + " (iterations=" + std::to_string(report.iterations) +
                           ", relative residual=" + std::to_string(report.relative_residual) + ")"),
        report_(report) {}
  const SolverReport& report() const { return report_; }

 private:
  SolverReport report_;
};

/// u = solenoidal + gradient(potential).
struct HelmholtzParts {
  VelocityField solenoidal;
  ScalarField potential;  // zero nodal mean
  SolverReport report;
};

/// Leray-Helmholtz split.
///
/// Periodic: exact division by the Fourier symbol, zero mode of the potential set to 0.
/// Dirichlet: the potential solves the Neumann-type Poisson problem G^T G phi = G^T u
/// by CG, where G is the central-difference gradient restricted to interior nodes; the
/// solenoidal part vanishes on the walls and is orthogonal to every interior gradient.
/// Only interior samples of u enter on a Dirichlet grid.
///
/// Throws SolverError if CG hits its iteration cap.
HelmholtzParts leray_project(const VelocityField& u, const SolverOptions& options = {});

struct StokesSolution {
  VelocityField velocity;
  ScalarField pressure;  // zero nodal mean
  SolverReport report;
};

/// Solves v - h*nu*lap(v) + h*grad(p) = w with div v = 0 (and v = 0 on Dirichlet walls).
///
/// Periodic: v = (I - h nu lap)^{-1} P w mode by mode, p = potential(w) / h.
/// Dirichlet: CG on the pressure Schur complement (an Uzawa iteration with optimal
/// steps) with inner CG solves of the Helmholtz operator. On hitting the iteration
/// cap the best iterate is returned with report.converged = false.
StokesSolution solve_implicit_stokes(const VelocityField& w, double h, double viscosity = 1.0,
                                     const SolverOptions& options = {});

/// L2 norm of v - h*nu*lap(v) + h*grad(p) - w over the velocity degrees of freedom.
double stokes_momentum_residual(const VelocityField& v, const ScalarField& p,
                                const VelocityField& w, double h, double viscosity = 1.0);

/// Gradient restricted to the velocity space (Dirichlet wall samples set to zero).
VelocityField interior_gradient(const ScalarField& f);

/// Backend divergence tolerance used for admissibility checks.
double divergence_tolerance(const GridSpec& spec);

}  // namespace dns
